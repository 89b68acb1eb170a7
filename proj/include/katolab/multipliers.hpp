#pragma once

#include "katolab/fft.hpp"

namespace katolab {

// Fourier multiplier calculus on the lattice. Every operator below maps a
// field to a field in the same representation as its input. Symbols, with
// xi_j = 2*pi*k_j/Lx and tau = 2*pi*m/Lt over signed bins:
//
//   gradx_j   : i*xi_j                      (includes the spatial Nyquist bin)
//   divx      : sum_j i*xi_j F_j
//   half_dt   : |tau|^(1/2)                 (real even symbol, keeps real fields real)
//   hilbert_t : i*sgn(tau), sgn(0) = 0, and 0 at the time Nyquist bin; the
//               unpaired Nyquist mode would otherwise break both realness and
//               skew-adjointness
//   dt        : i*tau
//
// dt = half_dt o hilbert_t o half_dt holds exactly on every mode off the time
// Nyquist line and fails there by construction; callers that rely on the
// factorization work with band-limited data.

Field gradx_component(const Field& f, int axis);
VectorField gradx(const Field& f);
Field divx(const VectorField& F);
Field half_dt(const Field& f);
Field hilbert_t(const Field& f);
Field dt(const Field& f);

// zero every bin with |k| > Nx/3 or |m| > Nt/3 (classic 2/3 dealiasing rule)
void dealias_truncate(Field& f);

// quadrature pairing <f,g> = integral of f * conj(g), trapezoid = cell volume
// times lattice sum; exact for trigonometric polynomials
cplx inner(const Field& f, const Field& g);
double l2_norm(const Field& f);

// Parseval evaluations of the homogeneous pieces of the energy norm
double grad_norm(const Field& f);
double halfdt_norm(const Field& f);

// || (grad_x f, Dt^(1/2) f) ||_2, the seminorm the parabolic estimates scale by
double dd_norm(const Field& f);

struct FieldNorms {
    double l2 = 0.0;
    double grad_l2 = 0.0;
    double halfdt_l2 = 0.0;
    double energy = 0.0;
};

FieldNorms norms(const Field& f);

double l2_norm(const VectorField& F);
cplx inner(const VectorField& F, const VectorField& G);

} // namespace katolab

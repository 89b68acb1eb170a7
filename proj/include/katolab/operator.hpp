#pragma once

#include "katolab/coefficients.hpp"
#include "katolab/multipliers.hpp"

namespace katolab {

// H = dt - divx(A gradx) with A = S + D. The same object realizes the
// adjoint H* = -dt - divx(A^H gradx): with D real antisymmetric the adjoint
// coefficient is A^H = S^H - D, so only a flag changes, not the storage.
//
// The sesquilinear form never differentiates twice. The time block is written
// through the factorization dt = Dt^(1/2) Ht Dt^(1/2), which is where the
// hidden coercivity of the modified form comes from:
//   (H u)(v) = intint A gradx u . conj(gradx v) + <Ht Dt^(1/2) u, Dt^(1/2) v>
// (time block negated for the adjoint).
struct ParabolicOperator {
    GridSpec grid;
    CoefficientField A;
    EllipticityParams params;
    bool adjoint = false;
    bool dealias = false;  // 2/3-rule truncation of the gradients entering products

    // coefficient actually multiplying the gradient, A or A^H
    cplx coef(std::size_t p, int i, int j) const {
        if (!adjoint) return A.S_at(p, i, j) + A.D_at(p, i, j);
        return std::conj(A.S_at(p, j, i)) - A.D_at(p, i, j);
    }
};

ParabolicOperator make_operator(const GridSpec& grid, const CoefficientField& coeffs,
                                const EllipticityParams& params, bool adjoint = false);
ParabolicOperator adjoint_of(const ParabolicOperator& op);

// strong application; costs 2n+3 transforms
Field apply(const ParabolicOperator& op, const Field& u);

// multiply the coefficient tensor into a gradient, honoring adjoint/dealias
VectorField coef_times(const ParabolicOperator& op, const VectorField& grad_u);

cplx form_value(const ParabolicOperator& op, const Field& u, const Field& v);

// D block of the form, evaluated directly and through the antisymmetrized
// rewriting 1/2 sum_ij D_ij (d_j u conj(d_i v) - d_i u conj(d_j v)); the two
// must agree and their (u, u) value must be purely imaginary
cplx form_d_part(const ParabolicOperator& op, const Field& u, const Field& v);
cplx form_d_part_antisym(const ParabolicOperator& op, const Field& u, const Field& v);

struct FormParams {
    double delta = 0.0;
    cplx sigma{1.0, 0.0};
};

// B_{delta,sigma}(u, v) = form(u, (1 + delta Ht) v) + sigma <u, (1 + delta Ht) v>
cplx modified_form_value(const ParabolicOperator& op, const Field& u, const Field& v,
                         const FormParams& fp);

// largest delta with a guaranteed coercivity margin for the given sigma
double delta_star(const EllipticityParams& p, cplx sigma);

struct AccretivityReport {
    double min_re_ratio = 0.0;       // min over samples of Re<Hu,u> / |gradx u|^2
    double max_d_pairing_rel = 0.0;  // |Re D-block| relative to its natural scale
    double max_ht_re_rel = 0.0;      // |Re Ht-block| relative to |Dt^(1/2) u|^2
    int samples = 0;
};

AccretivityReport accretivity_report(const ParabolicOperator& op, int samples,
                                     std::uint64_t seed);

} // namespace katolab

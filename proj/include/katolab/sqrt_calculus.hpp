#pragma once

#include <Eigen/Dense>

#include "katolab/resolvent.hpp"

namespace katolab {

// sqrt(H) through the resolvent resolution
//   sqrt(H) f = (16/pi) int_0^inf (1 + l^2 H)^-3 l^3 H^2 f dl/l
// discretized by the midpoint rule in log l. The integrand is smooth on the
// log axis and decays like l^3 to the left of the spectrum and l^-3 to the
// right, so a geometric grid spanning the spectral window converges fast.
// The scalar identity pins the constant: with z > 0,
//   z^2 int_0^inf l^2 (1+l^2 z)^-3 dl = (pi/16) sqrt(z).
//
// Window placement matters twice over. Truncation leaves relative tails
// (16/3pi) (l_min^2 z)^(3/2) and (16/3pi) (l_max^2 z)^(-3/2) per mode, so the
// window has to bracket [1/sqrt(z_max), 1/sqrt(z_min)] with margin set by the
// tail target. And it should not overshoot on the right: the relative
// residual of a resolvent solve bottoms out near eps * (1 + l^2 z_max)
// because the solver evaluates H through transforms whose rounding the
// symbol amplifies, so far-tail nodes cannot be solved much past that floor.
// quadrature_for picks the window from the lattice symbol range; with the
// default 1e-7 tails the floors stay below ~1e-8 on grids up to 32^3.

struct QuadratureSpec {
    double lambda_min = 1e-4;
    double lambda_max = 1e2;
    int nodes = 200;
};

// largest |i tau + |xi|^2| on the lattice, and the smallest over nonzero modes
double symbol_max(const GridSpec& g);
double symbol_min_nonzero(const GridSpec& g);

QuadratureSpec quadrature_for(const GridSpec& g, double tail_rel = 1e-7,
                              int nodes_per_decade = 24);

struct SqrtDiagnostics {
    double first_node_rel = 0.0;  // |first node contribution| / |result|
    double last_node_rel = 0.0;
    int solves = 0;
};

Field sqrt_apply(const ParabolicOperator& op, const Field& u, const QuadratureSpec& quad,
                 const SolverConfig& cfg, SqrtDiagnostics* diag = nullptr);

// multiplier sqrt(i tau + |xi|^2) (principal branch; conjugate time sign for
// the adjoint), the closed form of sqrt(H) when A = I
Field sqrt_heat_symbol(const Field& u, bool adjoint = false);

// Dense reference: assemble H as a matrix (refuses more than 4096 dof),
// Schur-factor it, take the principal square root of the triangular factor by
// the standard recurrence, and transform back.
struct DenseOracle {
    Eigen::MatrixXcd root;
    double selfcheck_rel = 0.0;  // ||root^2 - H||_F / ||H||_F
    double min_re_eig = 0.0;     // smallest real part on the Schur diagonal
};

DenseOracle sqrt_dense_oracle(const ParabolicOperator& op);
Field oracle_apply(const DenseOracle& oracle, const Field& u);

// ||sqrt(H) u|| / (||gradx u|| + ||Dt^(1/2) u||) over deterministic samples
struct KatoReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::vector<double> ratios;
};

KatoReport kato_ratio_sweep(const ParabolicOperator& op, int samples, std::uint64_t seed,
                            const QuadratureSpec& quad, const SolverConfig& cfg);

// A = I closed form: squared per-mode ratio sqrt(tau^2 + |xi|^4) / (|xi| + |tau|^(1/2))^2
// enumerated over every nonzero lattice mode
struct SymbolRatioRange {
    double min_sq = 0.0;
    double max_sq = 0.0;
};

SymbolRatioRange enumerate_symbol_ratios(const GridSpec& g);

} // namespace katolab

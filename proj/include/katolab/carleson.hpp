#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "katolab/dyadic.hpp"
#include "katolab/lp_toolkit.hpp"
#include "katolab/resolvent.hpp"

namespace katolab {

// Testing machinery around U_lambda = lambda E_lambda divx applied to the
// columns of the coefficient tensor: local square functions of U_lambda A
// over parabolic dyadic cubes, the remainder R_lambda, and the localized
// test functions that reduce the Carleson bound to averaged gradients.

// ---------------------------------------------------------------- U_lambda A

// Component i = lambda E_lambda divx(A_i) with A_i the i-th column of the
// coefficient tensor actually multiplying gradients (so the adjoint flag is
// honored). The per-time spatial average of D over the full torus is
// subtracted first; that subtraction is idempotent, leaves the operator's
// action unchanged, and divx kills the subtracted constants, so constant
// columns map to exactly zero.
VectorField u_lambda_A(const ParabolicOperator& op, double lambda, const SolverConfig& cfg);

// Immutable per-lambda table of U_lambda A, built once and then shared
// read-only by the Carleson functional and the reduction check.
class UlambdaCache {
  public:
    UlambdaCache(const ParabolicOperator& op, std::vector<double> lambdas,
                 const SolverConfig& cfg);

    // operator with the normalized coefficients the table was built from
    const ParabolicOperator& op() const { return op_; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    // exact-key lookup; throws std::out_of_range for a lambda not tabulated
    const VectorField& at(double lambda) const;

  private:
    ParabolicOperator op_;
    std::vector<double> lambdas_;
    std::map<double, VectorField> table_;
};

// --------------------------------------------------------- gamma comparisons

struct ThetaAbReport {
    double lambda = 0.0;
    int scale = 0;               // dyadic scale matched to lambda
    double gamma = 0.0;          // sup over matched cubes of ||U A||^2_{L2(cube)} / |cube|
    std::size_t gamma_cube = 0;  // attaining cube id at that scale
    double gamma_prime = 0.0;    // max over probes of ||(U A) . A_lambda f||_2, ||f||_2 = 1
    std::string probe;           // "caller" or "indicator", whichever attained gamma_prime
    double forward_ratio = 0.0;  // gamma_prime^2 / gamma
    double converse_ratio = 0.0; // gamma / gamma_prime^2
    double converse_bound = 0.0; // lattice volume ratio |2 cube| / |cube| at the attaining cube
    bool pass = false;
};

// Two-sided comparison between the cube-normalized local norms of U_lambda A
// (quadratic form, "gamma") and its multiplier norm against dyadically
// averaged probes (linear form, "gamma_prime"). Because the averaged probe is
// constant on each matched cube and averaging is an L2 contraction,
// gamma_prime^2 <= gamma holds for every probe; conversely the normalized
// indicator of the dilated attaining cube, whose average is identically one
// on the cube itself, forces gamma <= (|2 cube|/|cube|) gamma_prime^2. The
// probe set is the caller's f plus that indicator, so both inequalities are
// asserted up to a roundoff allowance and recorded in the report. The caller
// probe is normalized internally; a zero probe throws std::invalid_argument.
ThetaAbReport theta_ab_bounds(const ParabolicOperator& op, double lambda, const Field& f,
                              const SolverConfig& cfg);

// sup over the decomposition's cubes of |cube|^{-1} || A_i - (per-slice
// spatial cube mean) ||^2_{L2(cube)}, maximized over columns i. This is the
// oscillation benchmark the cube scans of U_lambda A are measured against;
// it is invariant under the per-time normalization of D.
double upsilon_bound(const ParabolicOperator& op, const DyadicDecomposition& dec);

// ------------------------------------------------------------------ R_lambda

struct RlambdaReport {
    Field r;                // U_lambda(A V) - (U_lambda A) . A_lambda V
    double r_norm = 0.0;
    double majorant = 0.0;  // lambda ||gradx V|| + lambda^2 ||dt V||
    double ratio = 0.0;     // r_norm / majorant, 0 when both vanish
};

// R_lambda applied to gradx g; the majorant is the second-order scale
// lambda ||gradx gradx g|| + lambda^2 ||dt gradx g|| and the ratio is the
// measured constant of the smoothing estimate.
RlambdaReport r_lambda_apply(const ParabolicOperator& op, double lambda, const Field& g,
                             const SolverConfig& cfg);

// Same with an explicit vector field in place of gradx g; used to probe the
// averaged-direction identity with V exactly invariant under A_lambda.
RlambdaReport r_lambda_apply(const ParabolicOperator& op, double lambda, const VectorField& V,
                             const SolverConfig& cfg);

// ------------------------------------------------------------ test functions

// Smooth plateau profiles for the localized test functions. cutoff_chi1 is
// the per-axis spatial factor, 1 on |u| <= 1/2 and 0 for |u| >= 1;
// cutoff_eta is the time factor, 1 on |s| <= 1/4 and 0 for |s| >= 1. Both
// are infinitely smooth ramps in between.
double cutoff_chi1(double u);
double cutoff_eta(double s);

// chi_Delta * (Phi_Delta . zeta) sampled on the lattice: the product plateau
// cutoff around the cube (spatial arguments scaled by ell, time by the
// parabolic time side) times the toroidal displacement from the cube center
// projected on zeta. Wrap-evaluated, hence defined for every cube, but only
// a faithful localized profile when the doubled cube fits the torus.
// Components of zeta beyond grid.n are ignored.
Field tb_profile_L(const GridSpec& g, const ParabolicCube& Delta,
                   const std::array<double, 3>& zeta);

struct TestFunctionPair {
    Field L;       // localized linear profile, vanishes at the cube center
    Field f_test;  // resolvent at scale epsilon * ell applied to L
    SolveStats stats;
};

// Throws SupportOverflow when the doubled cube does not fit the torus and
// std::invalid_argument for epsilon outside (0,1) or a non-unit zeta.
TestFunctionPair test_function(const ParabolicOperator& op, const ParabolicCube& Delta,
                               const std::array<double, 3>& zeta, double epsilon,
                               const SolverConfig& cfg);

struct LaaReport {
    double ratio_i = 0.0;    // ||f_test - L||^2 / ((eps ell)^2 |Delta|)
    double ratio_ii = 0.0;   // (||gradx(f_test - L)||^2 + ||Dt^1/2(f_test - L)||^2) / |Delta|
    double ratio_iii = 0.0;  // (||gradx f_test||^2 + ||Dt^1/2 f_test||^2) / |Delta|
    double ratio_i_half = 0.0;  // the same three ratios at epsilon / 2
    double ratio_ii_half = 0.0;
    double ratio_iii_half = 0.0;
    double eps_scaling = 0.0;  // ratio_i / ratio_i_half; ~4 while the
                               // smoothing error outpaces its first-order bound
};

// The three smoothing ratios for the test function at epsilon and epsilon/2.
// Ratio (i) carries an extra epsilon^2 beyond its normalizer, so halving
// epsilon divides it by about four; (ii) and (iii) are epsilon-stable.
LaaReport verify_laa(const ParabolicOperator& op, const ParabolicCube& Delta,
                     const std::array<double, 3>& zeta, double epsilon,
                     const SolverConfig& cfg);

// -------------------------------------------------------------- configuration

// level 1: the 2n signed axis vectors plus the 2n(n-1) signed two-axis
// diagonals, all unit length. For n = 2 this is 8 equally spaced directions
// and every further level doubles the count by angular bisection; for n = 3
// higher levels add the 8 corner directions. n = 1 has only the two signs.
std::vector<std::array<double, 3>> default_directions(int n, int level = 1);

struct TbConfig {
    double epsilon = 0.1;
    std::vector<std::array<double, 3>> directions;
    int j_cap = 2;  // deepest dyadic scale entering the reduction scan
};

// throws std::invalid_argument for epsilon outside (0,1) or level < 1
TbConfig make_tb_config(int n, double epsilon = 0.1, int direction_level = 1);

// --------------------------------------------------------- Carleson functional

struct CarlesonCubeValue {
    int scale = 0;
    std::size_t cube = 0;
    double value = 0.0;
};

struct CarlesonReport {
    std::vector<CarlesonCubeValue> values;  // every cube at every scanned scale
    double supremum = 0.0;
    int sup_scale = 0;
    std::size_t sup_cube = 0;
    int lambda_nodes = 0;          // quadrature nodes inside (0, ell] at the attaining scale
    double first_node_frac = 0.0;  // smallest node's share of the attaining value
    double last_node_frac = 0.0;   // largest node's share; truncation indicators
};

// Per cube: the ladder quadrature of the lambda integral of ||U_lambda A||^2
// over the cube, nodes restricted to lambda <= ell(cube), divided by the
// cube volume; then the supremum over every cube at every scale. The ladder
// carries the log-uniform weight, so sums approximate d lambda / lambda.
CarlesonReport carleson_functional(const ParabolicOperator& op, const DyadicDecomposition& dec,
                                   const LambdaGrid& grid, const SolverConfig& cfg);

// variant reusing a prebuilt table and restricting the scan to scales
// j_lo..j_hi (both clamped to the decomposition's range)
CarlesonReport carleson_functional(const UlambdaCache& cache, const DyadicDecomposition& dec,
                                   const LambdaGrid& grid, int j_lo, int j_hi);

// "scale,cube,value" rows, deterministic formatting
std::string carleson_csv(const CarlesonReport& report);

// ------------------------------------------------------------ reduction check

struct TbReductionReport {
    double left = 0.0;   // sup over scanned cubes of the normalized lambda
                         // integral of ||U_lambda A||^2
    double right = 0.0;  // sum over directions of the sup over scanned cubes
                         // with the averaged test-function gradient inserted
    double ratio = 0.0;  // left / right; 0 when both vanish
    std::vector<double> per_direction;  // per-direction suprema
    int attaining_direction = -1;
    int attaining_scale = 0;
    std::size_t attaining_cube = 0;
    int j_lo = 1;  // scanned scale window; scale 0 is excluded because the
    int j_hi = 1;  // doubled torus-sized cube cannot host the cutoffs
    double epsilon = 0.0;
};

// Both sides of the reduction to test functions, measured over the same
// dyadic scale window j in [1, min(j_cap, j_max)]: the left side is the
// Carleson supremum of ||U_lambda A||^2 and the right side sums, over the
// configured directions zeta, the supremum of the same functional with the
// integrand replaced by |(U_lambda A) . A_lambda gradx f|^2, where f is the
// per-cube test function for zeta. The recorded ratio left/right is the
// measured comparison constant.
TbReductionReport tb_reduction_check(const ParabolicOperator& op,
                                     const DyadicDecomposition& dec, const TbConfig& tb,
                                     const LambdaGrid& grid, const SolverConfig& cfg);

}  // namespace katolab

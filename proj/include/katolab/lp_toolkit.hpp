#pragma once

#include <functional>
#include <map>

#include "katolab/dyadic.hpp"
#include "katolab/resolvent.hpp"

namespace katolab {

// thrown when a mollifier's scaled support no longer fits on the torus
struct SupportOverflow : public std::domain_error {
    using std::domain_error::domain_error;
};

// Product mollifier P(x,t) = P1(x) P2(t) built from the standard bump
// c*exp(-1/(1-s^2)) on |s| < 1. Both factors are radial, nonnegative, and
// normalized to unit integral, so each transform is real, even, equals 1 at
// the origin, and has magnitude at most 1. Evenness kills the first moment
// of P1, which is the cancellation the commutator estimates lean on.
//
// Convolutions are evaluated spectrally: the factor transforms are computed
// by fixed-order Gauss-Legendre quadrature of the profile (exact to machine
// precision for every argument the lattice can produce) and cached per lambda.
class Mollifier {
  public:
    explicit Mollifier(const GridSpec& g, int quad_points = 192);

    // the unnormalized radial profile, zero outside |s| < 1
    static double profile(double s);

    double symbol1(double r) const;  // transform of P1 at radius r
    double symbol2(double r) const;  // transform of P2 at frequency r

    // supports fit while lambda <= Lx/2 and lambda^2 <= Lt/2
    double lambda_cap() const;

    Field conv_p(double lambda, const Field& f) const;
    Field conv_p1(double lambda, const Field& f) const;
    Field conv_p2(double lambda, const Field& f) const;

  private:
    struct Symbols {
        std::vector<double> sx;  // per spatial bin block
        std::vector<double> st;  // per time bin
    };
    const Symbols& symbols_for(double lambda) const;
    Field convolve(double lambda, const Field& f, bool spatial, bool temporal) const;

    GridSpec grid_;
    std::vector<double> nodes_, weights_;  // Gauss-Legendre on [0, 1]
    double norm1_ = 0.0, norm2_ = 0.0;     // profile integrals before normalization
    std::vector<double> radius_;           // |xi| per spatial bin block
    std::vector<double> tau_;              // |tau| per time bin
    mutable std::map<double, Symbols> cache_;
};

// Centered-window maximal functions in the separate variables: m1 scans all
// spatial cube half-widths per time slice, m2 all time interval half-widths
// per spatial site. Brute force by design; these back pointwise property
// checks at desk scale and never sit in a hot path.
Field maximal_m1(const Field& f);
Field maximal_m2(const Field& f);

// Geometric lambda ladder with the log-uniform midpoint weight h, so that
// sum_j h = log(hi/lo) exactly and square-function integrals become plain
// weighted sums. Defaults span [1e-2, 1e1]; the LP window variant matches
// scales the lattice actually resolves, from two cells up to a quarter
// period.
struct LambdaGrid {
    std::vector<double> values;
    double weight = 0.0;

    LambdaGrid() { *this = geometric(1e-2, 1e1, 64); }

    static LambdaGrid geometric(double lo, double hi, int per_decade);
    static LambdaGrid lp_window(const GridSpec& g, int per_decade = 64);

  private:
    struct raw_t {};
    explicit LambdaGrid(raw_t) {}
};

struct TripleNormDiag {
    double first_frac = 0.0;  // first node's share of the squared sum
    double last_frac = 0.0;
};

// ||| g |||_2 restricted to the ladder: sqrt(sum_j h ||g(lambda_j)||_2^2)
double triple_norm(const std::function<Field(double)>& family, const LambdaGrid& grid,
                   TripleNormDiag* diag = nullptr);

// Measured constants of the three Littlewood-Paley estimates, per sample:
//   regularity: (|||l grad P_l f||| + |||l^2 dt P_l f||| + |||l Dhalf P_l f|||) / ||f||
//   cancel:     |||l^-1 (I - P_l) f||| / ||D f||
//   compare:    |||(A_l - P_l) f||| / ||f||
struct LpSuiteRow {
    double c_regularity = 0.0;
    double c_cancel = 0.0;
    double c_compare = 0.0;
};

struct LpSuiteReport {
    std::vector<LpSuiteRow> rows;
    double max_regularity = 0.0;
    double max_cancel = 0.0;
    double max_compare = 0.0;
};

LpSuiteReport verify_lp_suite(const std::vector<Field>& samples, const LambdaGrid& grid);

// The reduction estimate ||| lambda E_lambda H f |||_2 <= C ||D f||_2, with
// the built-in cross-check lambda E_lambda H = lambda^-1 (I - E_lambda): both
// sides come from independent solves, so they agree to the solver tolerance
// on the scale lambda ||Hf|| + lambda^-1 ||f||.
struct KeeRow {
    double ratio = 0.0;         // |||lambda E_lambda H f||| / ||D f||
    double identity_rel = 0.0;  // worst gap of the two routes over the ladder
};

struct KeeReport {
    std::vector<KeeRow> rows;
    double max_ratio = 0.0;
    double max_identity_rel = 0.0;
};

KeeReport verify_kee(const ParabolicOperator& op, const std::vector<Field>& samples,
                     const LambdaGrid& grid, const SolverConfig& cfg);

}  // namespace katolab

#pragma once

#include "katolab/dyadic.hpp"
#include "katolab/resolvent.hpp"

namespace katolab {

// Off-diagonal decay laboratory for the resolvent family E_lambda: weighted
// norm bounds, time-separated set bounds, annulus-to-cube tables, and the
// least-squares extraction of the empirical decay constant. The continuum
// estimates only assert existence of a rate constant c, so nothing here
// compares against a literature value; checks are sign and monotonicity of
// fitted slopes plus regression values frozen from reference runs.

// Pair of lattice subsets with their separation cached. Distances use the
// parabolic norm |x| + |t|^(1/2) with toroidal wraparound per axis.
struct SeparatedSets {
    GridSpec grid;
    std::vector<std::uint8_t> E, F;

    // inf over (x,t) in E, (y,s) in F of |x-y| + |t-s|^(1/2); zero iff the
    // closures touch, so d > 0 certifies E and F disjoint
    double d = 0.0;

    // inf of |t-s|^(1/2) over the time projections pi(E), pi(F) alone; this
    // is the gap the time-separated bound decays in
    double time_gap = 0.0;

    SeparatedSets(const GridSpec& g, std::vector<std::uint8_t> e, std::vector<std::uint8_t> f);
};

// mask of the full spatial torus times `cells` time steps starting at it0
// (wrapped); building block for time-slab separation experiments
std::vector<std::uint8_t> time_slab_mask(const GridSpec& g, int it0, int cells);

// Source shaping. Two lattice obstructions make sharp indicator sources a bad
// probe of off-diagonal decay. First, spectral derivatives of a jump ring all
// over the torus at algebraic amplitude, which buries exponential tails.
// Second, the per-time-slice spatial mean of a compactly supported source is
// spread uniformly by the k_x = 0 modes and never decays in space; on the
// plane that mean has zero density, on the torus it does not. Sources are
// therefore tapered smoothly inside the stated support and (for scalars) made
// spatially mean-free per slice. Target regions stay sharp masks: the
// estimates restrict the output, and that restriction is harmless.

// smallest dilation factor c with (x,t) in c*Delta; spatial part sup-norm,
// time part sqrt, matching the parabolic dilation cQ x c^2 I
double cube_gauge(const GridSpec& g, const ParabolicCube& delta, const std::array<int, 3>& ix,
                  int it);

// smooth bump supported strictly inside Delta / inside 2^(k+1)Delta \ 2^k Delta
Field cube_taper(const GridSpec& g, const ParabolicCube& delta);
Field annulus_taper(const GridSpec& g, const ParabolicCube& delta, int k);

// smooth bump over the `cells` time steps starting at it0, constant in space
Field slab_taper(const GridSpec& g, int it0, int cells);

// taper * (base - c(t)) with c(t) chosen so every time slice has zero spatial
// mean; support stays inside the taper's. Slices where the taper covers a
// single lattice cell keep the bare tapered value (a one-cell atom has no
// mean-free part). Throws when the product vanishes identically (taper
// missed the lattice).
Field shaped_source(const Field& base, const Field& taper);

// Least-squares line through (separation/lambda, log norm-ratio) points.
// A fit is only meaningful when the abscissa really sweeps a range, so the
// constructor function requires >= 4 points spanning a factor >= 4.
struct DecayFit {
    std::vector<std::array<double, 2>> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    bool decaying = false;  // slope negative beyond the roundoff scale of the data

    // empirical rate constant: ratio ~= exp(-sep/(c*lambda)) gives c = -1/slope;
    // +inf when the data does not decay
    double c_hat() const;
};

// throws std::invalid_argument("insufficient spread") when the point set
// cannot support a fit
DecayFit fit_decay(const std::vector<std::array<double, 2>>& points);

struct OffDiagConfig {
    double theta = 0.1;               // weight magnitude cap |chi| <= theta
    int k_max = 3;                    // annuli visited per table
    std::vector<double> lambda_list;  // sweep lambdas; empty = geometry-derived default
    SolverConfig solver;
    std::uint64_t seed = 0x0ffd1a6;   // source-field draw
    // ratios below this are solver junk rather than decay and are excluded
    // from fits (a GMRES tolerance of 1e-10 cannot certify a 1e-12 ratio)
    double fit_floor = 1e-9;
};

// Periodized stand-in for the weight exp(x.chi/lambda): each coordinate
// enters through the slope +-1 triangle wave that agrees with u -> u on
// [-Lx/4, Lx/4) around the anchor, so within the quarter-period box the
// weight equals exp((x-x0).chi/lambda) and everywhere its log-gradient is
// bounded by |chi|/lambda, which is the mechanism the weighted bound runs on.
Field tent_weight(const GridSpec& g, const std::array<double, 3>& chi, double lambda,
                  const std::array<double, 3>& anchor = {0.0, 0.0, 0.0});

struct ExpWeightedReport {
    double lambda = 0.0;
    double chi_mag = 0.0;
    bool within_theta = true;  // |chi| <= theta; the bound is only claimed when set

    double rhs = 0.0;             // ||W f||, shared by all three ratios
    double resolvent_ratio = 0.0; // ||W E_lambda f|| / rhs
    double gradient_ratio = 0.0;  // ||lambda W grad_x E_lambda f|| / rhs
    double div_ratio = 0.0;       // ||W lambda E_lambda div F|| / rhs, F_a = f/sqrt(n)
};

// Weighted-resolvent check. chi larger than theta is allowed for exploratory
// sweeps (that is how the theta restriction is demonstrated); the report
// flags such calls and no bound applies to them. chi = 0 makes the weight
// identically one and the ratios coincide with the uniform resolvent bounds.
// Throws std::domain_error when the requested weight overflows doubles.
ExpWeightedReport exp_weighted_check(const ParabolicOperator& op, double lambda,
                                     const std::array<double, 3>& chi, const Field& f,
                                     const OffDiagConfig& cfg,
                                     const std::array<double, 3>& anchor = {0.0, 0.0, 0.0});

// Running maxima over a family of weighted checks; flag_and_update returns
// true when an incoming ratio exceeds twice the maximum seen so far, which
// is the "something broke" tripwire for sweeps.
struct ExpWeightedFamilyMax {
    double resolvent = 0.0;
    double gradient = 0.0;
    double divergence = 0.0;
    bool flag_and_update(const ExpWeightedReport& r);
};

// which operator variant a decay table exercises
enum class OffDiagVariant { scalar, gradient_source, div_source };
const char* variant_name(OffDiagVariant v);

struct AnnulusRow {
    int k = 0;
    double separation = 0.0;     // 2^k ell(Delta)
    double source_norm = 0.0;    // forward-direction source on the annulus
    double ratio = 0.0;          // cube-restricted output norm / source norm
    double reversed_ratio = 0.0; // support on the cube, measured on the annulus
};

struct AnnuliTable {
    OffDiagVariant variant = OffDiagVariant::scalar;
    double lambda = 0.0;
    double ell = 0.0;
    std::vector<AnnulusRow> rows;  // k = 1 .. k_max
};

// Annulus experiment around a parabolic cube: a fixed random field is shaped
// into the annulus 2^(k+1)Delta \ 2^k Delta (tapered support, see above) and
// the chosen variant of the resolvent is measured on Delta (ratio), then with
// supports swapped (reversed_ratio). Dilation is parabolic, c Delta = cQ x
// c^2 I. Throws std::domain_error once 2^(k+1) Delta leaves the torus.
AnnuliTable annuli_decay(const ParabolicOperator& op, const ParabolicCube& delta, double lambda,
                         OffDiagVariant kind, const OffDiagConfig& cfg);

struct AnnuliFitResult {
    std::vector<AnnuliTable> tables;  // one per lambda
    DecayFit fit;                     // pooled (separation/lambda, log ratio), forward
    DecayFit reversed_fit;
    int excluded = 0;  // sub-floor points dropped before fitting
};

// Pools (k, lambda) rows on the shared abscissa separation/lambda, so a short
// k range still spans enough decades to fit. Empty cfg.lambda_list defaults
// to ell/2, ell/4, ell/8.
AnnuliFitResult annuli_fit(const ParabolicOperator& op, const ParabolicCube& delta,
                           OffDiagVariant kind, const OffDiagConfig& cfg);

struct TimeSeparatedReport {
    double lambda = 0.0;
    double d = 0.0;          // time-projection gap of the set pair
    double ratio = 0.0;      // (int_F |Ef|^2 + |lambda grad Ef|^2) / int_E |f|^2
    double div_ratio = 0.0;  // int_F |lambda E div F|^2 / int_E |F|^2, F_a = f/sqrt(n)
};

// Both ratios are squared-norm (energy) ratios, matching the estimates they
// probe. Requires supp f inside E and time_gap > 0; violations throw
// std::invalid_argument.
TimeSeparatedReport time_separated_check(const ParabolicOperator& op, const SeparatedSets& sets,
                                         double lambda, const Field& f, const OffDiagConfig& cfg);

struct TimeSeparatedSweep {
    std::vector<TimeSeparatedReport> rows;
    DecayFit fit;      // (d/lambda, log ratio)
    DecayFit div_fit;
};

// Lambda sweep at fixed sets; empty cfg.lambda_list defaults to a geometric
// ladder with d/lambda spanning 0.6 .. 2.4 (exactly the factor-4 spread the
// fit needs, and the deepest point stays above the lattice resolvent's
// spectral-edge floor).
TimeSeparatedSweep time_separated_sweep(const ParabolicOperator& op, const SeparatedSets& sets,
                                        const Field& f, const OffDiagConfig& cfg);

// flat row of the decay artifact tables
struct DecayCsvRow {
    std::string family;   // coefficient family label, caller-chosen
    std::string variant;
    double lambda = 0.0;
    double k_or_d = 0.0;  // annulus index k, or the time gap d
    double norm_ratio = 0.0;
    double fitted_c = 0.0;
};

std::vector<DecayCsvRow> csv_rows(const std::string& family, const AnnuliFitResult& r);
std::vector<DecayCsvRow> csv_rows(const std::string& family, const TimeSeparatedSweep& s);

// header plus one line per row, fixed scientific formatting, deterministic
std::string decay_csv(const std::vector<DecayCsvRow>& rows);

} // namespace katolab

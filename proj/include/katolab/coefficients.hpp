#pragma once

#include <map>
#include <optional>
#include <string>

#include "katolab/grid.hpp"

namespace katolab {

// Coefficient tensor A = S + D sampled at lattice points. S is complex and
// carries the ellipticity; D is real with D^T = -D and is only assumed
// bounded in BMO, uniformly in time. Storage order matches Field order, with
// the (i, j) entry of the matrix at point p held at (p*n + i)*n + j.
struct CoefficientField {
    GridSpec grid;
    std::vector<cplx> S;
    std::vector<double> D;

    CoefficientField() = default;
    explicit CoefficientField(const GridSpec& g)
        : grid(g),
          S(g.points() * g.n * g.n, cplx{0.0, 0.0}),
          D(g.points() * g.n * g.n, 0.0) {}

    cplx& S_at(std::size_t p, int i, int j) { return S[(p * grid.n + i) * grid.n + j]; }
    cplx S_at(std::size_t p, int i, int j) const { return S[(p * grid.n + i) * grid.n + j]; }
    double& D_at(std::size_t p, int i, int j) { return D[(p * grid.n + i) * grid.n + j]; }
    double D_at(std::size_t p, int i, int j) const { return D[(p * grid.n + i) * grid.n + j]; }

    cplx A_at(std::size_t p, int i, int j) const { return S_at(p, i, j) + D_at(p, i, j); }
};

struct EllipticityParams {
    double c1 = 1.0;  // coercivity of Re(S xi . conj(xi))
    double c2 = 1.0;  // pointwise bound on |S xi . conj(zeta)|
    double c3 = 0.0;  // BMO bound on D, uniform in time
};

struct EllipticityReport {
    double c1_observed = 0.0;
    double c2_observed = 0.0;
    double antisym_defect = 0.0;
    bool pass = false;
};

// failure is reported, not thrown; generators use this to certify output
EllipticityReport validate(const CoefficientField& c);

// Axis-aligned spatial cube on the lattice, toroidal. corner is in cells,
// side_cells is the edge length in cells.
struct SpatialCube {
    std::array<int, 3> corner{0, 0, 0};
    int side_cells = 0;
};

enum class BmoMode { per_time_sup, parabolic };

// per_time_sup: sup over time slices and over spatial dyadic cubes (all
// grid-representable scales, aligned plus the half-shifted grids per axis) of
// the L1 mean oscillation, maximized over matrix entries.
// parabolic: L2 mean oscillation over parabolic dyadic cubes Q x I with
// |I| = ell(Q)^2 in normalized units, oscillation taken about the per-time
// spatial average, square root returned so the result is 1-homogeneous.
double bmo_norm(const CoefficientField& c, BmoMode mode);

// subtract the per-time spatial average of D over Q0 (default: full torus);
// idempotent, and weakly invisible to the form since the subtracted part is
// constant in space at each time
CoefficientField normalize_D(const CoefficientField& c,
                             std::optional<SpatialCube> Q0 = std::nullopt);

struct JnRow {
    int k = 0;
    double lp_average = 0.0;
    double ratio_to_k = 0.0;
};

// John-Nirenberg style growth table: L^p averages of |D - avg_{Q0} D| over
// the dilates 2^k Q0 (times the full time circle). Throws std::domain_error
// once 2^k Q0 no longer fits in the torus.
std::vector<JnRow> john_nirenberg_growth(const CoefficientField& c, const SpatialCube& Q0,
                                         double p, int kmax);

struct GeneratorSpec {
    std::string family = "identity";
    double magnitude = 1.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> extra;
};

struct GeneratedCoefficients {
    CoefficientField coeffs;
    EllipticityParams params;  // observed, not nominal
};

// Families: identity, constant_antisym, checkerboard, log_singular,
// time_modulated, random_smooth. Emitted coefficients pass validate() and
// params carries the measured (c1, c2, c3).
GeneratedCoefficients generate(const GridSpec& grid, const GeneratorSpec& spec);

} // namespace katolab

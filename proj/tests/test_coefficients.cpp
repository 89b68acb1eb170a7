#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "katolab/coefficients.hpp"
#include "katolab/operator.hpp"
#include "katolab/sampler.hpp"

using namespace katolab;

namespace {

GridSpec grid(int nx, int nt) {
    GridSpec g;
    g.n = 2;
    g.Nx = nx;
    g.Nt = nt;
    return g;
}

GeneratedCoefficients gen(const GridSpec& g, const std::string& family, double mag,
                          std::uint64_t seed = 1) {
    GeneratorSpec spec;
    spec.family = family;
    spec.magnitude = mag;
    spec.seed = seed;
    return generate(g, spec);
}

} // namespace

TEST_CASE("checkerboard BMO equals its amplitude") {
    // +-kappa blocks: every straddling cube has mean 0 and L1 oscillation kappa,
    // interior cubes oscillate by 0, so the sup is exactly kappa
    const auto gc = gen(grid(16, 16), "checkerboard", 0.75);
    CHECK(rel_gap(bmo_norm(gc.coeffs, BmoMode::per_time_sup), 0.75) < 1e-12);
    CHECK(gc.params.c3 == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("time modulation does not change the per-time sup") {
    // the t = 0 slice carries the unmodulated pattern, later slices shrink it
    const auto gc = gen(grid(16, 16), "time_modulated", 0.6);
    CHECK(rel_gap(bmo_norm(gc.coeffs, BmoMode::per_time_sup), 0.6) < 1e-12);
}

TEST_CASE("constant antisymmetric part has zero BMO and normalizes to zero") {
    const auto gc = gen(grid(16, 16), "constant_antisym", 0.9);
    CHECK(bmo_norm(gc.coeffs, BmoMode::per_time_sup) < 1e-14);
    CHECK(bmo_norm(gc.coeffs, BmoMode::parabolic) < 1e-14);

    const CoefficientField nz = normalize_D(gc.coeffs);
    double dmax = 0.0;
    for (double v : nz.D) dmax = std::max(dmax, std::abs(v));
    CHECK(dmax < 1e-14);
}

TEST_CASE("normalization is idempotent and invisible to the form") {
    const GridSpec g = grid(16, 16);
    const auto gc = gen(g, "log_singular", 0.5);
    const CoefficientField once = normalize_D(gc.coeffs);
    const CoefficientField twice = normalize_D(once);
    double drift = 0.0;
    for (std::size_t i = 0; i < once.D.size(); ++i)
        drift = std::max(drift, std::abs(once.D[i] - twice.D[i]));
    CHECK(drift < 1e-13);

    // the subtracted part is constant in x at each t, so both the strong and
    // weak actions are unchanged
    const ParabolicOperator op0 = make_operator(g, gc.coeffs, gc.params);
    const ParabolicOperator op1 = make_operator(g, once, gc.params);
    const Field u = sample_smooth(g, 10, 0);
    const Field v = sample_smooth(g, 10, 1);
    const cplx f0 = form_value(op0, u, v);
    const cplx f1 = form_value(op1, u, v);
    CHECK(std::abs(f0 - f1) < 1e-10 * std::max(1.0, std::abs(f0)));
}

TEST_CASE("log singular BMO is stable under grid refinement") {
    const double b16 = bmo_norm(gen(grid(16, 16), "log_singular", 0.5).coeffs,
                                BmoMode::per_time_sup);
    const double b32 = bmo_norm(gen(grid(32, 32), "log_singular", 0.5).coeffs,
                                BmoMode::per_time_sup);
    const double b64 = bmo_norm(gen(grid(64, 64), "log_singular", 0.5).coeffs,
                                BmoMode::per_time_sup);
    CHECK(b16 > 0.0);
    CHECK(rel_gap(b16, b32) < 0.10);
    CHECK(rel_gap(b32, b64) < 0.10);
}

TEST_CASE("parabolic BMO is 1-homogeneous") {
    const auto gc = gen(grid(16, 32), "log_singular", 0.5);
    CoefficientField scaled = gc.coeffs;
    for (double& v : scaled.D) v *= 3.0;
    const double b1 = bmo_norm(gc.coeffs, BmoMode::parabolic);
    const double b3 = bmo_norm(scaled, BmoMode::parabolic);
    CHECK(b1 > 0.0);
    CHECK(rel_gap(b3, 3.0 * b1) < 1e-12);
}

TEST_CASE("John-Nirenberg growth of the log singularity is at most linear") {
    const GridSpec g = grid(64, 4);
    const auto gc = gen(g, "log_singular", 0.5);
    SpatialCube q0;
    q0.corner = {0, 0, 0};
    q0.side_cells = 4;
    const auto rows = john_nirenberg_growth(gc.coeffs, q0, 2.0, 4);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.lp_average));
        CHECK(r.ratio_to_k < 5.0);  // log profile grows like k, ratio stays O(1)
    }
    // growth is monotone once the dilates engage the singularity
    CHECK(rows.back().lp_average >= rows.front().lp_average - 1e-12);
    CHECK_THROWS_AS(john_nirenberg_growth(gc.coeffs, q0, 2.0, 6), std::domain_error);
}

TEST_CASE("random smooth family honors its nominal ellipticity") {
    const auto gc = gen(grid(16, 16), "random_smooth", 0.4, 17);
    const EllipticityReport rep = validate(gc.coeffs);
    CHECK(rep.pass);
    CHECK(rep.c1_observed >= 0.6 - 1e-9);  // S = I + m M with sup |M| = 1
    CHECK(rep.c2_observed <= 1.4 + 1e-9);
    CHECK(rep.antisym_defect < 1e-14);
    CHECK(gc.params.c1 == doctest::Approx(rep.c1_observed));
}

TEST_CASE("generator rejects unknown families and out-of-range magnitudes") {
    GeneratorSpec spec;
    spec.family = "no_such_family";
    CHECK_THROWS_AS(generate(grid(16, 16), spec), std::invalid_argument);
    spec.family = "random_smooth";
    spec.magnitude = 1.5;
    CHECK_THROWS_AS(generate(grid(16, 16), spec), std::invalid_argument);
}

TEST_CASE("validate flags symmetry defects") {
    CoefficientField c(grid(8, 8));
    for (std::size_t p = 0; p < c.grid.points(); ++p) {
        c.S_at(p, 0, 0) = 1.0;
        c.S_at(p, 1, 1) = 1.0;
        c.D_at(p, 0, 1) = 0.3;
        c.D_at(p, 1, 0) = -0.2;  // not antisymmetric
    }
    const EllipticityReport rep = validate(c);
    CHECK(rep.antisym_defect == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(rep.pass);
}

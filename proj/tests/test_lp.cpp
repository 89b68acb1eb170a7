#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "katolab/fft.hpp"
#include "katolab/lp_toolkit.hpp"
#include "katolab/multipliers.hpp"
#include "katolab/sampler.hpp"

using namespace katolab;

namespace {

GridSpec grid16() {
    GridSpec g;
    g.n = 2;
    g.Nx = 16;
    g.Nt = 32;
    return g;
}

Field pointwise(const Field& a, const Field& b) {
    Field r = physical_of(a);
    const Field bp = physical_of(b);
    for (std::size_t i = 0; i < r.size(); ++i) r.data[i] *= bp.data[i];
    return r;
}

// centered product bump, supported well inside the torus
Field centered_bump(const GridSpec& g, double rx, double rt) {
    Field f(g);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        g.decode(i, ix, it);
        double r2 = 0.0;
        for (int a = 0; a < g.n; ++a) {
            const double d = ix[a] * g.hx() - 0.5 * g.Lx;
            r2 += d * d;
        }
        const double dt = it * g.ht() - 0.5 * g.Lt;
        f.data[i] = cplx{Mollifier::profile(std::sqrt(r2) / rx) *
                             Mollifier::profile(dt / rt),
                         0.0};
    }
    return f;
}

}  // namespace

TEST_CASE("mollifier symbols are normalized and contractive") {
    const GridSpec g = grid16();
    const Mollifier moll(g);
    CHECK(moll.symbol1(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(moll.symbol2(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double r = 0.25; r < 60.0; r *= 1.37) {
        CHECK(std::abs(moll.symbol1(r)) <= 1.0);
        CHECK(std::abs(moll.symbol2(r)) <= 1.0);
    }
    // profile vanishes outside the unit ball, smoothly
    CHECK(Mollifier::profile(1.0) == 0.0);
    CHECK(Mollifier::profile(1.5) == 0.0);
    CHECK(Mollifier::profile(0.999) < 1e-200);
}

TEST_CASE("convolution preserves mass and acts diagonally on modes") {
    const GridSpec g = grid16();
    const Mollifier moll(g);

    Field one(g);
    std::fill(one.data.begin(), one.data.end(), cplx{1.0, 0.0});
    Field gap = moll.conv_p(0.2, one) - one;
    CHECK(l2_norm(gap) < 1e-13);

    const Field mode = mode_field(g, {3, -5, 0}, 7);
    const double lam = 0.05;
    const double xi = 2.0 * M_PI * std::sqrt(34.0);
    const double tau = 2.0 * M_PI * 7.0;
    const double sym = moll.symbol1(lam * xi) * moll.symbol2(lam * lam * tau);
    Field viac = moll.conv_p(lam, mode) - cplx{sym, 0.0} * mode;
    CHECK(l2_norm(viac) < 1e-12);

    // factor maps agree with the product map
    Field split = moll.conv_p1(lam, moll.conv_p2(lam, mode)) - moll.conv_p(lam, mode);
    CHECK(l2_norm(split) < 1e-12);

    // lambda -> 0 recovers the identity on band-limited data
    Field near = moll.conv_p(1e-2, mode) - mode;
    CHECK(l2_norm(near) < 0.05 * l2_norm(mode));
    CHECK(l2_norm(near) > 0.0);
}

TEST_CASE("first-moment cancellation shows as quadratic commutator decay") {
    GridSpec g;
    g.n = 2;
    g.Nx = 32;
    g.Nt = 16;
    const Mollifier moll(g);
    const Field f = centered_bump(g, 0.3, 0.35);

    Field coord(g);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t i = 0; i < coord.size(); ++i) {
        g.decode(i, ix, it);
        coord.data[i] = cplx{ix[0] * g.hx() - 0.5 * g.Lx, 0.0};
    }

    auto comm = [&](double lam) {
        Field lhs = moll.conv_p1(lam, pointwise(coord, f));
        Field rhs = pointwise(coord, moll.conv_p1(lam, f));
        return l2_norm(lhs - rhs);
    };
    // zero first moment upgrades the O(lambda) commutator to O(lambda^2)
    const double r1 = comm(0.04);
    const double r2 = comm(0.08);
    CHECK(r2 / r1 == doctest::Approx(4.0).epsilon(0.35));
    CHECK(r1 < 0.05 * l2_norm(f));
}

TEST_CASE("convolution is an L2 contraction and respects support limits") {
    const GridSpec g = grid16();
    const Mollifier moll(g);
    const Field f = sample_rough(g, 9, 1);
    const double fn = l2_norm(f);
    const double cn = l2_norm(moll.conv_p(0.2, f));
    CHECK(cn <= fn * (1.0 + 1e-10));
    CHECK(cn < fn);  // rough data really does lose high-frequency mass

    CHECK_THROWS_AS(moll.conv_p(0.6, f), SupportOverflow);
    CHECK_THROWS_AS(moll.conv_p1(0.6, f), SupportOverflow);
    CHECK_NOTHROW(moll.conv_p2(0.6, f));  // 0.36 of the time period still fits

    GridSpec gs = grid16();
    gs.Lt = 0.25;
    const Mollifier ms(gs);
    const Field fs = sample_rough(gs, 9, 2);
    CHECK_THROWS_AS(ms.conv_p2(0.4, fs), SupportOverflow);
    CHECK_NOTHROW(ms.conv_p1(0.4, fs));
}

TEST_CASE("maximal functions dominate the point and the convolution") {
    GridSpec g;
    g.n = 2;
    g.Nx = 32;
    g.Nt = 16;
    const Mollifier moll(g);
    const SamplerOptions opt;
    const Field f = sample_smooth(g, 23, 0, opt);

    const Field m2 = maximal_m2(f);
    const Field m1m2 = maximal_m1(m2);
    const Field fp = physical_of(f);
    double worst = 0.0;
    for (std::size_t i = 0; i < fp.size(); ++i) {
        CHECK(m2.data[i].real() + 1e-14 >= std::abs(fp.data[i]));
        CHECK(m1m2.data[i].real() + 1e-14 >= m2.data[i].real());
        worst = std::max(worst, std::abs(fp.data[i]) / m1m2.data[i].real());
    }
    CHECK(worst <= 1.0 + 1e-12);

    // |P_lambda f| <= (cube/ball volume ratio) M1(M2 f) pointwise; the 4/pi
    // is the n = 2 ratio, the 5% absorbs window quantization at lattice scale
    for (const double lam : {4.0 * g.hx(), 8.0 * g.hx()}) {
        const Field pf = moll.conv_p(lam, f);
        double ratio = 0.0;
        for (std::size_t i = 0; i < pf.size(); ++i)
            ratio = std::max(ratio, std::abs(pf.data[i]) / m1m2.data[i].real());
        CHECK(ratio <= (4.0 / M_PI) * 1.05);
    }

    Field c(g);
    std::fill(c.data.begin(), c.data.end(), cplx{0.7, 0.0});
    const Field mc = maximal_m1(c);
    for (std::size_t i = 0; i < mc.size(); ++i)
        CHECK(mc.data[i].real() == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("dyadic averaging is an idempotent self-adjoint contraction") {
    const GridSpec g = grid16();
    const DyadicDecomposition dec(g);
    const Field f = sample_rough(g, 31, 0);
    const Field g2 = sample_smooth(g, 31, 1);
    const double lam = 0.2;

    const Field af = dyadic_average(f, dec, lam);
    CHECK(l2_norm(dyadic_average(af, dec, lam) - af) < 1e-15);
    CHECK(l2_norm(af) <= l2_norm(f) * (1.0 + 1e-12));

    const cplx lhs = inner(af, g2);
    const cplx rhs = inner(f, dyadic_average(g2, dec, lam));
    CHECK(std::abs(lhs - rhs) < 1e-12 * l2_norm(f) * l2_norm(g2));

    // indicator of a dyadic cube is a fixed point at its own scale
    const int j = dec.scale_of_lambda(lam);
    const ParabolicCube cube = dec.cube_geometry(j, 0);
    const auto mask = cube.mask(g);
    Field ind(g);
    for (std::size_t i = 0; i < ind.size(); ++i)
        ind.data[i] = cplx{mask[i] ? 1.0 : 0.0, 0.0};
    CHECK(l2_norm(dyadic_average(ind, dec, lam) - ind) < 1e-15);
}

TEST_CASE("lambda ladders integrate exactly on their own span") {
    const LambdaGrid def;
    REQUIRE(def.values.size() >= 2);
    CHECK(std::log10(def.values.back() / def.values.front()) > 2.9);
    for (std::size_t j = 1; j < def.values.size(); ++j)
        CHECK(def.values[j] > def.values[j - 1]);
    CHECK(def.values.size() * def.weight == doctest::Approx(std::log(1e3)).epsilon(1e-12));

    const GridSpec g = grid16();
    const LambdaGrid lp = LambdaGrid::lp_window(g);
    CHECK(lp.values.front() > 2.0 * g.Lx / g.Nx);
    CHECK(lp.values.back() < g.Lx / 4.0);

    GridSpec coarse = grid16();
    coarse.Nx = 8;
    CHECK_THROWS_AS(LambdaGrid::lp_window(coarse), std::invalid_argument);

    const Field f = sample_smooth(g, 11, 0);
    const double fn = l2_norm(f);
    TripleNormDiag diag;
    const double tn = triple_norm([&](double) { return f; }, lp, &diag);
    const double span = (g.Lx / 4.0) / (2.0 * g.Lx / g.Nx);
    CHECK(tn == doctest::Approx(fn * std::sqrt(std::log(span))).epsilon(1e-12));
    CHECK(diag.first_frac == doctest::Approx(1.0 / lp.values.size()).epsilon(1e-10));
    CHECK(diag.last_frac == doctest::Approx(1.0 / lp.values.size()).epsilon(1e-10));
}

TEST_CASE("Littlewood-Paley constants are finite and refinement-stable") {
    const GridSpec g = grid16();
    std::vector<Field> samples{sample_smooth(g, 21, 0), sample_rough(g, 22, 0),
                               sample_rough(g, 22, 1, 0.3)};
    const LpSuiteReport rep = verify_lp_suite(samples, LambdaGrid::lp_window(g, 32));
    REQUIRE(rep.rows.size() == samples.size());
    for (const auto& row : rep.rows) {
        CHECK(row.c_regularity > 0.0);
        CHECK(std::isfinite(row.c_regularity));
        CHECK(std::isfinite(row.c_cancel));
        CHECK(std::isfinite(row.c_compare));
    }

    GridSpec fine;
    fine.n = 2;
    fine.Nx = 32;
    fine.Nt = 64;
    std::vector<Field> fsamples{sample_smooth(fine, 21, 0), sample_rough(fine, 22, 0),
                                sample_rough(fine, 22, 1, 0.3)};
    const LpSuiteReport frep = verify_lp_suite(fsamples, LambdaGrid::lp_window(fine, 32));

    // the suite's own unboundedness flag threshold: nothing may double
    CHECK(frep.max_regularity < 2.0 * rep.max_regularity);
    CHECK(frep.max_cancel < 2.0 * rep.max_cancel);
    CHECK(frep.max_compare < 2.0 * rep.max_compare);
    CHECK(rep.max_regularity < 2.0 * frep.max_regularity);
    CHECK(rep.max_cancel < 2.0 * frep.max_cancel);
    CHECK(rep.max_compare < 2.0 * frep.max_compare);
}

TEST_CASE("reduction estimate: closed form on a single mode when A = I") {
    const GridSpec g = grid16();
    GeneratorSpec spec;
    spec.family = "identity";
    spec.magnitude = 1.0;
    spec.seed = 2;
    const GeneratedCoefficients gc = generate(g, spec);
    const ParabolicOperator op = make_operator(g, gc.coeffs, gc.params);

    const Field mode = mode_field(g, {2, -1, 0}, 3);
    const LambdaGrid lp = LambdaGrid::lp_window(g, 32);
    const SolverConfig cfg;
    const KeeReport rep = verify_kee(op, {mode}, lp, cfg);
    REQUIRE(rep.rows.size() == 1);

    const double xi2 = std::pow(2.0 * M_PI, 2.0) * 5.0;
    const double tau = 2.0 * M_PI * 3.0;
    const cplx z{xi2, tau};
    double acc = 0.0;
    for (const double lam : lp.values) {
        const double amp = std::abs(lam * z / (1.0 + lam * lam * z));
        acc += lp.weight * amp * amp;
    }
    const double expected = std::sqrt(acc) / std::sqrt(xi2 + std::abs(tau));
    CHECK(rep.rows[0].ratio == doctest::Approx(expected).epsilon(1e-8));
    CHECK(rep.max_identity_rel < 10.0 * cfg.rel_tol);
}

TEST_CASE("reduction estimate holds across a rough coefficient family") {
    const GridSpec g = grid16();
    GeneratorSpec spec;
    spec.family = "checkerboard";
    spec.magnitude = 0.8;
    spec.seed = 4;
    const GeneratedCoefficients gc = generate(g, spec);
    const ParabolicOperator op = make_operator(g, gc.coeffs, gc.params);

    SamplerOptions opt;
    opt.zero_mean = true;
    std::vector<Field> samples{sample_smooth(g, 33, 0, opt), sample_smooth(g, 33, 1, opt)};
    const SolverConfig cfg;
    const KeeReport rep = verify_kee(op, samples, LambdaGrid::lp_window(g, 16), cfg);
    for (const auto& row : rep.rows) {
        CHECK(std::isfinite(row.ratio));
        CHECK(row.ratio > 0.0);
        CHECK(row.ratio < 3.0);  // measured headroom over the A = I value
    }
    CHECK(rep.max_identity_rel < 10.0 * cfg.rel_tol);

    Field flat(g);
    std::fill(flat.data.begin(), flat.data.end(), cplx{1.0, 0.0});
    CHECK_THROWS_AS(verify_kee(op, {flat}, LambdaGrid::lp_window(g, 16), cfg),
                    std::invalid_argument);
}

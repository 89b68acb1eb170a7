#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "katolab/operator.hpp"
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

ParabolicOperator family_op(const GridSpec& g, const std::string& family, double mag,
                            bool adjoint = false) {
    GeneratorSpec spec;
    spec.family = family;
    spec.magnitude = mag;
    spec.seed = 3;
    const GeneratedCoefficients gc = generate(g, spec);
    return make_operator(g, gc.coeffs, gc.params, adjoint);
}

} // namespace

TEST_CASE("strong application matches the symbol when A = I") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    const std::array<int, 3> k{2, -3, 0};
    const int m = 4;
    const Field u = mode_field(g, k, m);
    const Field hu = apply(op, u);
    const double xi2 = std::pow(2.0 * M_PI * k[0] / g.Lx, 2) + std::pow(2.0 * M_PI * k[1] / g.Lx, 2);
    const double tau = 2.0 * M_PI * m / g.Lt;
    const cplx sym{xi2, tau};
    for (std::size_t i = 0; i < u.size(); i += 53) CHECK(std::abs(hu[i] - sym * u[i]) < 1e-10);

    const Field hs = apply(adjoint_of(op), u);
    const cplx sym_adj{xi2, -tau};
    for (std::size_t i = 0; i < u.size(); i += 53) CHECK(std::abs(hs[i] - sym_adj * u[i]) < 1e-10);
}

TEST_CASE("weak and strong actions agree off the time Nyquist line") {
    const GridSpec g = grid16();
    for (const char* family : {"checkerboard", "log_singular", "random_smooth"}) {
        const ParabolicOperator op = family_op(g, family, 0.5);
        const Field u = sample_smooth(g, 21, 0);
        const Field v = sample_smooth(g, 21, 1);
        const cplx weak = form_value(op, u, v);
        const cplx strong = inner(apply(op, u), v);
        CHECK(std::abs(weak - strong) < 1e-11 * (1.0 + std::abs(weak)));
    }
}

TEST_CASE("adjoint duality for the form and the strong action") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "random_smooth", 0.4);
    const ParabolicOperator ops = adjoint_of(op);
    const Field u = sample_smooth(g, 22, 0);
    const Field v = sample_smooth(g, 22, 1);

    const cplx a = form_value(op, u, v);
    const cplx b = std::conj(form_value(ops, v, u));
    CHECK(std::abs(a - b) < 1e-11 * (1.0 + std::abs(a)));

    const cplx c = inner(apply(op, u), v);
    const cplx d = inner(u, apply(ops, v));
    CHECK(std::abs(c - d) < 1e-11 * (1.0 + std::abs(c)));
}

TEST_CASE("D block: direct and antisymmetrized evaluations coincide") {
    const GridSpec g = grid16();
    for (const char* family : {"checkerboard", "log_singular"}) {
        const ParabolicOperator op = family_op(g, family, 0.7);
        const Field u = sample_smooth(g, 23, 0);
        const Field v = sample_smooth(g, 23, 1);
        const cplx direct = form_d_part(op, u, v);
        const cplx anti = form_d_part_antisym(op, u, v);
        CHECK(std::abs(direct - anti) < 1e-11 * (1.0 + std::abs(direct)));

        // on the diagonal the D pairing is purely imaginary
        const cplx diag = form_d_part(op, u, u);
        const double scale = grad_norm(u);
        CHECK(std::abs(diag.real()) < 1e-12 * scale * scale);
    }
}

TEST_CASE("accretivity survey") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.8);
    const AccretivityReport rep = accretivity_report(op, 6, 99);
    CHECK(rep.samples == 6);
    // S = I for this family, so Re<Hu,u> = |gradx u|^2 exactly
    CHECK(rep.min_re_ratio >= 1.0 - 1e-10);
    CHECK(rep.min_re_ratio <= 1.0 + 1e-10);
    CHECK(rep.max_d_pairing_rel < 1e-12);
    CHECK(rep.max_ht_re_rel < 1e-12);

    const ParabolicOperator rough = family_op(g, "log_singular", 0.9);
    const AccretivityReport rep2 = accretivity_report(rough, 6, 99);
    CHECK(rep2.min_re_ratio >= 1.0 - 1e-10);
}

TEST_CASE("modified form reduces to the plain form and expands term by term") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.5);
    const Field u = sample_smooth(g, 24, 0);
    const Field v = sample_smooth(g, 24, 1);

    const cplx plain = modified_form_value(op, u, v, {0.0, cplx{0.0, 0.0}});
    CHECK(std::abs(plain - form_value(op, u, v)) < 1e-12 * (1.0 + std::abs(plain)));

    const FormParams fp{0.3, cplx{2.0, 0.5}};
    Field w = hilbert_t(v);
    w *= cplx{fp.delta, 0.0};
    w += v;  // w = (1 + delta Ht) v
    const cplx manual = form_value(op, u, w) + fp.sigma * inner(u, w);
    const cplx packaged = modified_form_value(op, u, v, fp);
    CHECK(std::abs(packaged - manual) < 1e-12 * (1.0 + std::abs(manual)));
}

TEST_CASE("hidden coercivity of the modified form at delta_star") {
    const GridSpec g = grid16();
    const double kappa = 0.5;
    const ParabolicOperator op = family_op(g, "checkerboard", kappa);
    const cplx sigma{1.0, 0.0};
    const double delta = delta_star(op.params, sigma);
    CHECK(delta > 0.0);
    CHECK(delta <= 1.0);

    // per-sample guaranteed margin: Re B >= (c1 - delta (c2 + |D|)) |grad u|^2
    //                                      + (Re sigma - delta |Im sigma|) |u|^2
    // with c1 = c2 = 1 and |D| = kappa pointwise for this family
    const double grad_margin = 1.0 - delta * (1.0 + kappa);
    REQUIRE(grad_margin > 0.0);
    for (int s = 0; s < 5; ++s) {
        const Field u = sample_smooth(g, 25, static_cast<std::uint64_t>(s));
        const double re_b = modified_form_value(op, u, u, {delta, sigma}).real();
        const double gn = grad_norm(u);
        const double un = l2_norm(u);
        CHECK(re_b >= 0.999 * (grad_margin * gn * gn + sigma.real() * un * un) - 1e-10);
    }
}

TEST_CASE("delta_star formula") {
    EllipticityParams p;
    p.c1 = 0.5;
    p.c2 = 2.0;
    p.c3 = 1.5;
    CHECK(delta_star(p, cplx{1.0, 0.0}) == doctest::Approx(std::min(0.5 / 4.5, 1.0)));
    CHECK(delta_star(p, cplx{0.2, 3.0}) == doctest::Approx(std::min(0.5 / 4.5, 0.2 / 4.0)));
}

TEST_CASE("grid and coefficient shapes must match") {
    const GridSpec g = grid16();
    GridSpec other = g;
    other.Nx = 32;
    GeneratorSpec spec;
    const GeneratedCoefficients gc = generate(other, spec);
    CHECK_THROWS_AS(make_operator(g, gc.coeffs, gc.params), std::invalid_argument);
}

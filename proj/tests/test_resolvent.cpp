#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "katolab/detail/modes.hpp"
#include "katolab/resolvent.hpp"
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

ParabolicOperator family_op(const GridSpec& g, const std::string& family, double mag) {
    GeneratorSpec spec;
    spec.family = family;
    spec.magnitude = mag;
    spec.seed = 11;
    const GeneratedCoefficients gc = generate(g, spec);
    return make_operator(g, gc.coeffs, gc.params);
}

const SolverConfig kCfg{1e-11, 400, 60, true};

} // namespace

TEST_CASE("A = I solves in one iteration and matches the symbol") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    const Field f = sample_smooth(g, 31, 0);
    const double lambda = 0.37;
    const ResolventResult r = resolvent(op, lambda, f, kCfg);
    CHECK(r.stats.converged);
    CHECK(r.stats.iterations == 1);

    Field expect = spectrum_of(f);
    const double fact = 2.0 * M_PI / g.Lt;
    detail::for_each_mode(g, [&](std::size_t idx, const std::array<int, 3>& k, int mt) {
        double xi2 = 0.0;
        for (int a = 0; a < g.n; ++a) xi2 += std::pow(2.0 * M_PI * k[a] / g.Lx, 2);
        expect.data[idx] /= cplx{1.0 + lambda * lambda * xi2, lambda * lambda * fact * mt};
    });
    to_physical(expect);
    expect -= r.u;
    CHECK(l2_norm(expect) < 1e-10 * l2_norm(f));
}

TEST_CASE("shifted solves contract with constant 1 / Re sigma") {
    const GridSpec g = grid16();
    for (const char* family : {"checkerboard", "log_singular"}) {
        const ParabolicOperator op = family_op(g, family, 0.8);
        const Field f = sample_smooth(g, 32, 0);
        for (const cplx sigma : {cplx{1.0, 0.0}, cplx{0.25, 2.0}, cplx{4.0, -1.0}}) {
            const ResolventResult r = solve_shifted(op, sigma, f, kCfg);
            CHECK(l2_norm(r.u) <= (1.0 + 1e-8) * l2_norm(f) / sigma.real());
        }
    }
    CHECK_THROWS_AS(solve_shifted(family_op(g, "identity", 1.0), cplx{-1.0, 0.0},
                                  sample_smooth(g, 32, 1), kCfg),
                    std::invalid_argument);
}

TEST_CASE("resolvents contract and preserve the mean") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.8);

    Field one(g);
    for (auto& v : one.data) v = cplx{1.0, 0.0};
    const ResolventResult rid = resolvent(op, 2.0, one, kCfg);
    Field gap = rid.u;
    gap -= one;
    CHECK(l2_norm(gap) < 1e-10);

    const Field f = sample_smooth(g, 33, 0);
    const ResolventResult r = resolvent(op, 0.5, f, kCfg);
    CHECK(l2_norm(r.u) <= (1.0 + 1e-8) * l2_norm(f));
    CHECK(std::abs(inner(r.u, one) - inner(f, one)) < 1e-9 * l2_norm(f));
}

TEST_CASE("resolvent identity E_lambda - E_mu = (mu^2 - lambda^2) E_lambda H E_mu") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "log_singular", 0.6);
    const Field f = sample_smooth(g, 34, 0);
    const double lambda = 0.3, mu = 1.1;

    const Field elf = resolvent(op, lambda, f, kCfg).u;
    const Field emf = resolvent(op, mu, f, kCfg).u;
    Field lhs = elf;
    lhs -= emf;

    const Field h_emf = apply(op, emf);
    Field rhs = resolvent(op, lambda, h_emf, kCfg).u;
    rhs *= cplx{mu * mu - lambda * lambda, 0.0};

    lhs -= rhs;
    CHECK(l2_norm(lhs) < 1e-7 * l2_norm(f));
}

TEST_CASE("resolvent duality <E f, g> = <f, E* g>") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "random_smooth", 0.4);
    const ParabolicOperator ops = adjoint_of(op);
    const Field f = sample_smooth(g, 35, 0);
    const Field h = sample_smooth(g, 35, 1);
    const double lambda = 0.8;
    const cplx a = inner(resolvent(op, lambda, f, kCfg).u, h);
    const cplx b = inner(f, resolvent(ops, lambda, h, kCfg).u);
    CHECK(std::abs(a - b) < 1e-8 * (1.0 + std::abs(a)));
}

TEST_CASE("small lambda limit is governed by lambda^2 H f") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.5);
    const Field f = sample_smooth(g, 36, 0);
    const double lambda = 1e-3;
    Field gap = resolvent(op, lambda, f, kCfg).u;
    gap -= f;
    const double bound = lambda * lambda * l2_norm(apply(op, f));
    CHECK(l2_norm(gap) <= bound * (1.0 + 1e-6) + 1e-12);
    CHECK(l2_norm(gap) < 1e-2 * l2_norm(f));
}

TEST_CASE("uniform lambda-weighted bounds for gradients and divergence data") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "log_singular", 0.7);
    const double c1 = op.params.c1;
    REQUIRE(c1 > 0.0);
    const Field f = sample_smooth(g, 37, 0);
    const VectorField F = sample_smooth_vector(g, 37, 1);
    for (const double lambda : {0.01, 0.1, 1.0, 10.0}) {
        const Field u = resolvent(op, lambda, f, kCfg).u;
        CHECK(lambda * grad_norm(u) <= (1.0 + 1e-7) * l2_norm(f) / std::sqrt(c1));

        const Field w = resolvent_div(op, lambda, F, kCfg).u;
        CHECK(l2_norm(w) <= (1.0 + 1e-7) * l2_norm(F) / std::sqrt(c1));
    }
}

TEST_CASE("half time derivative data stays bounded") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "random_smooth", 0.3);
    const Field f = sample_smooth(g, 38, 0);
    for (const double lambda : {0.05, 0.5, 5.0}) {
        const Field u = resolvent_halfdt(op, lambda, f, kCfg).u;
        CHECK(l2_norm(u) <= 10.0 * l2_norm(f));
    }
}

TEST_CASE("non-convergence raises instead of returning garbage") {
    const GridSpec g = grid16();
    const ParabolicOperator op = family_op(g, "log_singular", 0.9);
    SolverConfig tight;
    tight.rel_tol = 1e-13;
    tight.max_iter = 1;
    tight.restart = 1;
    CHECK_THROWS_AS(resolvent(op, 1.0, sample_smooth(g, 39, 0), tight), SolveError);
}

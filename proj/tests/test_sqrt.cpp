#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "katolab/sampler.hpp"
#include "katolab/sqrt_calculus.hpp"

using namespace katolab;

namespace {

GridSpec oracle_grid() {
    GridSpec g;
    g.n = 2;
    g.Nx = 8;
    g.Nt = 8;
    return g;
}

ParabolicOperator family_op(const GridSpec& g, const std::string& family, double mag) {
    GeneratorSpec spec;
    spec.family = family;
    spec.magnitude = mag;
    spec.seed = 5;
    const GeneratedCoefficients gc = generate(g, spec);
    return make_operator(g, gc.coeffs, gc.params);
}

// rel_tol 1e-8: the residual of (1 + lambda^2 H) u = b is evaluated through
// transforms whose rounding the symbol amplifies, so its achievable floor is
// near eps * (1 + lambda^2 z_max). The quadrature_for windows used below keep
// lambda^2 z_max under ~1e8, which puts the floor safely below this tolerance.
const SolverConfig kCfg{1e-8, 400, 60, true};

// the scalar identity behind the resolution constant, evaluated with the same
// midpoint-in-log rule the field version uses
double scalar_resolution(double z, const QuadratureSpec& q) {
    const double h = std::log(q.lambda_max / q.lambda_min) / q.nodes;
    double acc = 0.0;
    for (int j = 0; j < q.nodes; ++j) {
        const double l = q.lambda_min * std::exp((j + 0.5) * h);
        const double e = 1.0 / (1.0 + l * l * z);
        acc += h * l * l * l * z * z * e * e * e;
    }
    return acc * 16.0 / M_PI;
}

} // namespace

TEST_CASE("scalar resolution reproduces sqrt(z)") {
    // the midpoint rule in log lambda is spectrally accurate; what remains is
    // the window truncation, (16/3pi) (lambda^2 z)^(3/2) from the left cutoff
    // and (16/3pi) (lambda^2 z)^(-3/2) from the right one
    const QuadratureSpec q;
    const double c = 16.0 / (3.0 * M_PI);
    for (const double z : {0.5, 1.0, 7.3, 240.0}) {
        const double tail = c * (std::pow(q.lambda_min * q.lambda_min * z, 1.5) +
                                 std::pow(q.lambda_max * q.lambda_max * z, -1.5));
        CHECK(rel_gap(scalar_resolution(z, q), std::sqrt(z)) < 1e-10 + 1.2 * tail);
    }
}

TEST_CASE("quadrature_for brackets the lattice spectrum") {
    GridSpec g;
    g.n = 2;
    g.Nx = 16;
    g.Nt = 32;
    const double zmax = symbol_max(g);
    const double zmin = symbol_min_nonzero(g);
    CHECK(zmin == doctest::Approx(2.0 * M_PI));
    const double ximax2 = 2.0 * std::pow(2.0 * M_PI * 8.0, 2.0);
    CHECK(zmax == doctest::Approx(std::hypot(ximax2, 2.0 * M_PI * 16.0)));

    const QuadratureSpec q = quadrature_for(g);
    CHECK(q.lambda_min * std::sqrt(zmax) < 0.01);
    CHECK(q.lambda_max * std::sqrt(zmin) > 100.0);
    // about 24 nodes per decade keeps the midpoint rule's own error negligible
    CHECK(q.nodes >= 24 * std::log10(q.lambda_max / q.lambda_min) - 1);

    CHECK_THROWS_AS(quadrature_for(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_for(g, 1e-7, 2), std::invalid_argument);
}

TEST_CASE("sqrt via resolvents matches the heat symbol when A = I") {
    GridSpec g;
    g.n = 2;
    g.Nx = 16;
    g.Nt = 32;
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    const Field u = sample_smooth(g, 41, 0);

    SqrtDiagnostics diag;
    const QuadratureSpec q = quadrature_for(g);
    Field viaq = sqrt_apply(op, u, q, kCfg, &diag);
    const Field exact = sqrt_heat_symbol(u);
    Field gap = viaq;
    gap -= exact;
    CHECK(l2_norm(gap) < 1e-6 * l2_norm(exact));
    CHECK(diag.solves == 3 * q.nodes);
    CHECK(diag.first_node_rel < 1e-7);
    CHECK(diag.last_node_rel < 1e-7);

    // adjoint branch conjugates the time frequency
    const ParabolicOperator ops = adjoint_of(op);
    Field viaq_adj = sqrt_apply(ops, u, q, kCfg);
    viaq_adj -= sqrt_heat_symbol(u, true);
    CHECK(l2_norm(viaq_adj) < 1e-6 * l2_norm(exact));
}

TEST_CASE("dense oracle squares back to H and is accretive") {
    const GridSpec g = oracle_grid();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.5);
    const DenseOracle oracle = sqrt_dense_oracle(op);
    CHECK(oracle.selfcheck_rel < 1e-10);
    CHECK(oracle.min_re_eig > -1e-10);

    // quadrature and dense paths must agree on generic data
    const Field u = sample_smooth(g, 42, 0);
    const Field dense = oracle_apply(oracle, u);
    Field viaq = sqrt_apply(op, u, quadrature_for(g), kCfg);
    viaq -= dense;
    CHECK(l2_norm(viaq) < 1e-6 * l2_norm(dense));
}

TEST_CASE("dense oracle agrees with the closed form when A = I") {
    const GridSpec g = oracle_grid();
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    const DenseOracle oracle = sqrt_dense_oracle(op);
    const Field u = sample_smooth(g, 43, 0);
    const Field exact = sqrt_heat_symbol(u);
    Field gap = oracle_apply(oracle, u);
    gap -= exact;
    CHECK(l2_norm(gap) < 1e-8 * l2_norm(exact));
}

TEST_CASE("sqrt composed with itself recovers H") {
    const GridSpec g = oracle_grid();
    const ParabolicOperator op = family_op(g, "checkerboard", 0.5);
    const Field u = sample_smooth(g, 44, 0);
    const QuadratureSpec q = quadrature_for(g);
    const Field once = sqrt_apply(op, u, q, kCfg);
    Field twice = sqrt_apply(op, once, q, kCfg);
    const Field hu = apply(op, u);
    twice -= hu;
    CHECK(l2_norm(twice) < 1e-5 * l2_norm(hu));
}

TEST_CASE("symbol ratio enumeration stays inside the closed-form window") {
    GridSpec g;
    g.n = 2;
    g.Nx = 16;
    g.Nt = 32;
    const SymbolRatioRange r = enumerate_symbol_ratios(g);
    const double lo = std::pow(2.0, -1.5);
    CHECK(r.min_sq >= lo - 1e-12);
    CHECK(r.min_sq < 0.36);  // the lattice nearly attains |xi|^2 = |tau|
    CHECK(r.max_sq == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Kato ratios for A = I sit inside the symbol bounds") {
    GridSpec g;
    g.n = 2;
    g.Nx = 8;
    g.Nt = 16;
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    const QuadratureSpec q = quadrature_for(g, 1e-5, 16);
    const KatoReport rep = kato_ratio_sweep(op, 4, 7, q, kCfg);
    REQUIRE(rep.ratios.size() == 4);
    // |sqrt(H)u|^2 is pinched between 2^(-3/2) and 1 times (|grad u| + |Dt u|)^2 / 2
    CHECK(rep.min_ratio > std::pow(2.0, -1.25) - 0.01);
    CHECK(rep.max_ratio < 1.0 + 0.01);
}

TEST_CASE("oracle refuses grids that would not fit in memory") {
    GridSpec g;
    g.n = 2;
    g.Nx = 32;
    g.Nt = 32;
    const ParabolicOperator op = family_op(g, "identity", 1.0);
    CHECK_THROWS_AS(sqrt_dense_oracle(op), std::invalid_argument);
}

#include "katolab/operator.hpp"

#include "katolab/detail/modes.hpp"
#include "katolab/sampler.hpp"

namespace katolab {

ParabolicOperator make_operator(const GridSpec& grid, const CoefficientField& coeffs,
                                const EllipticityParams& params, bool adjoint) {
    grid.validate();
    if (!(coeffs.grid == grid))
        throw std::invalid_argument("make_operator: coefficient grid mismatch");
    ParabolicOperator op;
    op.grid = grid;
    op.A = coeffs;
    op.params = params;
    op.adjoint = adjoint;
    return op;
}

ParabolicOperator adjoint_of(const ParabolicOperator& op) {
    ParabolicOperator a = op;
    a.adjoint = !op.adjoint;
    return a;
}

VectorField coef_times(const ParabolicOperator& op, const VectorField& grad_u) {
    const GridSpec& g = op.grid;
    VectorField G(g);
    const std::size_t pts = g.points();
    for (std::size_t p = 0; p < pts; ++p) {
        for (int i = 0; i < g.n; ++i) {
            cplx acc{0.0, 0.0};
            for (int j = 0; j < g.n; ++j) acc += op.coef(p, i, j) * grad_u[j].data[p];
            G[i].data[p] = acc;
        }
    }
    if (op.dealias)
        for (int i = 0; i < g.n; ++i) dealias_truncate(G[i]);
    return G;
}

Field apply(const ParabolicOperator& op, const Field& u) {
    const GridSpec& g = op.grid;
    Field s = spectrum_of(u);
    if (op.dealias) dealias_truncate(s);

    // time derivative and gradient from the same spectrum
    Field dtu(g, true);
    VectorField grad(g, true);
    const double facx = 2.0 * M_PI / g.Lx;
    const double fact = 2.0 * M_PI / g.Lt;
    detail::for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& kx, int mt) {
        const cplx v = s.data[i];
        dtu.data[i] = cplx{0.0, fact * mt} * v;
        for (int a = 0; a < g.n; ++a) grad[a].data[i] = cplx{0.0, facx * kx[a]} * v;
    });
    to_physical(dtu);
    for (int a = 0; a < g.n; ++a) to_physical(grad[a]);

    VectorField G = coef_times(op, grad);
    Field div = divx(G);

    Field out(g);
    const double sgn = op.adjoint ? -1.0 : 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = sgn * dtu.data[i] - div.data[i];
    return out;
}

namespace {

cplx elliptic_block(const ParabolicOperator& op, const Field& u, const Field& v) {
    VectorField gu = gradx(physical_of(u));
    VectorField gv = gradx(physical_of(v));
    if (op.dealias)
        for (int a = 0; a < op.grid.n; ++a) {
            dealias_truncate(gu[a]);
            dealias_truncate(gv[a]);
        }
    const std::size_t pts = op.grid.points();
    std::vector<cplx> terms(pts);
    for (std::size_t p = 0; p < pts; ++p) {
        cplx acc{0.0, 0.0};
        for (int i = 0; i < op.grid.n; ++i) {
            cplx row{0.0, 0.0};
            for (int j = 0; j < op.grid.n; ++j) row += op.coef(p, i, j) * gu[j].data[p];
            acc += row * std::conj(gv[i].data[p]);
        }
        terms[p] = acc;
    }
    return op.grid.cell_volume() * pairwise_sum(terms);
}

} // namespace

cplx form_value(const ParabolicOperator& op, const Field& u, const Field& v) {
    const Field hu = half_dt(u);
    const Field hv = half_dt(v);
    const double sgn = op.adjoint ? -1.0 : 1.0;
    return elliptic_block(op, u, v) + sgn * inner(hilbert_t(hu), hv);
}

cplx form_d_part(const ParabolicOperator& op, const Field& u, const Field& v) {
    const GridSpec& g = op.grid;
    VectorField gu = gradx(physical_of(u));
    VectorField gv = gradx(physical_of(v));
    const double sgn = op.adjoint ? -1.0 : 1.0;
    const std::size_t pts = g.points();
    std::vector<cplx> terms(pts);
    for (std::size_t p = 0; p < pts; ++p) {
        cplx acc{0.0, 0.0};
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                acc += sgn * op.A.D_at(p, i, j) * gu[j].data[p] * std::conj(gv[i].data[p]);
        terms[p] = acc;
    }
    return g.cell_volume() * pairwise_sum(terms);
}

cplx form_d_part_antisym(const ParabolicOperator& op, const Field& u, const Field& v) {
    const GridSpec& g = op.grid;
    VectorField gu = gradx(physical_of(u));
    VectorField gv = gradx(physical_of(v));
    const double sgn = op.adjoint ? -1.0 : 1.0;
    const std::size_t pts = g.points();
    std::vector<cplx> terms(pts);
    for (std::size_t p = 0; p < pts; ++p) {
        cplx acc{0.0, 0.0};
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j)
                acc += sgn * op.A.D_at(p, i, j) *
                       (gu[j].data[p] * std::conj(gv[i].data[p]) -
                        gu[i].data[p] * std::conj(gv[j].data[p]));
        terms[p] = acc;
    }
    return g.cell_volume() * pairwise_sum(terms);
}

cplx modified_form_value(const ParabolicOperator& op, const Field& u, const Field& v,
                         const FormParams& fp) {
    Field w = physical_of(v);
    axpy(cplx{fp.delta, 0.0}, hilbert_t(w), w);
    return form_value(op, u, w) + fp.sigma * inner(physical_of(u), w);
}

double delta_star(const EllipticityParams& p, cplx sigma) {
    if (!(sigma.real() > 0.0))
        throw std::invalid_argument("delta_star: Re(sigma) must be positive");
    return std::min(p.c1 / (p.c2 + p.c3 + 1.0),
                    sigma.real() / (std::abs(sigma.imag()) + 1.0));
}

AccretivityReport accretivity_report(const ParabolicOperator& op, int samples,
                                     std::uint64_t seed) {
    AccretivityReport rep;
    rep.min_re_ratio = std::numeric_limits<double>::infinity();
    rep.samples = samples;
    for (int s = 0; s < samples; ++s) {
        const Field u = sample_smooth(op.grid, seed, 0xACC0 + s);
        const cplx q = form_value(op, u, u);
        const double gn = grad_norm(u);
        rep.min_re_ratio = std::min(rep.min_re_ratio, q.real() / (gn * gn));

        const cplx d = form_d_part(op, u, u);
        VectorField Dgrad(op.grid);
        {
            VectorField gu = gradx(u);
            const std::size_t pts = op.grid.points();
            for (std::size_t p = 0; p < pts; ++p)
                for (int i = 0; i < op.grid.n; ++i) {
                    cplx acc{0.0, 0.0};
                    for (int j = 0; j < op.grid.n; ++j)
                        acc += op.A.D_at(p, i, j) * gu[j].data[p];
                    Dgrad[i].data[p] = acc;
                }
        }
        const double dscale = l2_norm(Dgrad) * gn + 1e-300;
        rep.max_d_pairing_rel = std::max(rep.max_d_pairing_rel, std::abs(d.real()) / dscale);

        const Field hu = half_dt(u);
        const cplx ht = inner(hilbert_t(hu), hu);
        const double hscale = halfdt_norm(u) * halfdt_norm(u) + 1e-300;
        rep.max_ht_re_rel = std::max(rep.max_ht_re_rel, std::abs(ht.real()) / hscale);
    }
    return rep;
}

} // namespace katolab

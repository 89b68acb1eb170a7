#include "katolab/multipliers.hpp"

#include "katolab/detail/modes.hpp"

namespace katolab {
namespace {

using detail::for_each_mode;

template <class Symbol>
Field apply_symbol(const Field& f, Symbol&& symbol) {
    Field s = spectrum_of(f);
    for_each_mode(s.grid, [&](std::size_t i, const std::array<int, 3>& kx, int mt) {
        s.data[i] *= symbol(kx, mt);
    });
    if (!f.spectral) to_physical(s);
    return s;
}

} // namespace

Field gradx_component(const Field& f, int axis) {
    const double fac = 2.0 * M_PI / f.grid.Lx;
    return apply_symbol(f, [axis, fac](const std::array<int, 3>& kx, int) {
        return cplx{0.0, fac * kx[axis]};
    });
}

VectorField gradx(const Field& f) {
    const GridSpec& g = f.grid;
    Field s = spectrum_of(f);
    VectorField out(g, true);
    const double fac = 2.0 * M_PI / g.Lx;
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& kx, int) {
        const cplx v = s.data[i];
        for (int a = 0; a < g.n; ++a) out[a].data[i] = cplx{0.0, fac * kx[a]} * v;
    });
    if (!f.spectral)
        for (int a = 0; a < g.n; ++a) to_physical(out[a]);
    return out;
}

Field divx(const VectorField& F) {
    const GridSpec& g = F.grid;
    Field acc(g, true);
    const double fac = 2.0 * M_PI / g.Lx;
    const bool phys_in = !F.comp[0].spectral;
    for (int a = 0; a < g.n; ++a) {
        Field s = spectrum_of(F[a]);
        for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& kx, int) {
            acc.data[i] += cplx{0.0, fac * kx[a]} * s.data[i];
        });
    }
    if (phys_in) to_physical(acc);
    return acc;
}

Field half_dt(const Field& f) {
    const double fac = 2.0 * M_PI / f.grid.Lt;
    return apply_symbol(f, [fac](const std::array<int, 3>&, int mt) {
        return cplx{std::sqrt(fac * std::abs(mt)), 0.0};
    });
}

Field hilbert_t(const Field& f) {
    const int nyq = -f.grid.Nt / 2;
    return apply_symbol(f, [nyq](const std::array<int, 3>&, int mt) {
        if (mt == 0 || mt == nyq) return cplx{0.0, 0.0};
        return cplx{0.0, mt > 0 ? 1.0 : -1.0};
    });
}

Field dt(const Field& f) {
    const double fac = 2.0 * M_PI / f.grid.Lt;
    return apply_symbol(f, [fac](const std::array<int, 3>&, int mt) {
        return cplx{0.0, fac * mt};
    });
}

void dealias_truncate(Field& f) {
    const bool phys_in = !f.spectral;
    if (phys_in) to_spectrum(f);
    const int cutx = f.grid.Nx / 3;
    const int cutt = f.grid.Nt / 3;
    for_each_mode(f.grid, [&](std::size_t i, const std::array<int, 3>& kx, int mt) {
        bool keep = std::abs(mt) <= cutt;
        for (int a = 0; a < f.grid.n && keep; ++a) keep = std::abs(kx[a]) <= cutx;
        if (!keep) f.data[i] = cplx{0.0, 0.0};
    });
    if (phys_in) to_physical(f);
}

cplx inner(const Field& f, const Field& g) {
    const Field fp = physical_of(f);
    const Field gp = physical_of(g);
    std::vector<cplx> prod(fp.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = fp.data[i] * std::conj(gp.data[i]);
    return fp.grid.cell_volume() * pairwise_sum(prod);
}

double l2_norm(const Field& f) {
    const Field fp = physical_of(f);
    std::vector<double> sq(fp.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(fp.data[i]);
    return std::sqrt(fp.grid.cell_volume() * pairwise_sum(sq));
}

namespace {

double weighted_mode_norm(const Field& f, bool spatial) {
    Field s = spectrum_of(f);
    const GridSpec& g = s.grid;
    const double facx = 2.0 * M_PI / g.Lx;
    const double fact = 2.0 * M_PI / g.Lt;
    std::vector<double> terms(s.size());
    for_each_mode(g, [&](std::size_t i, const std::array<int, 3>& kx, int mt) {
        double w;
        if (spatial) {
            double xi2 = 0.0;
            for (int a = 0; a < g.n; ++a) xi2 += facx * kx[a] * facx * kx[a];
            w = xi2;
        } else {
            w = fact * std::abs(mt);
        }
        terms[i] = w * std::norm(s.data[i]);
    });
    return std::sqrt(g.volume() * pairwise_sum(terms));
}

} // namespace

double grad_norm(const Field& f) { return weighted_mode_norm(f, true); }
double halfdt_norm(const Field& f) { return weighted_mode_norm(f, false); }

double dd_norm(const Field& f) {
    const double gx = grad_norm(f);
    const double ht = halfdt_norm(f);
    return std::sqrt(gx * gx + ht * ht);
}

FieldNorms norms(const Field& f) {
    FieldNorms r;
    r.l2 = l2_norm(f);
    r.grad_l2 = grad_norm(f);
    r.halfdt_l2 = halfdt_norm(f);
    r.energy = std::sqrt(r.l2 * r.l2 + r.grad_l2 * r.grad_l2 + r.halfdt_l2 * r.halfdt_l2);
    return r;
}

double l2_norm(const VectorField& F) {
    double s = 0.0;
    for (const auto& c : F.comp) {
        const double v = l2_norm(c);
        s += v * v;
    }
    return std::sqrt(s);
}

cplx inner(const VectorField& F, const VectorField& G) {
    cplx s{0.0, 0.0};
    for (std::size_t a = 0; a < F.comp.size(); ++a) s += inner(F.comp[a], G.comp[a]);
    return s;
}

} // namespace katolab

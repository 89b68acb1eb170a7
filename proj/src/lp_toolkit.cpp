#include "katolab/lp_toolkit.hpp"

#include <algorithm>
#include <cmath>

#include "katolab/fft.hpp"
#include "katolab/multipliers.hpp"

namespace katolab {

namespace {

// Gauss-Legendre rule on [0,1]: Newton on the Legendre recurrence, the
// textbook construction. 192 points resolve the worst oscillation a lattice
// argument can request (about eight periods across the support) to machine
// precision.
void gauss_legendre_01(int m, std::vector<double>& x, std::vector<double>& w) {
    x.resize(static_cast<std::size_t>(m));
    w.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            const double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = 0.5 * (1.0 + t);
        w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    std::reverse(x.begin(), x.end());
    std::reverse(w.begin(), w.end());
}

double sinc(double a) {
    if (std::abs(a) < 1e-6) return 1.0 - a * a / 6.0;
    return std::sin(a) / a;
}

}  // namespace

double Mollifier::profile(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(-1.0 / q);
}

Mollifier::Mollifier(const GridSpec& g, int quad_points) : grid_(g) {
    g.validate();
    if (quad_points < 16) throw std::invalid_argument("Mollifier: quadrature order too low");
    gauss_legendre_01(quad_points, nodes_, weights_);

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double r = nodes_[i], b = profile(r) * weights_[i];
        norm1_ += b * std::pow(r, g.n - 1);
        norm2_ += b;
    }

    radius_.resize(g.spatial_points());
    for (std::size_t p = 0; p < radius_.size(); ++p) {
        std::size_t rem = p;
        double xi2 = 0.0;
        for (int a = g.n - 1; a >= 0; --a) {
            const int bin = static_cast<int>(rem % static_cast<std::size_t>(g.Nx));
            rem /= static_cast<std::size_t>(g.Nx);
            const double xi = 2.0 * M_PI * GridSpec::signed_freq(bin, g.Nx) / g.Lx;
            xi2 += xi * xi;
        }
        radius_[p] = std::sqrt(xi2);
    }
    tau_.resize(static_cast<std::size_t>(g.Nt));
    for (int m = 0; m < g.Nt; ++m)
        tau_[static_cast<std::size_t>(m)] =
            std::abs(2.0 * M_PI * GridSpec::signed_freq(m, g.Nt) / g.Lt);
}

double Mollifier::symbol1(double r) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double s = nodes_[i], b = profile(s) * weights_[i];
        double kernel;
        switch (grid_.n) {
            case 1: kernel = std::cos(r * s); break;
            case 2: kernel = std::cyl_bessel_j(0.0, r * s); break;
            default: kernel = sinc(r * s); break;
        }
        acc += b * std::pow(s, grid_.n - 1) * kernel;
    }
    return acc / norm1_;
}

double Mollifier::symbol2(double r) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        acc += profile(nodes_[i]) * weights_[i] * std::cos(r * nodes_[i]);
    return acc / norm2_;
}

double Mollifier::lambda_cap() const {
    return std::min(grid_.Lx / 2.0, std::sqrt(grid_.Lt / 2.0));
}

const Mollifier::Symbols& Mollifier::symbols_for(double lambda) const {
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
    Symbols s;
    s.sx.resize(radius_.size());
    for (std::size_t p = 0; p < radius_.size(); ++p) s.sx[p] = symbol1(lambda * radius_[p]);
    s.st.resize(tau_.size());
    for (std::size_t m = 0; m < tau_.size(); ++m)
        s.st[m] = symbol2(lambda * lambda * tau_[m]);
    return cache_.emplace(lambda, std::move(s)).first->second;
}

Field Mollifier::convolve(double lambda, const Field& f, bool spatial, bool temporal) const {
    if (!(f.grid == grid_)) throw std::invalid_argument("Mollifier: field grid mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("Mollifier: lambda must be positive");
    if (spatial && lambda > grid_.Lx / 2.0)
        throw SupportOverflow("Mollifier: spatial support 2*lambda exceeds the period");
    if (temporal && lambda * lambda > grid_.Lt / 2.0)
        throw SupportOverflow("Mollifier: time support 2*lambda^2 exceeds the period");

    const Symbols& sym = symbols_for(lambda);
    Field s = spectrum_of(f);
    const auto nt = static_cast<std::size_t>(grid_.Nt);
    for (std::size_t i = 0; i < s.size(); ++i) {
        double m = 1.0;
        if (spatial) m *= sym.sx[i / nt];
        if (temporal) m *= sym.st[i % nt];
        s.data[i] *= m;
    }
    if (!f.spectral) to_physical(s);
    return s;
}

Field Mollifier::conv_p(double lambda, const Field& f) const {
    return convolve(lambda, f, true, true);
}
Field Mollifier::conv_p1(double lambda, const Field& f) const {
    return convolve(lambda, f, true, false);
}
Field Mollifier::conv_p2(double lambda, const Field& f) const {
    return convolve(lambda, f, false, true);
}

Field maximal_m1(const Field& f) {
    const Field fp = physical_of(f);
    const GridSpec& g = fp.grid;
    Field out(g);
    const int half = g.Nx / 2;
    std::array<int, 3> ix{0, 0, 0}, jx{0, 0, 0};
    for (std::size_t i = 0; i < fp.size(); ++i) {
        int it = 0;
        g.decode(i, ix, it);
        double best = 0.0;
        for (int w = 0; w <= half; ++w) {
            double sum = 0.0;
            std::size_t count = 0;
            std::array<int, 3> off{0, 0, 0};
            // full (2w+1)^n window rescan; desk-scale checks only
            bool done = false;
            for (int a = 0; a < g.n; ++a) off[a] = -w;
            while (!done) {
                for (int a = 0; a < g.n; ++a)
                    jx[a] = ((ix[a] + off[a]) % g.Nx + g.Nx) % g.Nx;
                sum += std::abs(fp.data[g.index(jx, it)]);
                ++count;
                int a = g.n - 1;
                while (a >= 0 && ++off[a] > w) off[a--] = -w;
                done = a < 0;
            }
            best = std::max(best, sum / static_cast<double>(count));
        }
        out.data[i] = cplx{best, 0.0};
    }
    return out;
}

Field maximal_m2(const Field& f) {
    const Field fp = physical_of(f);
    const GridSpec& g = fp.grid;
    Field out(g);
    const std::size_t nt = static_cast<std::size_t>(g.Nt);
    std::vector<double> col(nt);
    for (std::size_t base = 0; base < fp.size(); base += nt) {
        for (std::size_t m = 0; m < nt; ++m) col[m] = std::abs(fp.data[base + m]);
        for (int it = 0; it < g.Nt; ++it) {
            double sum = col[static_cast<std::size_t>(it)];
            double best = sum;
            for (int w = 1; w <= g.Nt / 2; ++w) {
                sum += col[static_cast<std::size_t>(((it + w) % g.Nt + g.Nt) % g.Nt)];
                sum += col[static_cast<std::size_t>(((it - w) % g.Nt + g.Nt) % g.Nt)];
                best = std::max(best, sum / (2.0 * w + 1.0));
            }
            out.data[base + static_cast<std::size_t>(it)] = cplx{best, 0.0};
        }
    }
    return out;
}

LambdaGrid LambdaGrid::geometric(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1)
        throw std::invalid_argument("LambdaGrid: need 0 < lo < hi and per_decade >= 1");
    LambdaGrid g{raw_t{}};
    const int m = std::max(2, static_cast<int>(std::ceil(per_decade * std::log10(hi / lo))));
    g.weight = std::log(hi / lo) / m;
    g.values.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        g.values[static_cast<std::size_t>(j)] = lo * std::exp((j + 0.5) * g.weight);
    return g;
}

LambdaGrid LambdaGrid::lp_window(const GridSpec& g, int per_decade) {
    const double lo = 2.0 * g.Lx / g.Nx;
    const double hi = g.Lx / 4.0;
    if (!(lo < hi))
        throw std::invalid_argument("LambdaGrid: grid too coarse for the LP window");
    return geometric(lo, hi, per_decade);
}

double triple_norm(const std::function<Field(double)>& family, const LambdaGrid& grid,
                   TripleNormDiag* diag) {
    double acc = 0.0, first = 0.0, last = 0.0;
    for (std::size_t j = 0; j < grid.values.size(); ++j) {
        const double n = l2_norm(family(grid.values[j]));
        const double term = grid.weight * n * n;
        acc += term;
        if (j == 0) first = term;
        if (j + 1 == grid.values.size()) last = term;
    }
    if (diag) {
        diag->first_frac = acc > 0.0 ? first / acc : 0.0;
        diag->last_frac = acc > 0.0 ? last / acc : 0.0;
    }
    return std::sqrt(acc);
}

LpSuiteReport verify_lp_suite(const std::vector<Field>& samples, const LambdaGrid& grid) {
    if (samples.empty()) throw std::invalid_argument("verify_lp_suite: no samples");
    const GridSpec& g = samples.front().grid;
    const Mollifier moll(g);
    const DyadicDecomposition dec(g);

    LpSuiteReport rep;
    for (const Field& f : samples) {
        if (!(f.grid == g)) throw std::invalid_argument("verify_lp_suite: mixed grids");
        double t_grad = 0.0, t_dt = 0.0, t_half = 0.0, t_cancel = 0.0, t_cmp = 0.0;
        for (const double lam : grid.values) {
            const Field pf = moll.conv_p(lam, f);
            const double gn = grad_norm(pf);
            const double dn = l2_norm(dt(pf));
            const double hn = halfdt_norm(pf);
            t_grad += grid.weight * lam * lam * gn * gn;
            t_dt += grid.weight * std::pow(lam, 4.0) * dn * dn;
            t_half += grid.weight * lam * lam * hn * hn;
            const double cn = l2_norm(f - pf);
            t_cancel += grid.weight * cn * cn / (lam * lam);
            const double mn = l2_norm(dyadic_average(f, dec, lam) - pf);
            t_cmp += grid.weight * mn * mn;
        }
        LpSuiteRow row;
        const double fn = l2_norm(f);
        const double dd = dd_norm(f);
        row.c_regularity = (std::sqrt(t_grad) + std::sqrt(t_dt) + std::sqrt(t_half)) / fn;
        row.c_cancel = dd > 0.0 ? std::sqrt(t_cancel) / dd : 0.0;
        row.c_compare = std::sqrt(t_cmp) / fn;
        rep.rows.push_back(row);
        rep.max_regularity = std::max(rep.max_regularity, row.c_regularity);
        rep.max_cancel = std::max(rep.max_cancel, row.c_cancel);
        rep.max_compare = std::max(rep.max_compare, row.c_compare);
    }
    return rep;
}

KeeReport verify_kee(const ParabolicOperator& op, const std::vector<Field>& samples,
                     const LambdaGrid& grid, const SolverConfig& cfg) {
    KeeReport rep;
    for (const Field& f : samples) {
        const double dd = dd_norm(f);
        if (dd <= 0.0)
            throw std::invalid_argument("verify_kee: sample has no energy seminorm");
        const Field hf = apply(op, f);
        const double hn = l2_norm(hf);
        const double fn = l2_norm(f);

        KeeRow row;
        double acc = 0.0;
        for (const double lam : grid.values) {
            Field route1 = resolvent(op, lam, hf, cfg).u;
            route1 *= cplx{lam, 0.0};
            acc += grid.weight * l2_norm(route1) * l2_norm(route1);

            // lambda E H = (I - E)/lambda is an exact resolvent identity, so
            // two independent solves agree to solver tolerance on the
            // combined scale of their right-hand sides
            Field route2 = f - resolvent(op, lam, f, cfg).u;
            route2 *= cplx{1.0 / lam, 0.0};
            const double gap = l2_norm(route1 - route2);
            row.identity_rel = std::max(row.identity_rel, gap / (lam * hn + fn / lam));
        }
        row.ratio = std::sqrt(acc) / dd;
        rep.rows.push_back(row);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        rep.max_identity_rel = std::max(rep.max_identity_rel, row.identity_rel);
    }
    return rep;
}

}  // namespace katolab

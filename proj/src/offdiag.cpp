#include "katolab/offdiag.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "katolab/fft.hpp"
#include "katolab/lp_toolkit.hpp"
#include "katolab/multipliers.hpp"
#include "katolab/sampler.hpp"

namespace katolab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_half(double v, double L) {
    double d = std::fmod(v, L);
    if (d < -L / 2) d += L;
    if (d >= L / 2) d -= L;
    return d;
}

// slope +-1 triangle wave with period L; equals u on [-L/4, L/4)
double triangle(double u, double L) {
    const double w = wrap_half(u, L);
    if (std::abs(w) <= L / 4) return w;
    return w > 0 ? L / 2 - w : -L / 2 - w;
}

// lattice point lists per time slice, the working form for set distances
struct SliceIndex {
    std::vector<std::vector<std::array<int, 3>>> pts;
    std::size_t total = 0;
};

SliceIndex slice_index(const GridSpec& g, const std::vector<std::uint8_t>& mask) {
    SliceIndex s;
    s.pts.resize(static_cast<std::size_t>(g.Nt));
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t flat = 0; flat < mask.size(); ++flat) {
        if (mask[flat]) {
            g.decode(flat, ix, it);
            s.pts[static_cast<std::size_t>(it)].push_back(ix);
            ++s.total;
        }
    }
    return s;
}

double toroidal_cells(int a, int b, int N) {
    const int d = std::abs(a - b);
    return static_cast<double>(std::min(d, N - d));
}

// minimal Euclidean distance between the spatial point lists of two slices;
// membership probe first so overlapping sets short-circuit to zero, then a
// direct pair scan (the experiments use slabs and cubes, never huge scatter)
double slice_spatial_min(const GridSpec& g, const std::vector<std::array<int, 3>>& a,
                         const std::vector<std::array<int, 3>>& b,
                         const std::vector<std::uint8_t>& b_mask, int b_it) {
    for (const auto& p : a)
        if (b_mask[g.index(p, b_it)]) return 0.0;
    const double hx = g.hx();
    double best = kInf;
    for (const auto& p : a)
        for (const auto& q : b) {
            double s = 0.0;
            for (int ax = 0; ax < g.n; ++ax) {
                const double c = toroidal_cells(p[ax], q[ax], g.Nx) * hx;
                s += c * c;
            }
            best = std::min(best, std::sqrt(s));
        }
    return best;
}

double weighted_l2(const Field& w, const Field& f) {
    Field ph = physical_of(f);
    std::vector<double> sq(ph.size(), 0.0);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(w.data[i].real() * ph.data[i]);
    return std::sqrt(f.grid.cell_volume() * pairwise_sum(sq));
}

VectorField isotropic_copy(const Field& f) {
    VectorField F(f.grid);
    const cplx s{1.0 / std::sqrt(static_cast<double>(f.grid.n)), 0.0};
    for (int a = 0; a < f.grid.n; ++a) {
        F[a] = f;
        F[a] *= s;
    }
    return F;
}

void require_config(const OffDiagConfig& cfg) {
    if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
        throw std::invalid_argument("OffDiagConfig: theta must lie in (0,1)");
    if (cfg.k_max < 1) throw std::invalid_argument("OffDiagConfig: k_max must be >= 1");
}

} // namespace

SeparatedSets::SeparatedSets(const GridSpec& g, std::vector<std::uint8_t> e,
                             std::vector<std::uint8_t> f)
    : grid(g), E(std::move(e)), F(std::move(f)) {
    grid.validate();
    if (E.size() != grid.points() || F.size() != grid.points())
        throw std::invalid_argument("SeparatedSets: mask size does not match the grid");
    const SliceIndex se = slice_index(grid, E);
    const SliceIndex sf = slice_index(grid, F);
    if (se.total == 0 || sf.total == 0)
        throw std::invalid_argument("SeparatedSets: both sets must be nonempty");

    const double ht = grid.ht();
    time_gap = kInf;
    for (int it = 0; it < grid.Nt; ++it) {
        if (se.pts[static_cast<std::size_t>(it)].empty()) continue;
        for (int is = 0; is < grid.Nt; ++is) {
            if (sf.pts[static_cast<std::size_t>(is)].empty()) continue;
            time_gap = std::min(time_gap, std::sqrt(toroidal_cells(it, is, grid.Nt) * ht));
        }
    }

    d = kInf;
    for (int it = 0; it < grid.Nt; ++it) {
        const auto& a = se.pts[static_cast<std::size_t>(it)];
        if (a.empty()) continue;
        for (int is = 0; is < grid.Nt; ++is) {
            const auto& b = sf.pts[static_cast<std::size_t>(is)];
            if (b.empty()) continue;
            const double tpart = std::sqrt(toroidal_cells(it, is, grid.Nt) * ht);
            if (tpart >= d) continue;  // spatial part cannot make it smaller
            d = std::min(d, tpart + slice_spatial_min(grid, a, b, F, is));
        }
    }
}

std::vector<std::uint8_t> time_slab_mask(const GridSpec& g, int it0, int cells) {
    g.validate();
    if (cells < 1 || cells > g.Nt) throw std::invalid_argument("time_slab_mask: bad cell count");
    std::vector<std::uint8_t> m(g.points(), 0);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t flat = 0; flat < m.size(); ++flat) {
        g.decode(flat, ix, it);
        const int rel = ((it - it0) % g.Nt + g.Nt) % g.Nt;
        m[flat] = rel < cells ? 1 : 0;
    }
    return m;
}

double cube_gauge(const GridSpec& g, const ParabolicCube& delta, const std::array<int, 3>& ix,
                  int it) {
    double rho = 0.0;
    for (int a = 0; a < g.n; ++a)
        rho = std::max(rho, std::abs(wrap_half(ix[a] * g.hx() - delta.center[a], g.Lx)) /
                                (delta.ell / 2));
    const double th = delta.time_side(g) / 2;
    rho = std::max(rho, std::sqrt(std::abs(wrap_half(it * g.ht() - delta.tcenter, g.Lt)) / th));
    return rho;
}

namespace {

Field gauge_taper(const GridSpec& g, const ParabolicCube& delta,
                  const std::function<double(double)>& shape) {
    Field w(g, false);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
        g.decode(flat, ix, it);
        w.data[flat] = cplx{shape(cube_gauge(g, delta, ix, it)), 0.0};
    }
    return w;
}

} // namespace

Field cube_taper(const GridSpec& g, const ParabolicCube& delta) {
    g.validate();
    if (!delta.fits(g)) throw std::domain_error("cube_taper: cube exceeds the torus");
    return gauge_taper(g, delta, [](double rho) { return Mollifier::profile(rho); });
}

Field annulus_taper(const GridSpec& g, const ParabolicCube& delta, int k) {
    g.validate();
    if (k < 1) throw std::invalid_argument("annulus_taper: k starts at 1");
    if (!delta.dilate(std::pow(2.0, k + 1)).fits(g))
        throw std::domain_error("annulus_taper: annulus exceeds the torus");
    return gauge_taper(g, delta, [k](double rho) {
        if (!(rho > 0.0)) return 0.0;
        // map the dyadic shell (2^k, 2^(k+1)) onto (-1, 1) in log2 and bump it
        return Mollifier::profile(2.0 * (std::log2(rho) - k) - 1.0);
    });
}

Field slab_taper(const GridSpec& g, int it0, int cells) {
    g.validate();
    if (cells < 1 || cells > g.Nt) throw std::invalid_argument("slab_taper: bad cell count");
    Field w(g, false);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
        g.decode(flat, ix, it);
        const int rel = ((it - it0) % g.Nt + g.Nt) % g.Nt;
        const double v =
            rel < cells ? Mollifier::profile(2.0 * (rel + 0.5) / cells - 1.0) : 0.0;
        w.data[flat] = cplx{v, 0.0};
    }
    return w;
}

Field shaped_source(const Field& base, const Field& taper) {
    if (!(base.grid == taper.grid))
        throw std::invalid_argument("shaped_source: grid mismatch");
    const GridSpec& g = base.grid;
    const Field bp = physical_of(base);
    const std::size_t sp = g.spatial_points();
    const std::size_t nt = static_cast<std::size_t>(g.Nt);

    // per-slice weighted mean of the base over the taper
    std::vector<cplx> num(nt, cplx{0.0, 0.0});
    std::vector<double> den(nt, 0.0);
    std::vector<int> cells(nt, 0);
    for (std::size_t p = 0; p < sp; ++p)
        for (std::size_t it = 0; it < nt; ++it) {
            const std::size_t i = p * nt + it;
            const double w = taper.data[i].real();
            if (w == 0.0) continue;
            num[it] += w * bp.data[i];
            den[it] += w;
            ++cells[it];
        }

    Field out(g, false);
    double mass = 0.0;
    for (std::size_t p = 0; p < sp; ++p)
        for (std::size_t it = 0; it < nt; ++it) {
            const std::size_t i = p * nt + it;
            const double w = taper.data[i].real();
            if (w == 0.0) continue;
            // a slice whose taper support is a single cell cannot be made
            // mean-free: subtracting its own mean would leave pure roundoff,
            // so keep the bare tapered atom there
            out.data[i] = cells[it] > 1 ? w * (bp.data[i] - num[it] / den[it]) : w * bp.data[i];
            mass += std::norm(out.data[i]);
        }
    if (!(mass > 0.0))
        throw std::invalid_argument("shaped_source: source support is empty on this lattice");
    return out;
}

double DecayFit::c_hat() const { return slope < 0.0 ? -1.0 / slope : kInf; }

DecayFit fit_decay(const std::vector<std::array<double, 2>>& points) {
    if (points.size() < 4)
        throw std::invalid_argument("fit_decay: insufficient spread (need at least 4 points)");
    double xmin = kInf, xmax = -kInf, yamp = 0.0;
    for (const auto& p : points) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        yamp = std::max(yamp, std::abs(p[1]));
    }
    if (!(xmin > 0.0) || xmax < 4.0 * xmin)
        throw std::invalid_argument(
            "fit_decay: insufficient spread (separation/lambda must span a factor of 4)");

    const double m = static_cast<double>(points.size());
    double xbar = 0.0, ybar = 0.0;
    for (const auto& p : points) {
        xbar += p[0];
        ybar += p[1];
    }
    xbar /= m;
    ybar /= m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        sxx += (p[0] - xbar) * (p[0] - xbar);
        sxy += (p[0] - xbar) * (p[1] - ybar);
    }

    DecayFit fit;
    fit.points = points;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double sstot = 0.0, ssres = 0.0;
    for (const auto& p : points) {
        const double r = p[1] - (fit.intercept + fit.slope * p[0]);
        ssres += r * r;
        sstot += (p[1] - ybar) * (p[1] - ybar);
    }
    fit.r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 1.0;
    // constant data produces a roundoff-sized slope; compare the drop across
    // the fitted range against the data amplitude before calling it decay
    fit.decaying = fit.slope * (xmax - xmin) < -1e-12 * (1.0 + yamp);
    return fit;
}

Field tent_weight(const GridSpec& g, const std::array<double, 3>& chi, double lambda,
                  const std::array<double, 3>& anchor) {
    g.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("tent_weight: lambda must be positive");
    double emax = 0.0;
    for (int a = 0; a < g.n; ++a) emax += std::abs(chi[a]) * (g.Lx / 4.0);
    emax /= lambda;
    if (emax > 300.0)
        throw std::domain_error("tent_weight: weight dynamic range exceeds double precision");

    // per-axis profile is the same triangle wave, tabulated once per cell
    std::vector<std::array<double, 3>> tri(static_cast<std::size_t>(g.Nx));
    for (int i = 0; i < g.Nx; ++i)
        for (int a = 0; a < g.n; ++a)
            tri[static_cast<std::size_t>(i)][a] =
                chi[a] * triangle(i * g.hx() - anchor[a], g.Lx) / lambda;

    Field w(g, false);
    std::array<int, 3> ix{0, 0, 0};
    int it = 0;
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
        g.decode(flat, ix, it);
        double ex = 0.0;
        for (int a = 0; a < g.n; ++a) ex += tri[static_cast<std::size_t>(ix[a])][a];
        w.data[flat] = cplx{std::exp(ex), 0.0};
    }
    return w;
}

ExpWeightedReport exp_weighted_check(const ParabolicOperator& op, double lambda,
                                     const std::array<double, 3>& chi, const Field& f,
                                     const OffDiagConfig& cfg,
                                     const std::array<double, 3>& anchor) {
    require_config(cfg);
    if (!(op.grid == f.grid))
        throw std::invalid_argument("exp_weighted_check: field grid does not match the operator");
    if (!(lambda > 0.0)) throw std::invalid_argument("exp_weighted_check: lambda must be positive");
    const GridSpec& g = op.grid;

    ExpWeightedReport rep;
    rep.lambda = lambda;
    double m2 = 0.0;
    for (int a = 0; a < g.n; ++a) m2 += chi[a] * chi[a];
    rep.chi_mag = std::sqrt(m2);
    rep.within_theta = rep.chi_mag <= cfg.theta;

    const Field W = tent_weight(g, chi, lambda, anchor);
    rep.rhs = weighted_l2(W, f);
    if (!(rep.rhs > 0.0)) throw std::invalid_argument("exp_weighted_check: sample is zero");

    const Field u = resolvent(op, lambda, f, cfg.solver).u;
    rep.resolvent_ratio = weighted_l2(W, u) / rep.rhs;

    const VectorField gu = gradx(u);
    double acc = 0.0;
    for (int a = 0; a < g.n; ++a) {
        const double t = weighted_l2(W, gu[a]);
        acc += t * t;
    }
    rep.gradient_ratio = lambda * std::sqrt(acc) / rep.rhs;

    const Field v = resolvent_div(op, lambda, isotropic_copy(f), cfg.solver).u;
    rep.div_ratio = weighted_l2(W, v) / rep.rhs;
    return rep;
}

bool ExpWeightedFamilyMax::flag_and_update(const ExpWeightedReport& r) {
    const bool flagged = (resolvent > 0.0 && r.resolvent_ratio > 2.0 * resolvent) ||
                         (gradient > 0.0 && r.gradient_ratio > 2.0 * gradient) ||
                         (divergence > 0.0 && r.div_ratio > 2.0 * divergence);
    resolvent = std::max(resolvent, r.resolvent_ratio);
    gradient = std::max(gradient, r.gradient_ratio);
    divergence = std::max(divergence, r.div_ratio);
    return flagged;
}

const char* variant_name(OffDiagVariant v) {
    switch (v) {
        case OffDiagVariant::scalar: return "scalar";
        case OffDiagVariant::gradient_source: return "gradient_source";
        case OffDiagVariant::div_source: return "div_source";
    }
    return "unknown";
}

AnnuliTable annuli_decay(const ParabolicOperator& op, const ParabolicCube& delta, double lambda,
                         OffDiagVariant kind, const OffDiagConfig& cfg) {
    require_config(cfg);
    const GridSpec& g = op.grid;
    if (!(lambda > 0.0)) throw std::invalid_argument("annuli_decay: lambda must be positive");
    if (!delta.fits(g)) throw std::domain_error("annuli_decay: cube exceeds the torus");

    const auto cube = delta.mask(g);
    const Field cube_tap = cube_taper(g, delta);
    const Field base = physical_of(sample_smooth(g, cfg.seed, 21));
    VectorField vbase(g);
    {
        const VectorField raw = sample_smooth_vector(g, cfg.seed, 22);
        for (int a = 0; a < g.n; ++a) vbase[a] = physical_of(raw[a]);
    }

    // one solve per (direction, k): shape the fixed source into src, run the
    // requested variant, measure through the sharp tgt mask
    auto run = [&](const Field& src_taper,
                   const std::vector<std::uint8_t>& tgt) -> std::pair<double, double> {
        double sn = 0.0, tn = 0.0;
        if (kind == OffDiagVariant::div_source) {
            VectorField s(g);
            for (int a = 0; a < g.n; ++a) {
                s[a] = Field(g, false);
                for (std::size_t i = 0; i < s[a].size(); ++i)
                    s[a].data[i] = src_taper.data[i].real() * vbase[a].data[i];
                const double m = l2_norm(s[a]);
                sn += m * m;
            }
            sn = std::sqrt(sn);
            const Field v = resolvent_div(op, lambda, s, cfg.solver).u;
            tn = masked_l2(v, tgt);
        } else {
            const Field s = shaped_source(base, src_taper);
            sn = l2_norm(s);
            const Field u = resolvent(op, lambda, s, cfg.solver).u;
            if (kind == OffDiagVariant::scalar) {
                tn = masked_l2(u, tgt);
            } else {
                const VectorField gu = gradx(u);
                double acc = 0.0;
                for (int a = 0; a < g.n; ++a) {
                    const double m = masked_l2(gu[a], tgt);
                    acc += m * m;
                }
                tn = lambda * std::sqrt(acc);
            }
        }
        return {sn, sn > 0.0 ? tn / sn : 0.0};
    };

    AnnuliTable tab;
    tab.variant = kind;
    tab.lambda = lambda;
    tab.ell = delta.ell;
    for (int k = 1; k <= cfg.k_max; ++k) {
        const auto ann = annulus_mask(g, delta, k);
        const Field ann_tap = annulus_taper(g, delta, k);
        AnnulusRow row;
        row.k = k;
        row.separation = std::ldexp(delta.ell, k);
        const auto fwd = run(ann_tap, cube);
        row.source_norm = fwd.first;
        row.ratio = fwd.second;
        row.reversed_ratio = run(cube_tap, ann).second;
        tab.rows.push_back(row);
    }
    return tab;
}

AnnuliFitResult annuli_fit(const ParabolicOperator& op, const ParabolicCube& delta,
                           OffDiagVariant kind, const OffDiagConfig& cfg) {
    std::vector<double> lams = cfg.lambda_list;
    if (lams.empty()) lams = {delta.ell / 2, delta.ell / 4, delta.ell / 8};

    AnnuliFitResult res;
    std::vector<std::array<double, 2>> pts, rpts;
    for (const double lam : lams) {
        AnnuliTable tab = annuli_decay(op, delta, lam, kind, cfg);
        for (const AnnulusRow& row : tab.rows) {
            const double x = row.separation / lam;
            if (row.ratio > cfg.fit_floor)
                pts.push_back({x, std::log(row.ratio)});
            else
                ++res.excluded;
            if (row.reversed_ratio > cfg.fit_floor)
                rpts.push_back({x, std::log(row.reversed_ratio)});
            else
                ++res.excluded;
        }
        res.tables.push_back(std::move(tab));
    }
    res.fit = fit_decay(pts);
    res.reversed_fit = fit_decay(rpts);
    return res;
}

TimeSeparatedReport time_separated_check(const ParabolicOperator& op, const SeparatedSets& sets,
                                         double lambda, const Field& f, const OffDiagConfig& cfg) {
    require_config(cfg);
    if (!(op.grid == sets.grid) || !(f.grid == op.grid))
        throw std::invalid_argument("time_separated_check: grid mismatch");
    if (!(sets.time_gap > 0.0))
        throw std::invalid_argument("time_separated_check: sets are not time-separated (d = 0)");
    if (!(lambda > 0.0))
        throw std::invalid_argument("time_separated_check: lambda must be positive");

    const Field fp = physical_of(f);
    std::vector<std::uint8_t> not_e(sets.E.size());
    for (std::size_t i = 0; i < not_e.size(); ++i) not_e[i] = sets.E[i] ? 0 : 1;
    const double inside = masked_l2(fp, sets.E);
    const double outside = masked_l2(fp, not_e);
    if (!(inside > 0.0))
        throw std::invalid_argument("time_separated_check: f vanishes on E");
    if (outside > 1e-12 * inside)
        throw std::invalid_argument("time_separated_check: f must be supported in E");

    TimeSeparatedReport rep;
    rep.lambda = lambda;
    rep.d = sets.time_gap;

    const Field u = resolvent(op, lambda, fp, cfg.solver).u;
    const VectorField gu = gradx(u);
    double num = masked_l2(u, sets.F);
    num *= num;
    for (int a = 0; a < op.grid.n; ++a) {
        const double m = lambda * masked_l2(gu[a], sets.F);
        num += m * m;
    }
    rep.ratio = num / (inside * inside);

    const Field v = resolvent_div(op, lambda, isotropic_copy(fp), cfg.solver).u;
    const double dm = masked_l2(v, sets.F);
    rep.div_ratio = dm * dm / (inside * inside);
    return rep;
}

TimeSeparatedSweep time_separated_sweep(const ParabolicOperator& op, const SeparatedSets& sets,
                                        const Field& f, const OffDiagConfig& cfg) {
    std::vector<double> lams = cfg.lambda_list;
    if (lams.empty()) {
        // Geometric ladder with d/lambda spanning 0.6 .. 2.4, exactly the
        // factor-4 spread the fit needs.  Slab-to-slab transport decays like
        // exp(-2 gap / lambda^2), i.e. Gaussian in d/lambda, so pushing the
        // ladder much past d/lambda = 3 lands on the spectral-edge floor of
        // the lattice resolvent (the 1/(i lambda^2 tau) tail aliases at an
        // amplitude scaling like 1/lambda^2) and the deepest points stop
        // decaying.  Callers probing the floor can pass lambda_list directly.
        const double d = sets.time_gap;
        for (int j = 3; j >= 0; --j)
            lams.push_back(d / (0.6 * std::pow(4.0, j / 3.0)));
    }

    TimeSeparatedSweep sweep;
    std::vector<std::array<double, 2>> pts, dpts;
    for (const double lam : lams) {
        const TimeSeparatedReport row = time_separated_check(op, sets, lam, f, cfg);
        if (row.ratio > cfg.fit_floor) pts.push_back({row.d / lam, std::log(row.ratio)});
        if (row.div_ratio > cfg.fit_floor) dpts.push_back({row.d / lam, std::log(row.div_ratio)});
        sweep.rows.push_back(row);
    }
    sweep.fit = fit_decay(pts);
    sweep.div_fit = fit_decay(dpts);
    return sweep;
}

std::vector<DecayCsvRow> csv_rows(const std::string& family, const AnnuliFitResult& r) {
    std::vector<DecayCsvRow> rows;
    const double cf = r.fit.c_hat();
    const double cr = r.reversed_fit.c_hat();
    for (const AnnuliTable& tab : r.tables) {
        const std::string base = variant_name(tab.variant);
        for (const AnnulusRow& row : tab.rows) {
            rows.push_back({family, base, tab.lambda, static_cast<double>(row.k), row.ratio, cf});
            rows.push_back({family, base + "_reversed", tab.lambda, static_cast<double>(row.k),
                            row.reversed_ratio, cr});
        }
    }
    return rows;
}

std::vector<DecayCsvRow> csv_rows(const std::string& family, const TimeSeparatedSweep& s) {
    std::vector<DecayCsvRow> rows;
    for (const TimeSeparatedReport& r : s.rows) {
        rows.push_back({family, "time_scalar", r.lambda, r.d, r.ratio, s.fit.c_hat()});
        rows.push_back({family, "time_div", r.lambda, r.d, r.div_ratio, s.div_fit.c_hat()});
    }
    return rows;
}

std::string decay_csv(const std::vector<DecayCsvRow>& rows) {
    std::ostringstream os;
    os << "family,variant,lambda,k_or_d,norm_ratio,fitted_c\n";
    os << std::scientific << std::setprecision(16);
    for (const DecayCsvRow& r : rows)
        os << r.family << ',' << r.variant << ',' << r.lambda << ',' << r.k_or_d << ','
           << r.norm_ratio << ',' << r.fitted_c << '\n';
    return os.str();
}

} // namespace katolab

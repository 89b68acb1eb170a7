#include "katolab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "katolab/fft.hpp"
#include "katolab/multipliers.hpp"

namespace katolab {
namespace {

// wrapped offset of v from c on a circle of period L, reduced into [-L/2, L/2)
double wrap_offset(double v, double c, double L) {
    double d = std::fmod(v - c, L);
    if (d < -L / 2) d += L;
    if (d >= L / 2) d -= L;
    return d;
}

double sq(double v) { return v * v; }

// operator with the per-time spatial average of D removed over the full
// torus; idempotent, and the subtracted part is invisible to the action of
// the operator itself
ParabolicOperator normalized(const ParabolicOperator& op) {
    ParabolicOperator nop = op;
    nop.A = normalize_D(op.A);
    return nop;
}

// i-th column of the coefficient tensor the operator multiplies gradients
// with, honoring the adjoint flag
VectorField coefficient_column(const ParabolicOperator& op, int i) {
    VectorField F(op.grid);
    const std::size_t pts = op.grid.points();
    for (int k = 0; k < op.grid.n; ++k)
        for (std::size_t p = 0; p < pts; ++p) F[k].data[p] = op.coef(p, k, i);
    return F;
}

VectorField u_core(const ParabolicOperator& nop, double lambda, const SolverConfig& cfg) {
    VectorField out(nop.grid);
    for (int i = 0; i < nop.grid.n; ++i)
        out[i] = resolvent_div(nop, lambda, coefficient_column(nop, i), cfg).u;
    return out;
}

// pointwise squared magnitude over the components
std::vector<double> mag2(const VectorField& U) {
    std::vector<double> m(U.grid.points(), 0.0);
    for (const Field& c : U.comp) {
        const Field cp = physical_of(c);
        for (std::size_t p = 0; p < m.size(); ++p) m[p] += std::norm(cp.data[p]);
    }
    return m;
}

// per-cube sums of a pointwise nonnegative array at a dyadic scale
std::vector<double> cube_sums(const DyadicDecomposition& dec, int j,
                              const std::vector<double>& m) {
    const GridSpec& g = dec.grid;
    const auto s = dec.scale(j);
    std::vector<double> acc(s.cube_count, 0.0);
    std::array<int, 3> ix{0, 0, 0};
    std::size_t flat = 0;
    const std::size_t sp = g.spatial_points();
    for (std::size_t p = 0; p < sp; ++p) {
        for (int it = 0; it < g.Nt; ++it, ++flat) acc[dec.cube_of(j, ix, it)] += m[flat];
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
    return acc;
}

// continuum volume of one cube at scale j; cubes are grid aligned, so this
// equals the cell count times the cell volume exactly
double scale_volume(const DyadicDecomposition& dec, int j) {
    const auto s = dec.scale(j);
    return std::pow(s.ell, dec.grid.n) * (s.tcells * dec.grid.ht());
}

void check_unit(const GridSpec& g, const std::array<double, 3>& zeta, const char* who) {
    double nz = 0.0;
    for (int a = 0; a < g.n; ++a) nz += sq(zeta[a]);
    if (std::abs(std::sqrt(nz) - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(who) + ": zeta must be a unit vector");
}

// iterate the lattice points of one dyadic cube; cubes never wrap, so the
// flat index is rebuilt from corner plus offset directly
template <typename Fn>
void for_cube_points(const DyadicDecomposition& dec, int j, std::size_t id, Fn&& fn) {
    const GridSpec& g = dec.grid;
    const auto s = dec.scale(j);
    std::array<int, 3> corner{0, 0, 0};
    int tcorner = 0;
    dec.cube_corner(j, id, corner, tcorner);
    std::array<int, 3> off{0, 0, 0};
    std::array<int, 3> ix = corner;
    while (true) {
        for (int ot = 0; ot < s.tcells; ++ot)
            fn(g.index(ix, tcorner + ot), off, ot);
        int a = g.n - 1;
        for (; a >= 0; --a) {
            if (++off[a] < s.side_cells) {
                ix[a] = corner[a] + off[a];
                break;
            }
            off[a] = 0;
            ix[a] = corner[a];
        }
        if (a < 0) break;
    }
}

// sum over the cube's points of |sum_i U_i * (mean of G_i over the matched
// subcube)|^2; jl >= j because the matched scale of any lambda <= ell(j)
// is at least as deep as j, so subcubes tile the cube
double cube_dot_sq(const DyadicDecomposition& dec, int j, std::size_t id, int jl,
                   const VectorField& U, const VectorField& G) {
    const GridSpec& g = dec.grid;
    const auto sj = dec.scale(j);
    const auto sl = dec.scale(jl);
    const int r = sj.side_cells / sl.side_cells;
    const int rt = sj.tcells / sl.tcells;
    const int n = g.n;
    std::size_t subcount = static_cast<std::size_t>(rt);
    for (int a = 0; a < n; ++a) subcount *= static_cast<std::size_t>(r);

    auto local_id = [&](const std::array<int, 3>& off, int ot) {
        std::size_t lid = 0;
        for (int a = 0; a < n; ++a) lid = lid * r + static_cast<std::size_t>(off[a] / sl.side_cells);
        return lid * rt + static_cast<std::size_t>(ot / sl.tcells);
    };

    std::vector<cplx> sums(subcount * n, cplx{0.0, 0.0});
    for_cube_points(dec, j, id, [&](std::size_t flat, const std::array<int, 3>& off, int ot) {
        const std::size_t lid = local_id(off, ot);
        for (int i = 0; i < n; ++i) sums[lid * n + i] += G[i].data[flat];
    });
    double subpts = static_cast<double>(sl.tcells);
    for (int a = 0; a < n; ++a) subpts *= sl.side_cells;
    for (cplx& v : sums) v /= subpts;

    double acc = 0.0;
    for_cube_points(dec, j, id, [&](std::size_t flat, const std::array<int, 3>& off, int ot) {
        const std::size_t lid = local_id(off, ot);
        cplx dot{0.0, 0.0};
        for (int i = 0; i < n; ++i) dot += U[i].data[flat] * sums[lid * n + i];
        acc += std::norm(dot);
    });
    return acc;
}

}  // namespace

VectorField u_lambda_A(const ParabolicOperator& op, double lambda, const SolverConfig& cfg) {
    if (!(lambda > 0.0)) throw std::invalid_argument("u_lambda_A: lambda must be positive");
    return u_core(normalized(op), lambda, cfg);
}

UlambdaCache::UlambdaCache(const ParabolicOperator& op, std::vector<double> lambdas,
                           const SolverConfig& cfg)
    : op_(normalized(op)), lambdas_(std::move(lambdas)) {
    std::sort(lambdas_.begin(), lambdas_.end());
    lambdas_.erase(std::unique(lambdas_.begin(), lambdas_.end()), lambdas_.end());
    for (double l : lambdas_) {
        if (!(l > 0.0)) throw std::invalid_argument("UlambdaCache: lambdas must be positive");
        table_.emplace(l, u_core(op_, l, cfg));
    }
}

const VectorField& UlambdaCache::at(double lambda) const {
    auto it = table_.find(lambda);
    if (it == table_.end()) throw std::out_of_range("UlambdaCache: lambda not tabulated");
    return it->second;
}

ThetaAbReport theta_ab_bounds(const ParabolicOperator& op, double lambda, const Field& f,
                              const SolverConfig& cfg) {
    if (!(f.grid == op.grid))
        throw std::invalid_argument("theta_ab_bounds: probe lives on a different grid");
    const double nf = l2_norm(f);
    if (nf == 0.0) throw std::invalid_argument("theta_ab_bounds: probe f vanishes");

    const GridSpec& g = op.grid;
    const DyadicDecomposition dec(g);
    ThetaAbReport rep;
    rep.lambda = lambda;
    rep.scale = dec.scale_of_lambda(lambda);

    const ParabolicOperator nop = normalized(op);
    const VectorField U = u_core(nop, lambda, cfg);
    const std::vector<double> M = mag2(U);
    const double cellvol = g.cell_volume();
    const double vol = scale_volume(dec, rep.scale);

    const std::vector<double> sums = cube_sums(dec, rep.scale, M);
    for (std::size_t id = 0; id < sums.size(); ++id) {
        const double v = cellvol * sums[id] / vol;
        if (v > rep.gamma) {
            rep.gamma = v;
            rep.gamma_cube = id;
        }
    }

    // probe norm against a dyadically averaged multiplier: the probe itself
    // and the indicator of the dilated attaining cube
    auto probe_value = [&](const Field& p, double pnorm) {
        const Field ap = dyadic_average(p, dec, lambda);
        std::vector<double> w(M.size(), 0.0);
        for (std::size_t q = 0; q < w.size(); ++q) w[q] = M[q] * std::norm(ap.data[q]);
        return std::sqrt(cellvol * pairwise_sum(w)) / pnorm;
    };

    const double caller = probe_value(f, nf);

    const auto mask2 = dec.cube_geometry(rep.scale, rep.gamma_cube).dilate(2.0).mask(g);
    Field ind(g);
    std::size_t count2 = 0;
    for (std::size_t q = 0; q < mask2.size(); ++q)
        if (mask2[q]) {
            ind.data[q] = cplx{1.0, 0.0};
            ++count2;
        }
    const double vol2 = cellvol * static_cast<double>(count2);
    const double indicator = probe_value(ind, std::sqrt(vol2));
    rep.converse_bound = vol2 / vol;

    if (indicator >= caller) {
        rep.gamma_prime = indicator;
        rep.probe = "indicator";
    } else {
        rep.gamma_prime = caller;
        rep.probe = "caller";
    }

    const double gp2 = sq(rep.gamma_prime);
    rep.forward_ratio = rep.gamma > 0.0 ? gp2 / rep.gamma : 0.0;
    rep.converse_ratio = gp2 > 0.0 ? rep.gamma / gp2 : 0.0;
    if (rep.gamma == 0.0 && gp2 == 0.0) {
        rep.pass = true;
    } else {
        const double slack = 1.0 + 1e-9;
        rep.pass = gp2 <= rep.gamma * slack && rep.gamma <= rep.converse_bound * gp2 * slack;
    }
    return rep;
}

double upsilon_bound(const ParabolicOperator& op, const DyadicDecomposition& dec) {
    const GridSpec& g = dec.grid;
    if (!(g == op.grid))
        throw std::invalid_argument("upsilon_bound: decomposition grid mismatch");
    const int n = g.n;
    const double cellvol = g.cell_volume();
    double best = 0.0;

    for (int j = 0; j <= dec.j_max; ++j) {
        const auto s = dec.scale(j);
        const double vol = scale_volume(dec, j);
        double spc = 1.0;
        for (int a = 0; a < n; ++a) spc *= s.side_cells;

        // per-slice spatial means of every column entry inside each cube
        std::vector<cplx> mean(s.cube_count * static_cast<std::size_t>(s.tcells) * n * n,
                               cplx{0.0, 0.0});
        auto slot = [&](std::size_t id, int lt, int k, int i) {
            return ((id * s.tcells + static_cast<std::size_t>(lt)) * n + k) * n + i;
        };
        std::array<int, 3> ix{0, 0, 0};
        std::size_t flat = 0;
        const std::size_t sp = g.spatial_points();
        for (std::size_t p = 0; p < sp; ++p) {
            for (int it = 0; it < g.Nt; ++it, ++flat) {
                const std::size_t id = dec.cube_of(j, ix, it);
                const int lt = it % s.tcells;
                for (int k = 0; k < n; ++k)
                    for (int i = 0; i < n; ++i) mean[slot(id, lt, k, i)] += op.coef(flat, k, i);
            }
            for (int a = n - 1; a >= 0; --a) {
                if (++ix[a] < g.Nx) break;
                ix[a] = 0;
            }
        }
        for (cplx& v : mean) v /= spc;

        std::vector<double> osc(s.cube_count * n, 0.0);
        ix = {0, 0, 0};
        flat = 0;
        for (std::size_t p = 0; p < sp; ++p) {
            for (int it = 0; it < g.Nt; ++it, ++flat) {
                const std::size_t id = dec.cube_of(j, ix, it);
                const int lt = it % s.tcells;
                for (int i = 0; i < n; ++i) {
                    double v = 0.0;
                    for (int k = 0; k < n; ++k)
                        v += std::norm(op.coef(flat, k, i) - mean[slot(id, lt, k, i)]);
                    osc[id * n + i] += v;
                }
            }
            for (int a = n - 1; a >= 0; --a) {
                if (++ix[a] < g.Nx) break;
                ix[a] = 0;
            }
        }
        for (double v : osc) best = std::max(best, cellvol * v / vol);
    }
    return best;
}

RlambdaReport r_lambda_apply(const ParabolicOperator& op, double lambda, const VectorField& V,
                             const SolverConfig& cfg) {
    if (!(lambda > 0.0)) throw std::invalid_argument("r_lambda_apply: lambda must be positive");
    if (!(V.grid == op.grid))
        throw std::invalid_argument("r_lambda_apply: field lives on a different grid");

    const ParabolicOperator nop = normalized(op);
    const DyadicDecomposition dec(op.grid);

    const Field t1 = resolvent_div(nop, lambda, coef_times(nop, V), cfg).u;
    const VectorField U = u_core(nop, lambda, cfg);

    RlambdaReport rep;
    rep.r = t1;
    for (int i = 0; i < op.grid.n; ++i) {
        const Field w = dyadic_average(V[i], dec, lambda);
        for (std::size_t p = 0; p < rep.r.size(); ++p) rep.r.data[p] -= U[i].data[p] * w.data[p];
    }

    double gg = 0.0, tt = 0.0;
    for (int i = 0; i < op.grid.n; ++i) {
        gg += sq(l2_norm(gradx(V[i])));
        tt += sq(l2_norm(dt(V[i])));
    }
    rep.majorant = lambda * std::sqrt(gg) + lambda * lambda * std::sqrt(tt);
    rep.r_norm = l2_norm(rep.r);
    rep.ratio = rep.majorant > 0.0 ? rep.r_norm / rep.majorant : 0.0;
    return rep;
}

RlambdaReport r_lambda_apply(const ParabolicOperator& op, double lambda, const Field& g,
                             const SolverConfig& cfg) {
    if (!(g.grid == op.grid))
        throw std::invalid_argument("r_lambda_apply: field lives on a different grid");
    return r_lambda_apply(op, lambda, gradx(g), cfg);
}

double cutoff_chi1(double u) {
    const double a = std::abs(u);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    // smooth ramp b(s)/(b(s) + b(1-s)) on the transition band
    const double s = (1.0 - a) / 0.5;
    const double b0 = std::exp(-1.0 / s);
    const double b1 = std::exp(-1.0 / (1.0 - s));
    return b0 / (b0 + b1);
}

double cutoff_eta(double s) {
    const double a = std::abs(s);
    if (a <= 0.25) return 1.0;
    if (a >= 1.0) return 0.0;
    const double u = (1.0 - a) / 0.75;
    const double b0 = std::exp(-1.0 / u);
    const double b1 = std::exp(-1.0 / (1.0 - u));
    return b0 / (b0 + b1);
}

Field tb_profile_L(const GridSpec& g, const ParabolicCube& Delta,
                   const std::array<double, 3>& zeta) {
    if (!(Delta.ell > 0.0)) throw std::invalid_argument("tb_profile_L: cube has no size");
    const double ts = Delta.time_side(g);
    Field L(g);
    std::array<int, 3> ix{0, 0, 0};
    std::size_t flat = 0;
    const std::size_t sp = g.spatial_points();
    for (std::size_t p = 0; p < sp; ++p) {
        double chi = 1.0;
        double phi = 0.0;
        for (int a = 0; a < g.n; ++a) {
            const double d = wrap_offset(ix[a] * g.hx(), Delta.center[a], g.Lx);
            chi *= cutoff_chi1(d / Delta.ell);
            phi += d * zeta[a];
        }
        for (int it = 0; it < g.Nt; ++it, ++flat) {
            const double s = wrap_offset(it * g.ht(), Delta.tcenter, g.Lt) / ts;
            L.data[flat] = cplx{chi * cutoff_eta(s) * phi, 0.0};
        }
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
    return L;
}

TestFunctionPair test_function(const ParabolicOperator& op, const ParabolicCube& Delta,
                               const std::array<double, 3>& zeta, double epsilon,
                               const SolverConfig& cfg) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("test_function: epsilon must be in (0,1)");
    check_unit(op.grid, zeta, "test_function");
    if (!Delta.dilate(2.0).fits(op.grid))
        throw SupportOverflow("test_function: doubled cube exceeds the torus");

    TestFunctionPair out;
    out.L = tb_profile_L(op.grid, Delta, zeta);
    auto res = resolvent(op, epsilon * Delta.ell, out.L, cfg);
    out.f_test = std::move(res.u);
    out.stats = res.stats;
    return out;
}

LaaReport verify_laa(const ParabolicOperator& op, const ParabolicCube& Delta,
                     const std::array<double, 3>& zeta, double epsilon,
                     const SolverConfig& cfg) {
    const double vol = Delta.volume(op.grid);

    auto ratios = [&](double eps, double out[3]) {
        const TestFunctionPair tf = test_function(op, Delta, zeta, eps, cfg);
        const Field diff = tf.f_test - tf.L;
        const double el = eps * Delta.ell;
        out[0] = sq(l2_norm(diff)) / (el * el * vol);
        out[1] = sq(dd_norm(diff)) / vol;
        out[2] = sq(dd_norm(tf.f_test)) / vol;
    };

    LaaReport rep;
    double full[3], half[3];
    ratios(epsilon, full);
    ratios(epsilon / 2.0, half);
    rep.ratio_i = full[0];
    rep.ratio_ii = full[1];
    rep.ratio_iii = full[2];
    rep.ratio_i_half = half[0];
    rep.ratio_ii_half = half[1];
    rep.ratio_iii_half = half[2];
    rep.eps_scaling = half[0] > 0.0 ? full[0] / half[0] : 0.0;
    return rep;
}

std::vector<std::array<double, 3>> default_directions(int n, int level) {
    if (n < 1 || n > 3) throw std::invalid_argument("default_directions: n must be 1, 2 or 3");
    if (level < 1) throw std::invalid_argument("default_directions: level must be at least 1");
    std::vector<std::array<double, 3>> w;
    if (n == 1) {
        w.push_back({1.0, 0.0, 0.0});
        w.push_back({-1.0, 0.0, 0.0});
        return w;
    }
    if (n == 2) {
        const int m = 8 << (level - 1);
        for (int k = 0; k < m; ++k) {
            const double a = 2.0 * M_PI * k / m;
            w.push_back({std::cos(a), std::sin(a), 0.0});
        }
        return w;
    }
    for (int a = 0; a < 3; ++a)
        for (int s = -1; s <= 1; s += 2) {
            std::array<double, 3> v{0.0, 0.0, 0.0};
            v[a] = s;
            w.push_back(v);
        }
    const double r2 = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            for (int sa = -1; sa <= 1; sa += 2)
                for (int sb = -1; sb <= 1; sb += 2) {
                    std::array<double, 3> v{0.0, 0.0, 0.0};
                    v[a] = sa * r2;
                    v[b] = sb * r2;
                    w.push_back(v);
                }
    if (level >= 2) {
        const double r3 = 1.0 / std::sqrt(3.0);
        for (int sa = -1; sa <= 1; sa += 2)
            for (int sb = -1; sb <= 1; sb += 2)
                for (int sc = -1; sc <= 1; sc += 2)
                    w.push_back({sa * r3, sb * r3, sc * r3});
    }
    return w;
}

TbConfig make_tb_config(int n, double epsilon, int direction_level) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("make_tb_config: epsilon must be in (0,1)");
    TbConfig tb;
    tb.epsilon = epsilon;
    tb.directions = default_directions(n, direction_level);
    return tb;
}

CarlesonReport carleson_functional(const UlambdaCache& cache, const DyadicDecomposition& dec,
                                   const LambdaGrid& grid, int j_lo, int j_hi) {
    j_lo = std::max(0, j_lo);
    j_hi = std::min(dec.j_max, j_hi);
    if (j_lo > j_hi) throw std::invalid_argument("carleson_functional: empty scale window");
    const GridSpec& g = dec.grid;
    if (!(g == cache.op().grid))
        throw std::invalid_argument("carleson_functional: decomposition grid mismatch");

    const double cellvol = g.cell_volume();
    const double h = grid.weight;

    std::vector<std::vector<double>> mags;
    mags.reserve(cache.lambdas().size());
    for (double l : cache.lambdas()) mags.push_back(mag2(cache.at(l)));

    CarlesonReport rep;
    for (int j = j_lo; j <= j_hi; ++j) {
        const auto s = dec.scale(j);
        const double vol = scale_volume(dec, j);
        std::vector<double> acc(s.cube_count, 0.0);
        for (std::size_t li = 0; li < cache.lambdas().size(); ++li) {
            if (cache.lambdas()[li] > s.ell * (1.0 + 1e-12)) continue;
            const std::vector<double> sums = cube_sums(dec, j, mags[li]);
            for (std::size_t id = 0; id < acc.size(); ++id) acc[id] += h * sums[id];
        }
        for (std::size_t id = 0; id < acc.size(); ++id) {
            const double v = cellvol * acc[id] / vol;
            rep.values.push_back({j, id, v});
            if (v > rep.supremum) {
                rep.supremum = v;
                rep.sup_scale = j;
                rep.sup_cube = id;
            }
        }
    }

    // quadrature diagnostics at the attaining cube: nodes used and the share
    // of the extreme nodes, a direct read on ladder truncation
    const double ell_sup = dec.scale(rep.sup_scale).ell * (1.0 + 1e-12);
    const double vol_sup = scale_volume(dec, rep.sup_scale);
    double vfirst = -1.0, vlast = 0.0;
    for (std::size_t li = 0; li < cache.lambdas().size(); ++li) {
        if (cache.lambdas()[li] > ell_sup) continue;
        ++rep.lambda_nodes;
        double ssum = 0.0;
        for_cube_points(dec, rep.sup_scale, rep.sup_cube,
                        [&](std::size_t flat, const std::array<int, 3>&, int) {
                            ssum += mags[li][flat];
                        });
        const double contrib = h * cellvol * ssum / vol_sup;
        if (vfirst < 0.0) vfirst = contrib;
        vlast = contrib;
    }
    if (rep.supremum > 0.0 && vfirst >= 0.0) {
        rep.first_node_frac = vfirst / rep.supremum;
        rep.last_node_frac = vlast / rep.supremum;
    }
    return rep;
}

CarlesonReport carleson_functional(const ParabolicOperator& op, const DyadicDecomposition& dec,
                                   const LambdaGrid& grid, const SolverConfig& cfg) {
    const double ell0 = dec.scale(0).ell * (1.0 + 1e-12);
    std::vector<double> nodes;
    for (double v : grid.values)
        if (v <= ell0) nodes.push_back(v);
    if (nodes.empty())
        throw std::invalid_argument("carleson_functional: no ladder nodes at or below the torus scale");
    const UlambdaCache cache(op, nodes, cfg);
    return carleson_functional(cache, dec, grid, 0, dec.j_max);
}

std::string carleson_csv(const CarlesonReport& report) {
    std::ostringstream os;
    os << "scale,cube,value\n";
    os << std::scientific << std::setprecision(16);
    for (const auto& row : report.values)
        os << row.scale << "," << row.cube << "," << row.value << "\n";
    return os.str();
}

TbReductionReport tb_reduction_check(const ParabolicOperator& op,
                                     const DyadicDecomposition& dec, const TbConfig& tb,
                                     const LambdaGrid& grid, const SolverConfig& cfg) {
    if (!(dec.grid == op.grid))
        throw std::invalid_argument("tb_reduction_check: decomposition grid mismatch");
    if (tb.directions.empty())
        throw std::invalid_argument("tb_reduction_check: no directions configured");
    if (!(tb.epsilon > 0.0 && tb.epsilon < 1.0))
        throw std::invalid_argument("tb_reduction_check: epsilon must be in (0,1)");
    for (const auto& z : tb.directions) check_unit(op.grid, z, "tb_reduction_check");
    if (tb.j_cap < 1 || dec.j_max < 1)
        throw std::invalid_argument("tb_reduction_check: needs at least one sub-torus scale");

    const int j_lo = 1;
    const int j_hi = std::min(tb.j_cap, dec.j_max);
    const GridSpec& g = op.grid;
    const double cellvol = g.cell_volume();
    const double h = grid.weight;

    std::vector<double> nodes;
    const double ell_lo = dec.scale(j_lo).ell * (1.0 + 1e-12);
    for (double v : grid.values)
        if (v <= ell_lo) nodes.push_back(v);
    if (nodes.empty())
        throw std::invalid_argument("tb_reduction_check: no ladder nodes at or below the scanned scales");

    const UlambdaCache cache(op, nodes, cfg);
    const CarlesonReport leftrep = carleson_functional(cache, dec, grid, j_lo, j_hi);

    TbReductionReport rep;
    rep.left = leftrep.supremum;
    rep.j_lo = j_lo;
    rep.j_hi = j_hi;
    rep.epsilon = tb.epsilon;
    rep.per_direction.assign(tb.directions.size(), 0.0);

    double best_dir = -1.0;
    for (std::size_t z = 0; z < tb.directions.size(); ++z) {
        double dsup = 0.0;
        int dscale = j_lo;
        std::size_t dcube = 0;
        for (int j = j_lo; j <= j_hi; ++j) {
            const auto s = dec.scale(j);
            const double vol = scale_volume(dec, j);
            for (std::size_t id = 0; id < s.cube_count; ++id) {
                const TestFunctionPair tf = test_function(
                    cache.op(), dec.cube_geometry(j, id), tb.directions[z], tb.epsilon, cfg);
                const VectorField G = gradx(tf.f_test);
                double val = 0.0;
                for (double l : cache.lambdas()) {
                    if (l > s.ell * (1.0 + 1e-12)) continue;
                    val += h * cube_dot_sq(dec, j, id, dec.scale_of_lambda(l), cache.at(l), G);
                }
                val = cellvol * val / vol;
                if (val > dsup) {
                    dsup = val;
                    dscale = j;
                    dcube = id;
                }
            }
        }
        rep.per_direction[z] = dsup;
        rep.right += dsup;
        if (dsup > best_dir) {
            best_dir = dsup;
            rep.attaining_direction = static_cast<int>(z);
            rep.attaining_scale = dscale;
            rep.attaining_cube = dcube;
        }
    }

    if (rep.right > 0.0)
        rep.ratio = rep.left / rep.right;
    else
        rep.ratio = rep.left > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return rep;
}

}  // namespace katolab

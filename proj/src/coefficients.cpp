#include "katolab/coefficients.hpp"

#include <Eigen/Dense>

#include "katolab/detail/modes.hpp"
#include "katolab/sampler.hpp"

namespace katolab {
namespace {

using detail::for_each_spatial;

// Nx and Nt are powers of two, so toroidal wrap is a mask.
inline int wrap(int i, int N) { return i & (N - 1); }

// spatial flat index without the time axis
std::size_t sp_index(const GridSpec& g, const std::array<int, 3>& ix) {
    std::size_t p = 0;
    for (int a = 0; a < g.n; ++a) p = p * g.Nx + static_cast<std::size_t>(wrap(ix[a], g.Nx));
    return p;
}

// enumerate the cells of a toroidal cube given by corner and per-axis sides
template <class Fn>
void for_each_cube_cell(const GridSpec& g, const std::array<int, 3>& corner, int side, Fn&& fn) {
    std::array<int, 3> d{0, 0, 0};
    std::array<int, 3> ix{0, 0, 0};
    std::size_t cells = 1;
    for (int a = 0; a < g.n; ++a) cells *= static_cast<std::size_t>(side);
    for (std::size_t c = 0; c < cells; ++c) {
        for (int a = 0; a < g.n; ++a) ix[a] = wrap(corner[a] + d[a], g.Nx);
        fn(ix);
        for (int a = g.n - 1; a >= 0; --a) {
            if (++d[a] < side) break;
            d[a] = 0;
        }
    }
}

double checkerboard_sign(const GridSpec& g, const std::array<int, 3>& ix) {
    int parity = 0;
    for (int a = 0; a < g.n; ++a) parity += ix[a] / (g.Nx / 2);
    return (parity % 2 == 0) ? 1.0 : -1.0;
}

} // namespace

EllipticityReport validate(const CoefficientField& c) {
    const GridSpec& g = c.grid;
    const int n = g.n;
    EllipticityReport rep;
    rep.c1_observed = std::numeric_limits<double>::infinity();
    rep.c2_observed = 0.0;
    rep.antisym_defect = 0.0;
    double dmax = 0.0;

    Eigen::MatrixXcd S(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    const std::size_t pts = g.points();
    for (std::size_t p = 0; p < pts; ++p) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) S(i, j) = c.S_at(p, i, j);

        es.compute((S + S.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        rep.c1_observed = std::min(rep.c1_observed, es.eigenvalues().minCoeff());
        es.compute(S.adjoint() * S, Eigen::EigenvaluesOnly);
        rep.c2_observed = std::max(rep.c2_observed, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                rep.antisym_defect = std::max(rep.antisym_defect,
                                              std::abs(c.D_at(p, i, j) + c.D_at(p, j, i)));
                dmax = std::max(dmax, std::abs(c.D_at(p, i, j)));
            }
    }
    rep.pass = rep.c1_observed > 0.0 && rep.antisym_defect <= 1e-12 * std::max(1.0, dmax);
    return rep;
}

namespace {

double bmo_per_time_sup(const CoefficientField& c) {
    const GridSpec& g = c.grid;
    const int n = g.n;
    double sup = 0.0;
    std::vector<double> slice(g.spatial_points());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int it = 0; it < g.Nt; ++it) {
                for_each_spatial(g, [&](std::size_t p, const std::array<int, 3>& ix) {
                    slice[p] = c.D_at(g.index(ix, it), i, j);
                });
                for (int side = g.Nx; side >= 1; side /= 2) {
                    const int half = side >= 2 ? side / 2 : 0;
                    // aligned grid plus every half-shift combination
                    const int shift_combos = half > 0 ? (1 << n) : 1;
                    for (int sc = 0; sc < shift_combos; ++sc) {
                        std::array<int, 3> base{0, 0, 0};
                        for (int a = 0; a < n; ++a) base[a] = (sc >> a & 1) ? half : 0;
                        const int per_axis = g.Nx / side;
                        std::array<int, 3> q{0, 0, 0};
                        int cubes = 1;
                        for (int a = 0; a < n; ++a) cubes *= per_axis;
                        for (int cq = 0; cq < cubes; ++cq) {
                            std::array<int, 3> corner{0, 0, 0};
                            for (int a = 0; a < n; ++a) corner[a] = base[a] + q[a] * side;
                            double mean = 0.0;
                            std::size_t cnt = 0;
                            for_each_cube_cell(g, corner, side, [&](const std::array<int, 3>& ix) {
                                mean += slice[sp_index(g, ix)];
                                ++cnt;
                            });
                            mean /= static_cast<double>(cnt);
                            double osc = 0.0;
                            for_each_cube_cell(g, corner, side, [&](const std::array<int, 3>& ix) {
                                osc += std::abs(slice[sp_index(g, ix)] - mean);
                            });
                            sup = std::max(sup, osc / static_cast<double>(cnt));
                            for (int a = n - 1; a >= 0; --a) {
                                if (++q[a] < per_axis) break;
                                q[a] = 0;
                            }
                        }
                    }
                }
            }
        }
    return sup;
}

double bmo_parabolic(const CoefficientField& c) {
    const GridSpec& g = c.grid;
    const int n = g.n;
    double sup2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int side = g.Nx, tside = g.Nt; side >= 1 && tside >= 1;
                 side /= 2, tside /= 4) {
                const int halfx = side >= 2 ? side / 2 : 0;
                const int halft = tside >= 2 ? tside / 2 : 0;
                const int combos = (halfx > 0 ? (1 << n) : 1) * (halft > 0 ? 2 : 1);
                for (int sc = 0; sc < combos; ++sc) {
                    std::array<int, 3> base{0, 0, 0};
                    int bits = sc;
                    for (int a = 0; a < n; ++a, bits >>= 1) base[a] = (bits & 1) ? halfx : 0;
                    const int tbase = (bits & 1) ? halft : 0;
                    const int per_axis = g.Nx / side;
                    const int per_t = g.Nt / tside;
                    int cubes = per_t;
                    for (int a = 0; a < n; ++a) cubes *= per_axis;
                    for (int cq = 0; cq < cubes; ++cq) {
                        int rem = cq;
                        const int qt = rem % per_t;
                        rem /= per_t;
                        std::array<int, 3> corner{0, 0, 0};
                        for (int a = n - 1; a >= 0; --a) {
                            corner[a] = base[a] + (rem % per_axis) * side;
                            rem /= per_axis;
                        }
                        const int tcorner = tbase + qt * tside;
                        // oscillation about the per-time spatial average
                        double acc = 0.0;
                        std::size_t cnt = 0;
                        for (int dt_ = 0; dt_ < tside; ++dt_) {
                            const int it = (tcorner + dt_) & (g.Nt - 1);
                            double mean = 0.0;
                            std::size_t scnt = 0;
                            for_each_cube_cell(g, corner, side, [&](const std::array<int, 3>& ix) {
                                mean += c.D_at(g.index(ix, it), i, j);
                                ++scnt;
                            });
                            mean /= static_cast<double>(scnt);
                            for_each_cube_cell(g, corner, side, [&](const std::array<int, 3>& ix) {
                                const double d = c.D_at(g.index(ix, it), i, j) - mean;
                                acc += d * d;
                            });
                            cnt += scnt;
                        }
                        sup2 = std::max(sup2, acc / static_cast<double>(cnt));
                    }
                }
            }
        }
    return std::sqrt(sup2);
}

} // namespace

double bmo_norm(const CoefficientField& c, BmoMode mode) {
    return mode == BmoMode::per_time_sup ? bmo_per_time_sup(c) : bmo_parabolic(c);
}

CoefficientField normalize_D(const CoefficientField& c, std::optional<SpatialCube> Q0) {
    const GridSpec& g = c.grid;
    const int n = g.n;
    SpatialCube q = Q0.value_or(SpatialCube{{0, 0, 0}, g.Nx});
    if (q.side_cells < 1 || q.side_cells > g.Nx)
        throw std::invalid_argument("normalize_D: Q0 does not fit in the torus");

    CoefficientField out = c;
    std::vector<double> avg(static_cast<std::size_t>(n) * n);
    std::size_t cnt = 1;
    for (int a = 0; a < n; ++a) cnt *= static_cast<std::size_t>(q.side_cells);
    for (int it = 0; it < g.Nt; ++it) {
        std::fill(avg.begin(), avg.end(), 0.0);
        for_each_cube_cell(g, q.corner, q.side_cells, [&](const std::array<int, 3>& ix) {
            const std::size_t p = g.index(ix, it);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) avg[i * n + j] += c.D_at(p, i, j);
        });
        for (auto& v : avg) v /= static_cast<double>(cnt);
        for_each_spatial(g, [&](std::size_t, const std::array<int, 3>& ix) {
            const std::size_t p = g.index(ix, it);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.D_at(p, i, j) -= avg[i * n + j];
        });
    }
    return out;
}

std::vector<JnRow> john_nirenberg_growth(const CoefficientField& c, const SpatialCube& Q0,
                                         double p, int kmax) {
    const GridSpec& g = c.grid;
    const int n = g.n;
    if (p < 1.0) throw std::invalid_argument("john_nirenberg_growth: p must be >= 1");
    if ((Q0.side_cells << kmax) > g.Nx)
        throw std::domain_error("john_nirenberg_growth: 2^kmax Q0 exceeds the torus");
    if (kmax >= 1 && Q0.side_cells % 2 != 0 && Q0.side_cells != 1)
        throw std::invalid_argument("john_nirenberg_growth: odd Q0 side cannot be dilated about its center");

    // per-time averages over the base cube
    std::vector<std::vector<double>> base_avg(static_cast<std::size_t>(g.Nt),
                                              std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
    std::size_t cnt0 = 1;
    for (int a = 0; a < n; ++a) cnt0 *= static_cast<std::size_t>(Q0.side_cells);
    for (int it = 0; it < g.Nt; ++it) {
        for_each_cube_cell(g, Q0.corner, Q0.side_cells, [&](const std::array<int, 3>& ix) {
            const std::size_t pt = g.index(ix, it);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) base_avg[it][i * n + j] += c.D_at(pt, i, j);
        });
        for (auto& v : base_avg[it]) v /= static_cast<double>(cnt0);
    }

    std::vector<JnRow> rows;
    for (int k = 0; k <= kmax; ++k) {
        const int side = Q0.side_cells << k;
        std::array<int, 3> corner = Q0.corner;
        for (int a = 0; a < n; ++a) corner[a] = wrap(Q0.corner[a] - (side - Q0.side_cells) / 2, g.Nx);
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                std::size_t cells = 0;
                for (int it = 0; it < g.Nt; ++it) {
                    const double b = base_avg[it][i * n + j];
                    for_each_cube_cell(g, corner, side, [&](const std::array<int, 3>& ix) {
                        acc += std::pow(std::abs(c.D_at(g.index(ix, it), i, j) - b), p);
                        ++cells;
                    });
                }
                worst = std::max(worst, std::pow(acc / static_cast<double>(cells), 1.0 / p));
            }
        rows.push_back({k, worst, worst / std::max(k, 1)});
    }
    return rows;
}

namespace {

void fill_identity_S(CoefficientField& c) {
    const GridSpec& g = c.grid;
    const std::size_t pts = g.points();
    for (std::size_t p = 0; p < pts; ++p)
        for (int i = 0; i < g.n; ++i) c.S_at(p, i, i) = cplx{1.0, 0.0};
}

void require_planar(const GridSpec& g, const std::string& family) {
    if (g.n < 2)
        throw std::invalid_argument("generate: family '" + family +
                                    "' needs n >= 2 for a nonzero antisymmetric part");
}

} // namespace

GeneratedCoefficients generate(const GridSpec& grid, const GeneratorSpec& spec) {
    grid.validate();
    CoefficientField c(grid);
    const double kappa = spec.magnitude;

    if (spec.family == "identity") {
        fill_identity_S(c);
    } else if (spec.family == "constant_antisym") {
        require_planar(grid, spec.family);
        fill_identity_S(c);
        const std::size_t pts = grid.points();
        for (std::size_t p = 0; p < pts; ++p) {
            c.D_at(p, 0, 1) = kappa;
            c.D_at(p, 1, 0) = -kappa;
        }
    } else if (spec.family == "checkerboard" || spec.family == "time_modulated") {
        require_planar(grid, spec.family);
        fill_identity_S(c);
        const bool modulated = spec.family == "time_modulated";
        for_each_spatial(grid, [&](std::size_t, const std::array<int, 3>& ix) {
            const double s = checkerboard_sign(grid, ix);
            for (int it = 0; it < grid.Nt; ++it) {
                const double gmod =
                    modulated ? std::cos(2.0 * M_PI * it / static_cast<double>(grid.Nt)) : 1.0;
                const std::size_t p = grid.index(ix, it);
                c.D_at(p, 0, 1) = kappa * s * gmod;
                c.D_at(p, 1, 0) = -kappa * s * gmod;
            }
        });
    } else if (spec.family == "log_singular") {
        require_planar(grid, spec.family);
        fill_identity_S(c);
        // log of the toroidal distance to the center site, clamped at half a
        // cell so the lattice sees max |D| ~ kappa log Nx
        const double hx = grid.hx();
        for_each_spatial(grid, [&](std::size_t, const std::array<int, 3>& ix) {
            double d2 = 0.0;
            for (int a = 0; a < grid.n; ++a) {
                int di = ix[a] - grid.Nx / 2;
                if (di < -grid.Nx / 2) di += grid.Nx;
                if (di >= grid.Nx / 2) di -= grid.Nx;
                d2 += (di * hx) * (di * hx);
            }
            const double v = kappa * std::log(std::max(std::sqrt(d2), hx / 2.0));
            for (int it = 0; it < grid.Nt; ++it) {
                const std::size_t p = grid.index(ix, it);
                c.D_at(p, 0, 1) = v;
                c.D_at(p, 1, 0) = -v;
            }
        });
    } else if (spec.family == "random_smooth") {
        const int n = grid.n;
        const double m = spec.magnitude;
        if (m < 0.0 || m >= 1.0)
            throw std::invalid_argument("generate: random_smooth magnitude must lie in [0, 1)");
        auto it_dm = spec.extra.find("d_magnitude");
        const double dm = it_dm != spec.extra.end() ? it_dm->second : m;

        SamplerOptions opt;
        opt.band_x = 2;
        opt.band_t = 2;
        opt.unit_norm = false;

        // perturbation matrix, sup of pointwise operator norm scaled to 1
        std::vector<Field> M(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                M[i * n + j] = sample_smooth(grid, spec.seed, 0x53000000ull + i * n + j, opt);
        double snorm = 0.0;
        {
            Eigen::MatrixXcd Mp(n, n);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
            const std::size_t pts = grid.points();
            for (std::size_t p = 0; p < pts; ++p) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) Mp(i, j) = M[i * n + j].data[p];
                es.compute(Mp.adjoint() * Mp, Eigen::EigenvaluesOnly);
                snorm = std::max(snorm, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
            }
        }
        const double sscale = snorm > 0.0 ? m / snorm : 0.0;
        const std::size_t pts = grid.points();
        for (std::size_t p = 0; p < pts; ++p)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    c.S_at(p, i, j) = (i == j ? cplx{1.0, 0.0} : cplx{0.0, 0.0}) +
                                      sscale * M[i * n + j].data[p];

        if (n >= 2 && dm > 0.0) {
            opt.real_valued = true;
            std::vector<Field> R(static_cast<std::size_t>(n) * n);
            double rmax = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    R[i * n + j] = sample_smooth(grid, spec.seed, 0x44000000ull + i * n + j, opt);
                    for (const auto& v : R[i * n + j].data) rmax = std::max(rmax, std::abs(v.real()));
                }
            const double dscale = rmax > 0.0 ? dm / rmax : 0.0;
            for (std::size_t p = 0; p < pts; ++p)
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        const double v = dscale * R[i * n + j].data[p].real();
                        c.D_at(p, i, j) = v;
                        c.D_at(p, j, i) = -v;
                    }
        }
    } else {
        throw std::invalid_argument("generate: unknown family '" + spec.family + "'");
    }

    GeneratedCoefficients out;
    out.coeffs = std::move(c);
    const EllipticityReport rep = validate(out.coeffs);
    if (!rep.pass) throw std::logic_error("generate: constructed coefficients failed validation");
    out.params.c1 = rep.c1_observed;
    out.params.c2 = rep.c2_observed;
    out.params.c3 = bmo_norm(out.coeffs, BmoMode::per_time_sup);
    return out;
}

} // namespace katolab

#include "katolab/dyadic.hpp"

#include "katolab/fft.hpp"

namespace katolab {
namespace {

// wrapped offset of coordinate v from center c on a circle of period L,
// reduced into [-L/2, L/2)
double wrap_offset(double v, double c, double L) {
    double d = std::fmod(v - c, L);
    if (d < -L / 2) d += L;
    if (d >= L / 2) d -= L;
    return d;
}

} // namespace

bool ParabolicCube::contains(const GridSpec& g, const std::array<int, 3>& ix, int it) const {
    for (int a = 0; a < g.n; ++a) {
        const double d = wrap_offset(ix[a] * g.hx(), center[a], g.Lx);
        if (!(d >= -ell / 2 && d < ell / 2)) {
            if (ell >= g.Lx) continue;  // full-period axis
            return false;
        }
    }
    const double ts = time_side(g);
    if (ts >= g.Lt) return true;
    const double d = wrap_offset(it * g.ht(), tcenter, g.Lt);
    return d >= -ts / 2 && d < ts / 2;
}

std::vector<std::uint8_t> ParabolicCube::mask(const GridSpec& g) const {
    std::vector<std::uint8_t> m(g.points(), 0);
    std::array<int, 3> ix{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    std::size_t flat = 0;
    for (std::size_t p = 0; p < sp; ++p) {
        for (int it = 0; it < g.Nt; ++it, ++flat) m[flat] = contains(g, ix, it) ? 1 : 0;
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
    return m;
}

std::vector<std::uint8_t> annulus_mask(const GridSpec& g, const ParabolicCube& delta, int k) {
    if (k < 1) throw std::invalid_argument("annulus_mask: k starts at 1");
    const ParabolicCube outer = delta.dilate(std::pow(2.0, k + 1));
    if (!outer.fits(g)) throw std::domain_error("annulus_mask: annulus exceeds the torus");
    const auto mo = outer.mask(g);
    const auto mi = delta.dilate(std::pow(2.0, k)).mask(g);
    std::vector<std::uint8_t> m(mo.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = mo[i] && !mi[i];
    return m;
}

double masked_l2(const Field& f, const std::vector<std::uint8_t>& mask) {
    std::vector<double> sq(f.size(), 0.0);
    for (std::size_t i = 0; i < sq.size(); ++i)
        if (mask[i]) sq[i] = std::norm(f.data[i]);
    return std::sqrt(f.grid.cell_volume() * pairwise_sum(sq));
}

Field masked_restrict(const Field& f, const std::vector<std::uint8_t>& mask) {
    Field g = f;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!mask[i]) g.data[i] = cplx{0.0, 0.0};
    return g;
}

DyadicDecomposition::DyadicDecomposition(const GridSpec& g) : grid(g) {
    int j = 0;
    while (grid.Nx / (1 << (j + 1)) >= 1 && grid.Nt / (1 << (2 * (j + 1))) >= 1) ++j;
    j_max = j;
}

DyadicDecomposition::Scale DyadicDecomposition::scale(int j) const {
    if (j < 0 || j > j_max) throw std::out_of_range("DyadicDecomposition: scale out of range");
    Scale s;
    s.j = j;
    s.side_cells = grid.Nx >> j;
    s.tcells = grid.Nt >> (2 * j);
    s.per_axis = grid.Nx / s.side_cells;
    s.per_t = grid.Nt / s.tcells;
    s.cube_count = static_cast<std::size_t>(s.per_t);
    for (int a = 0; a < grid.n; ++a) s.cube_count *= static_cast<std::size_t>(s.per_axis);
    s.ell = grid.Lx / s.per_axis;
    return s;
}

int DyadicDecomposition::scale_of_lambda(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale_of_lambda: lambda must be positive");
    const double raw = std::floor(std::log2(grid.Lx / lambda) + 1e-9);
    const int j = static_cast<int>(raw);
    return std::max(0, std::min(j_max, j));
}

std::size_t DyadicDecomposition::cube_of(int j, const std::array<int, 3>& ix, int it) const {
    const Scale s = scale(j);
    std::size_t id = 0;
    for (int a = 0; a < grid.n; ++a)
        id = id * s.per_axis + static_cast<std::size_t>(ix[a] / s.side_cells);
    return id * s.per_t + static_cast<std::size_t>(it / s.tcells);
}

void DyadicDecomposition::cube_corner(int j, std::size_t id, std::array<int, 3>& corner,
                                      int& tcorner) const {
    const Scale s = scale(j);
    tcorner = static_cast<int>(id % s.per_t) * s.tcells;
    std::size_t rem = id / s.per_t;
    for (int a = grid.n - 1; a >= 0; --a) {
        corner[a] = static_cast<int>(rem % s.per_axis) * s.side_cells;
        rem /= s.per_axis;
    }
}

ParabolicCube DyadicDecomposition::cube_geometry(int j, std::size_t id) const {
    const Scale s = scale(j);
    std::array<int, 3> corner{0, 0, 0};
    int tcorner = 0;
    cube_corner(j, id, corner, tcorner);
    ParabolicCube c;
    c.ell = s.ell;
    for (int a = 0; a < grid.n; ++a) c.center[a] = (corner[a] + s.side_cells * 0.5) * grid.hx();
    c.tcenter = (tcorner + s.tcells * 0.5) * grid.ht();
    return c;
}

Field dyadic_average_scale(const Field& f, const DyadicDecomposition& dec, int j) {
    const GridSpec& g = f.grid;
    const Field fp = physical_of(f);
    const DyadicDecomposition::Scale s = dec.scale(j);

    std::vector<cplx> sums(s.cube_count, cplx{0.0, 0.0});
    std::array<int, 3> ix{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    std::size_t flat = 0;
    std::vector<std::size_t> ids(g.points());
    for (std::size_t p = 0; p < sp; ++p) {
        for (int it = 0; it < g.Nt; ++it, ++flat) {
            const std::size_t id = dec.cube_of(j, ix, it);
            ids[flat] = id;
            sums[id] += fp.data[flat];
        }
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
    const double inv = static_cast<double>(s.cube_count) / static_cast<double>(g.points());
    Field out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = sums[ids[i]] * inv;
    return out;
}

Field dyadic_average(const Field& f, const DyadicDecomposition& dec, double lambda) {
    return dyadic_average_scale(f, dec, dec.scale_of_lambda(lambda));
}

} // namespace katolab

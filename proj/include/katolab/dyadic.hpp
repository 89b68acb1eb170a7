#pragma once

#include "katolab/grid.hpp"

namespace katolab {

// Parabolic geometry: a cube of spatial side ell has time side
// (ell/Lx)^2 * Lt, so unit periods give the usual ell x ell^2 scaling.

// Free-standing cube described by center and spatial side, realized on the
// lattice as a point set (wrapped half-open intervals per axis). Sides below
// one cell degenerate to a single slab of lattice points; dilation arithmetic
// stays exact in the continuum description.
struct ParabolicCube {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double tcenter = 0.0;
    double ell = 0.0;

    double time_side(const GridSpec& g) const { return (ell / g.Lx) * (ell / g.Lx) * g.Lt; }

    ParabolicCube dilate(double c) const {
        ParabolicCube d = *this;
        d.ell = c * ell;
        return d;
    }

    bool fits(const GridSpec& g) const { return ell <= g.Lx && time_side(g) <= g.Lt; }

    bool contains(const GridSpec& g, const std::array<int, 3>& ix, int it) const;

    // 1 inside, 0 outside, field point order
    std::vector<std::uint8_t> mask(const GridSpec& g) const;

    // continuum volume |Q| * |I|
    double volume(const GridSpec& g) const { return std::pow(ell, g.n) * time_side(g); }
};

// annulus 2^{k+1} Delta minus 2^k Delta; throws std::domain_error when the
// outer cube exceeds the torus
std::vector<std::uint8_t> annulus_mask(const GridSpec& g, const ParabolicCube& delta, int k);

double masked_l2(const Field& f, const std::vector<std::uint8_t>& mask);
Field masked_restrict(const Field& f, const std::vector<std::uint8_t>& mask);

// Exact dyadic tiling of the torus. Scale j has spatial side 2^-j Lx
// (Nx/2^j cells) and time side 4^-j Lt (Nt/4^j cells); j_max stops before
// either axis would drop below one cell.
struct DyadicDecomposition {
    GridSpec grid;
    int j_max = 0;

    explicit DyadicDecomposition(const GridSpec& g);

    struct Scale {
        int j = 0;
        int side_cells = 0;
        int tcells = 0;
        int per_axis = 0;  // cubes per spatial axis
        int per_t = 0;     // cubes along time
        std::size_t cube_count = 0;
        double ell = 0.0;
    };

    Scale scale(int j) const;

    // dyadic scale holding lambda <= ell_j < 2 lambda, clamped to [0, j_max]
    int scale_of_lambda(double lambda) const;

    std::size_t cube_of(int j, const std::array<int, 3>& ix, int it) const;

    // corner cell of a cube id at scale j
    void cube_corner(int j, std::size_t id, std::array<int, 3>& corner, int& tcorner) const;

    ParabolicCube cube_geometry(int j, std::size_t id) const;
};

// piecewise-constant projection onto the dyadic cubes at the scale matched to
// lambda; idempotent and self-adjoint by construction
Field dyadic_average(const Field& f, const DyadicDecomposition& dec, double lambda);
Field dyadic_average_scale(const Field& f, const DyadicDecomposition& dec, int j);

} // namespace katolab

#pragma once

#include "katolab/grid.hpp"

namespace katolab::detail {

// Visit every lattice point / spectral bin in storage order. fn gets the flat
// index, the signed frequencies (spectral walks) or raw indices (spatial
// walks), and the time bin.

template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
    std::array<int, 3> kx{0, 0, 0};
    std::array<int, 3> bin{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    std::size_t flat = 0;
    for (std::size_t p = 0; p < sp; ++p) {
        for (int a = 0; a < g.n; ++a) kx[a] = GridSpec::signed_freq(bin[a], g.Nx);
        for (int it = 0; it < g.Nt; ++it)
            fn(flat++, kx, GridSpec::signed_freq(it, g.Nt));
        for (int a = g.n - 1; a >= 0; --a) {
            if (++bin[a] < g.Nx) break;
            bin[a] = 0;
        }
    }
}

template <class Fn>
void for_each_point(const GridSpec& g, Fn&& fn) {
    std::array<int, 3> ix{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    std::size_t flat = 0;
    for (std::size_t p = 0; p < sp; ++p) {
        for (int it = 0; it < g.Nt; ++it)
            fn(flat++, ix, it);
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
}

template <class Fn>
void for_each_spatial(const GridSpec& g, Fn&& fn) {
    std::array<int, 3> ix{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    for (std::size_t p = 0; p < sp; ++p) {
        fn(p, ix);
        for (int a = g.n - 1; a >= 0; --a) {
            if (++ix[a] < g.Nx) break;
            ix[a] = 0;
        }
    }
}

} // namespace katolab::detail

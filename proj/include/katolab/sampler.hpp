#pragma once

#include "katolab/grid.hpp"

namespace katolab {

// Deterministic sample fields. Every draw is a pure function of
// (seed, stream, mode index), so sample j is identical no matter which worker
// produces it or in what order.

struct SamplerOptions {
    int band_x = 0;           // widest retained |k|; 0 means Nx/4
    int band_t = 0;           // widest retained |m|; 0 means Nt/4
    bool real_valued = false; // keep only the real part of the synthesis
    bool zero_mean = false;   // drop the constant mode
    bool unit_norm = true;    // scale to unit L2
};

// Gaussian coefficients on a low-frequency band, Nyquist lines always empty.
Field sample_smooth(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                    const SamplerOptions& opt = {});

// Full-spectrum sample with |coef| ~ (|xi| + |tau|^(1/2))^(-(n+2)/2 - eps)
// and uniform random phases; barely in L2, exercises the rough end of the
// Littlewood-Paley bounds.
Field sample_rough(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                   double eps = 0.1, bool unit_norm = true);

// exp(i(xi.x + tau t)) for the signed mode (k, m)
Field mode_field(const GridSpec& g, const std::array<int, 3>& k, int m);

VectorField sample_smooth_vector(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                                 const SamplerOptions& opt = {});

} // namespace katolab

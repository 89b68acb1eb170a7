#pragma once

#include <complex>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace katolab {

using cplx = std::complex<double>;

// Reductions are pairwise with a fixed association order so that results do
// not depend on how work was scheduled. Used for every norm and inner product
// that ends up in a report.
namespace detail {
template <class T>
T pairwise_sum_range(const T* data, std::size_t n) {
    if (n <= 16) {
        T acc{};
        for (std::size_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}
} // namespace detail

template <class T>
T pairwise_sum(const std::vector<T>& v) {
    return v.empty() ? T{} : detail::pairwise_sum_range(v.data(), v.size());
}

// Counter-based random stream: value i of stream s under seed k is a pure
// function of (k, s, i). Workers can draw sample j without sharing state, so
// parallel and serial runs see identical randomness.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2) + mix64(b)));
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(hash_combine(mix64(seed), mix64(stream))) {}

    std::uint64_t at(std::uint64_t counter) const { return mix64(key_ ^ mix64(counter)); }

    // uniform in [0, 1), 53-bit mantissa
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; counters 2c and 2c+1 feed draw c
    double gaussian(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1 + 0x1.0p-60));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    cplx gaussian_cplx(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-std::log(u1 + 0x1.0p-60));
        const double phi = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    std::uint64_t key_;
};

inline double rel_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace katolab

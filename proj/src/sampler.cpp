#include "katolab/sampler.hpp"

#include "katolab/fft.hpp"
#include "katolab/multipliers.hpp"

namespace katolab {
namespace {

bool any_nyquist(const GridSpec& g, const std::array<int, 3>& kx, int mt) {
    if (mt == -g.Nt / 2) return true;
    for (int a = 0; a < g.n; ++a)
        if (kx[a] == -g.Nx / 2) return true;
    return false;
}

template <class Coef>
Field synthesize(const GridSpec& g, Coef&& coef, bool real_valued, bool unit_norm) {
    Field s(g, true);
    std::array<int, 3> bin{0, 0, 0};
    std::array<int, 3> kx{0, 0, 0};
    const std::size_t sp = g.spatial_points();
    std::size_t flat = 0;
    for (std::size_t p = 0; p < sp; ++p) {
        for (int a = 0; a < g.n; ++a) kx[a] = GridSpec::signed_freq(bin[a], g.Nx);
        for (int it = 0; it < g.Nt; ++it) {
            const int mt = GridSpec::signed_freq(it, g.Nt);
            s.data[flat] = any_nyquist(g, kx, mt) ? cplx{0.0, 0.0} : coef(flat, kx, mt);
            ++flat;
        }
        for (int a = g.n - 1; a >= 0; --a) {
            if (++bin[a] < g.Nx) break;
            bin[a] = 0;
        }
    }
    to_physical(s);
    if (real_valued)
        for (auto& v : s.data) v = cplx{v.real(), 0.0};
    if (unit_norm) {
        const double nrm = l2_norm(s);
        if (nrm > 0.0) s *= cplx{1.0 / nrm, 0.0};
    }
    return s;
}

} // namespace

Field sample_smooth(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                    const SamplerOptions& opt) {
    const int bx = opt.band_x > 0 ? opt.band_x : g.Nx / 4;
    const int bt = opt.band_t > 0 ? opt.band_t : g.Nt / 4;
    CounterRng rng(seed, stream);
    return synthesize(
        g,
        [&](std::size_t flat, const std::array<int, 3>& kx, int mt) -> cplx {
            if (std::abs(mt) > bt) return {0.0, 0.0};
            for (int a = 0; a < g.n; ++a)
                if (std::abs(kx[a]) > bx) return {0.0, 0.0};
            if (opt.zero_mean && mt == 0) {
                bool zero_x = true;
                for (int a = 0; a < g.n; ++a) zero_x = zero_x && kx[a] == 0;
                if (zero_x) return {0.0, 0.0};
            }
            return rng.gaussian_cplx(flat);
        },
        opt.real_valued, opt.unit_norm);
}

Field sample_rough(const GridSpec& g, std::uint64_t seed, std::uint64_t stream, double eps,
                   bool unit_norm) {
    CounterRng rng(seed, stream);
    const double expo = -(g.n + 2) / 2.0 - eps;
    return synthesize(
        g,
        [&](std::size_t flat, const std::array<int, 3>& kx, int mt) -> cplx {
            double xi2 = 0.0;
            for (int a = 0; a < g.n; ++a) {
                const double xi = 2.0 * M_PI * kx[a] / g.Lx;
                xi2 += xi * xi;
            }
            const double par = std::sqrt(xi2) + std::sqrt(std::abs(2.0 * M_PI * mt / g.Lt));
            if (par == 0.0) return {0.0, 0.0};
            const double mag = std::pow(par, expo);
            const double phi = 2.0 * M_PI * rng.uniform(flat);
            return mag * cplx{std::cos(phi), std::sin(phi)};
        },
        false, unit_norm);
}

Field mode_field(const GridSpec& g, const std::array<int, 3>& k, int m) {
    Field s(g, true);
    std::array<int, 3> bins{0, 0, 0};
    for (int a = 0; a < g.n; ++a) bins[a] = k[a] >= 0 ? k[a] : k[a] + g.Nx;
    const int bt = m >= 0 ? m : m + g.Nt;
    s.data[g.index(bins, bt)] = cplx{1.0, 0.0};
    to_physical(s);
    return s;
}

VectorField sample_smooth_vector(const GridSpec& g, std::uint64_t seed, std::uint64_t stream,
                                 const SamplerOptions& opt) {
    VectorField F(g);
    for (int a = 0; a < g.n; ++a)
        F[a] = sample_smooth(g, seed, hash_combine(stream, 0x5643544f52ull + a), opt);
    return F;
}

} // namespace katolab

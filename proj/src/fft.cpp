#include "katolab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace katolab {
namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// FFTW planning mutates global state, so creation is serialized. Plans are
// built with FFTW_ESTIMATE (no runtime measurement, reproducible choice) and
// FFTW_UNALIGNED so they may execute on any std::vector buffer.
PlanPair& plans_for(const GridSpec& g) {
    static std::map<std::tuple<int, int, int>, PlanPair> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(g.n, g.Nx, g.Nt);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    int dims[4];
    for (int a = 0; a < g.n; ++a) dims[a] = g.Nx;
    dims[g.n] = g.Nt;

    std::vector<cplx> scratch(g.points());
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair pp;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pp.fwd = fftw_plan_dft(g.n + 1, dims, buf, buf, FFTW_FORWARD, flags);
    pp.bwd = fftw_plan_dft(g.n + 1, dims, buf, buf, FFTW_BACKWARD, flags);
    return cache.emplace(key, pp).first->second;
}

} // namespace

void to_spectrum(Field& f) {
    if (f.spectral) throw std::logic_error("to_spectrum: field already spectral");
    PlanPair& pp = plans_for(f.grid);
    auto* buf = reinterpret_cast<fftw_complex*>(f.data.data());
    fftw_execute_dft(pp.fwd, buf, buf);
    const double scale = 1.0 / static_cast<double>(f.grid.points());
    for (auto& v : f.data) v *= scale;
    f.spectral = true;
}

void to_physical(Field& f) {
    if (!f.spectral) throw std::logic_error("to_physical: field already physical");
    PlanPair& pp = plans_for(f.grid);
    auto* buf = reinterpret_cast<fftw_complex*>(f.data.data());
    fftw_execute_dft(pp.bwd, buf, buf);
    f.spectral = false;
}

Field spectrum_of(const Field& f) {
    Field g = f;
    if (!g.spectral) to_spectrum(g);
    return g;
}

Field physical_of(const Field& f) {
    Field g = f;
    if (g.spectral) to_physical(g);
    return g;
}

} // namespace katolab

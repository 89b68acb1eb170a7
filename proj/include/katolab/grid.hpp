#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "katolab/common.hpp"

namespace katolab {

// Periodic space-time lattice [0,Lx)^n x [0,Lt) sampled on Nx^n x Nt points.
// Storage is row-major with coordinates ordered (x_1, ..., x_n, t), so the
// time index is contiguous. Frequencies use the signed integer convention
// k in [-N/2, N/2): bin i maps to k = i for i < N/2 and k = i - N otherwise.
struct GridSpec {
    int n = 2;
    int Nx = 16;
    int Nt = 32;
    double Lx = 1.0;
    double Lt = 1.0;

    static bool power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

    void validate() const {
        if (n < 1 || n > 3) throw std::invalid_argument("GridSpec: n must be 1, 2 or 3");
        if (!power_of_two(Nx) || Nx < 4) throw std::invalid_argument("GridSpec: Nx must be a power of two >= 4");
        if (!power_of_two(Nt) || Nt < 4) throw std::invalid_argument("GridSpec: Nt must be a power of two >= 4");
        if (!(Lx > 0.0) || !(Lt > 0.0)) throw std::invalid_argument("GridSpec: periods must be positive");
    }

    // set iff the time axis can keep up with parabolic cube refinement
    bool parabolic_dyadic() const { return Nt >= Nx; }

    std::size_t spatial_points() const {
        std::size_t p = 1;
        for (int a = 0; a < n; ++a) p *= static_cast<std::size_t>(Nx);
        return p;
    }
    std::size_t points() const { return spatial_points() * static_cast<std::size_t>(Nt); }

    double hx() const { return Lx / Nx; }
    double ht() const { return Lt / Nt; }
    double cell_volume() const { return std::pow(hx(), n) * ht(); }
    double volume() const { return std::pow(Lx, n) * Lt; }

    // flat index from spatial indices and a time index
    std::size_t index(const std::array<int, 3>& ix, int it) const {
        std::size_t p = 0;
        for (int a = 0; a < n; ++a) p = p * Nx + static_cast<std::size_t>(ix[a]);
        return p * Nt + static_cast<std::size_t>(it);
    }

    void decode(std::size_t flat, std::array<int, 3>& ix, int& it) const {
        it = static_cast<int>(flat % Nt);
        std::size_t p = flat / Nt;
        for (int a = n - 1; a >= 0; --a) {
            ix[a] = static_cast<int>(p % Nx);
            p /= Nx;
        }
    }

    static int signed_freq(int bin, int N) { return bin < N / 2 ? bin : bin - N; }

    double xi(int bin) const { return 2.0 * M_PI * signed_freq(bin, Nx) / Lx; }
    double tau(int bin) const { return 2.0 * M_PI * signed_freq(bin, Nt) / Lt; }

    bool operator==(const GridSpec& o) const {
        return n == o.n && Nx == o.Nx && Nt == o.Nt && Lx == o.Lx && Lt == o.Lt;
    }
};

// Complex scalar field on a GridSpec. "spectral" tags whether the buffer
// currently holds Fourier coefficients (same layout, bin-indexed) or point
// values; operators check the tag instead of guessing.
struct Field {
    GridSpec grid;
    std::vector<cplx> data;
    bool spectral = false;

    Field() = default;
    explicit Field(const GridSpec& g, bool spec = false)
        : grid(g), data(g.points(), cplx{0.0, 0.0}), spectral(spec) {}

    std::size_t size() const { return data.size(); }
    cplx& operator[](std::size_t i) { return data[i]; }
    const cplx& operator[](std::size_t i) const { return data[i]; }

    Field& operator+=(const Field& o) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
        return *this;
    }
    Field& operator*=(cplx a) {
        for (auto& v : data) v *= a;
        return *this;
    }
};

inline Field operator+(Field a, const Field& b) { a += b; return a; }
inline Field operator-(Field a, const Field& b) { a -= b; return a; }
inline Field operator*(cplx a, Field f) { f *= a; return f; }

inline void axpy(cplx a, const Field& x, Field& y) {
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

// n-component field (one Field per spatial direction)
struct VectorField {
    GridSpec grid;
    std::vector<Field> comp;

    VectorField() = default;
    explicit VectorField(const GridSpec& g, bool spec = false) : grid(g) {
        comp.reserve(g.n);
        for (int a = 0; a < g.n; ++a) comp.emplace_back(g, spec);
    }
    Field& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
    const Field& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }
};

} // namespace katolab

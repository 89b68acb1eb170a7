#include "katolab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "katolab/coefficients.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace katolab {
namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

double get_f64(std::istream& is) {
    double v = 0.0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void put_header(std::ostream& os, const GridSpec& g) {
    put_u32(os, static_cast<std::uint32_t>(g.n));
    put_u32(os, static_cast<std::uint32_t>(g.Nx));
    put_u32(os, static_cast<std::uint32_t>(g.Nt));
    put_f64(os, g.Lx);
    put_f64(os, g.Lt);
}

GridSpec get_header(std::istream& is) {
    GridSpec g;
    g.n = static_cast<int>(get_u32(is));
    g.Nx = static_cast<int>(get_u32(is));
    g.Nt = static_cast<int>(get_u32(is));
    g.Lx = get_f64(is);
    g.Lt = get_f64(is);
    if (!is) throw std::runtime_error("field header: truncated stream");
    g.validate();
    return g;
}

void put_cplx_block(std::ostream& os, const std::vector<cplx>& v) {
    for (const cplx& z : v) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
    }
}

void get_cplx_block(std::istream& is, std::vector<cplx>& v) {
    for (cplx& z : v) {
        const double re = get_f64(is);
        const double im = get_f64(is);
        z = {re, im};
    }
}

} // namespace

void write_field(std::ostream& os, const Field& f) {
    if (f.spectral) throw std::logic_error("write_field: serialize point values, not spectra");
    put_header(os, f.grid);
    put_cplx_block(os, f.data);
    if (!os) throw std::runtime_error("write_field: stream failure");
}

Field read_field(std::istream& is) {
    Field f(get_header(is));
    get_cplx_block(is, f.data);
    if (!is) throw std::runtime_error("read_field: truncated stream");
    return f;
}

void write_coefficients(std::ostream& os, const CoefficientField& c) {
    put_header(os, c.grid);
    put_cplx_block(os, c.S);
    for (double d : c.D) put_f64(os, d);
    if (!os) throw std::runtime_error("write_coefficients: stream failure");
}

CoefficientField read_coefficients(std::istream& is) {
    CoefficientField c(get_header(is));
    get_cplx_block(is, c.S);
    for (double& d : c.D) d = get_f64(is);
    if (!is) throw std::runtime_error("read_coefficients: truncated stream");
    return c;
}

void write_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field: cannot open " + path);
    write_field(os, f);
}

Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field: cannot open " + path);
    return read_field(is);
}

void write_coefficients(const std::string& path, const CoefficientField& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_coefficients: cannot open " + path);
    write_coefficients(os, c);
}

CoefficientField read_coefficients(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_coefficients: cannot open " + path);
    return read_coefficients(is);
}

} // namespace katolab

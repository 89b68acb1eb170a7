#pragma once

#include <iosfwd>
#include <string>

#include "katolab/grid.hpp"

namespace katolab {

struct CoefficientField;

// Binary field container, schema "field-v1": header of three little-endian
// uint32 (n, Nx, Nt) and two little-endian float64 (Lx, Lt), then one
// (re, im) float64 pair per point in storage order (x_1, ..., x_n, t).
// Round-trips are bit exact. Coefficient files ("coeff-v1") share the header
// and append an S block (n*n complex per point) and a D block (n*n real per
// point), both in the same point order.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

void write_coefficients(std::ostream& os, const CoefficientField& c);
CoefficientField read_coefficients(std::istream& is);
void write_coefficients(const std::string& path, const CoefficientField& c);
CoefficientField read_coefficients(const std::string& path);

} // namespace katolab

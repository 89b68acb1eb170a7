#pragma once

#include "katolab/grid.hpp"

namespace katolab {

// Full (n+1)-dimensional transforms between point values and Fourier
// coefficients, in place. Conventions:
//   forward:  f_hat(k) = (1/points) * sum_x f(x) exp(-i <k, x>)
//   backward: f(x)     = sum_k f_hat(k) exp(+i <k, x>)
// so a constant field has coefficient 1 at the zero bin and backward(forward)
// is the identity up to roundoff. Plans are created once per grid shape with
// timing-independent heuristics and reused; execution is thread-safe.
void to_spectrum(Field& f);
void to_physical(Field& f);

Field spectrum_of(const Field& f);
Field physical_of(const Field& f);

} // namespace katolab

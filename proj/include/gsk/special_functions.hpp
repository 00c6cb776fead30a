#pragma once

#include <array>
#include <cmath>

#include "gsk/common.hpp"

namespace gsk {

/// log Gamma(z) for complex z via the Lanczos approximation (g = 7, n = 9),
/// with reflection for Re z < 1/2. The result is a logarithm of Gamma(z),
/// not necessarily the branch continuous in z; only exp() of it is used.
inline cplx log_gamma(cplx z) {
  static constexpr std::array<double, 9> coeff = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  cplx series = coeff[0];
  for (std::size_t i = 1; i < coeff.size(); ++i) series += coeff[i] / (z + static_cast<double>(i));
  const cplx t = z + g + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

inline cplx gamma(cplx z) { return std::exp(log_gamma(z)); }

}  // namespace gsk

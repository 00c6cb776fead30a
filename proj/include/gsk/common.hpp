#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gsk {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

inline constexpr const char* version = "1.0.0";

enum class ErrorKind {
  config,   // bad parameters, cutoff too small, unsupported request
  domain,   // argument outside the analyticity strip or at a singularity
  numeric,  // singular systems, non-convergence, degenerate roots
  io,
};

/// Every failure raised by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

enum class Side { plus, minus };

inline int sign_of(Side s) { return s == Side::plus ? 1 : -1; }

/// Imaginary part of a - b reduced into (-pi, pi]; compares logs of
/// determinants that may sit on different sheets.
inline cplx log_difference(cplx a, cplx b) {
  cplx d = a - b;
  double im = std::remainder(d.imag(), 2.0 * pi);
  return {d.real(), im};
}

/// exp(z) - 1 without cancellation for small |z|.
inline cplx expm1(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

}  // namespace gsk

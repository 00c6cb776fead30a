#pragma once

// Analytic data of one generalized sine-kernel operator
//   gamma V(l, m) = sqrt(phi(l) phi(m)) / (2 pi i (l - m)) [e+(l) e-(m) - e-(l) e+(m)],
//   e+-(l) = exp(+-(i x l / 2 + g(l) / 2)),
// with phi = gamma F stored as one function, plus the built-in families.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gsk/common.hpp"
#include "gsk/special_functions.hpp"

namespace gsk {

/// One zero of 1 + phi produced by a closed-form generator. `series` labels
/// the family, `order` is the rank inside the family (0 = closest to the
/// real axis), `seed` the index of the pole it pairs with (-1 if none).
struct SeriesRoot {
  cplx value;
  int series = 0;
  int order = 0;
  int seed = -1;
};

struct GeneratedRoots {
  std::vector<SeriesRoot> plus;
  std::vector<SeriesRoot> minus;
  std::vector<std::string> warnings;
};

using ComplexFn = std::function<cplx(cplx)>;

struct GskKernel {
  std::string label;
  ComplexFn phi;
  ComplexFn phi_prime;
  ComplexFn g;
  ComplexFn g_prime;
  bool g_is_zero = true;
  double a = 1.0;                  // strip half-width
  double nu_halfwidth = 1.0;       // no zero or pole of 1 + phi for |Im| below this
  std::vector<cplx> poles_plus;    // Im > 0, ordered by |Im|
  std::vector<cplx> poles_minus;   // Im < 0, ordered by |Im|
  bool phi_real_on_axis = false;
  bool phi_even = false;
  // Optional closed forms. `closed_form_roots(n)` yields n roots per series
  // (fewer, with a warning, if the series runs out inside the strip).
  std::function<GeneratedRoots(int)> closed_form_roots;
  ComplexFn closed_form_alpha_minus;  // alpha_- on R, continued below
  ComplexFn closed_form_alpha_plus;   // alpha_+ on R, continued above
};

inline void check_in_strip(const GskKernel& k, cplx lambda, const char* who) {
  if (!(std::abs(lambda.imag()) < k.a)) {
    std::ostringstream os;
    os << who << ": point " << lambda << " outside the strip |Im| < " << k.a;
    fail(ErrorKind::domain, os.str());
  }
}

inline void check_not_pole(const GskKernel& k, cplx lambda, const char* who) {
  auto near = [&](const std::vector<cplx>& poles) {
    return std::any_of(poles.begin(), poles.end(), [&](cplx p) {
      return std::abs(p - lambda) <= 1e-12 * (1.0 + std::abs(p));
    });
  };
  if (near(k.poles_plus) || near(k.poles_minus)) {
    std::ostringstream os;
    os << who << ": evaluation at the pole " << lambda;
    fail(ErrorKind::domain, os.str());
  }
}

/// e+-(lambda) = exp(+-(i x lambda + g(lambda)) / 2).
inline cplx e_pm(const GskKernel& k, double x, cplx lambda, Side side) {
  check_in_strip(k, lambda, "e_pm");
  const cplx u = 0.5 * (I * x * lambda + (k.g_is_zero ? cplx{} : k.g(lambda)));
  return side == Side::plus ? std::exp(u) : std::exp(-u);
}

/// e+-^2 without the strip check; used at roots, where only the decaying
/// combination is ever requested.
inline cplx e_pm_squared(const GskKernel& k, double x, cplx lambda, Side side) {
  const cplx u = I * x * lambda + (k.g_is_zero ? cplx{} : k.g(lambda));
  return side == Side::plus ? std::exp(u) : std::exp(-u);
}

namespace detail {

inline cplx sinhc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0);
  }
  return std::sinh(z) / z;
}

}  // namespace detail

/// [e+(l) e-(m) - e-(l) e+(m)] / (l - m); at l == m the limit is i x + g'(l). Written as 2 sinh(du) / (l - m) so the near-diagonal is
/// accurate and the value is bitwise symmetric in its arguments.
inline cplx bracket_quotient(const GskKernel& k, double x, cplx lambda, cplx mu) {
  const cplx d = lambda - mu;
  cplx slope;  // (u(lambda) - u(mu)) / d with u = i x l / 2 + g / 2
  cplx du;
  if (k.g_is_zero) {
    slope = 0.5 * I * x;
    du = slope * d;
  } else {
    const cplx dg = k.g(lambda) - k.g(mu);
    du = 0.5 * (I * x * d + dg);
    const cplx ratio = std::abs(d) > 1e-6 ? dg / d : k.g_prime(0.5 * (lambda + mu));
    slope = 0.5 * (I * x + ratio);
  }
  return 2.0 * detail::sinhc(du) * slope;
}

/// gamma V(lambda, mu); at lambda == mu the limit phi (x - i g') / (2 pi).
inline cplx kernel_value(const GskKernel& k, double x, cplx lambda, cplx mu) {
  check_in_strip(k, lambda, "kernel_value");
  check_in_strip(k, mu, "kernel_value");
  check_not_pole(k, lambda, "kernel_value");
  check_not_pole(k, mu, "kernel_value");
  const cplx amp = std::sqrt(k.phi(lambda)) * std::sqrt(k.phi(mu));
  return amp / (2.0 * pi * I) * bracket_quotient(k, x, lambda, mu);
}

// ---------------------------------------------------------------------------
// Built-in kernels

/// sup over a uniform real grid of |phi| and the point where it is attained.
struct SupResult {
  double sup = 0.0;
  double argmax = 0.0;
};

inline SupResult sup_abs_phi(const GskKernel& k, double lo, double hi, int points) {
  SupResult r;
  for (int i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * i / (points - 1);
    const double v = std::abs(k.phi(t));
    if (v > r.sup) r = {v, t};
  }
  return r;
}

inline void require_admissible(const GskKernel& k, double lo, double hi, int points = 4001) {
  const SupResult s = sup_abs_phi(k, lo, hi, points);
  if (!(s.sup < 1.0)) {
    std::ostringstream os;
    os << k.label << ": not admissible, sup|phi| = " << s.sup << " >= 1 at lambda = " << s.argmax;
    fail(ErrorKind::config, os.str());
  }
}

namespace detail {

inline std::vector<cplx> sorted_by_abs_imag(std::vector<cplx> v) {
  std::stable_sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.real() < b.real();
  });
  return v;
}

/// Root of w in the upper (upper = true) or lower half-plane.
inline cplx sqrt_in_half_plane(cplx w, bool upper) {
  cplx r = std::sqrt(w);
  if ((r.imag() > 0) != upper) r = -r;
  return r;
}

}  // namespace detail

/// Impenetrable bosons at temperature T and chemical potential h:
///   phi(l) = (e^beta - 1) / (e^{(l^2 - h)/T} + 1),  g = 0.
/// `pole_count` poles per series are retained (four series, one per quadrant).
inline GskKernel boson_kernel(double h, double T, cplx beta, int pole_count = 8) {
  if (!(T > 0.0)) fail(ErrorKind::config, "boson_kernel: temperature must be positive");
  if (pole_count < 1) fail(ErrorKind::config, "boson_kernel: pole_count must be >= 1");
  const cplx c = std::exp(beta) - 1.0;
  GskKernel k;
  {
    std::ostringstream os;
    os << "boson(h=" << h << ",T=" << T << ",beta=" << beta << ")";
    k.label = os.str();
  }
  k.phi = [=](cplx l) -> cplx {
    const cplx s = (l * l - h) / T;
    if (s.real() > 0.0) {
      if (s.real() > 700.0) return 0.0;
      const cplx e = std::exp(-s);
      return c * e / (1.0 + e);
    }
    return c / (std::exp(s) + 1.0);
  };
  k.phi_prime = [=](cplx l) -> cplx {
    const cplx s = (l * l - h) / T;
    if (s.real() > 700.0) return 0.0;
    const cplx e = s.real() > 0.0 ? std::exp(-s) : std::exp(s);
    // e^s / (e^s + 1)^2 is symmetric under s -> -s
    return -c * (2.0 * l / T) * e / ((1.0 + e) * (1.0 + e));
  };
  k.g = [](cplx) { return cplx{}; };
  k.g_prime = [](cplx) { return cplx{}; };
  k.g_is_zero = true;
  k.phi_real_on_axis = beta.imag() == 0.0;
  k.phi_even = true;

  // e^{(l^2-h)/T} = -1 at poles, = -e^beta at roots.
  auto pole_w = [=](int j) { return cplx(h, pi * T * (2 * j + 1)); };
  auto root_w = [=](int j) { return h + beta * T + I * (pi * T * (2 * j + 1)); };

  std::vector<cplx> up, down;
  for (int j = 0; j < pole_count; ++j) {
    for (int jj : {j, -1 - j}) {
      const cplx w = pole_w(jj);
      up.push_back(detail::sqrt_in_half_plane(w, true));
      down.push_back(detail::sqrt_in_half_plane(w, false));
    }
  }
  k.poles_plus = detail::sorted_by_abs_imag(up);
  k.poles_minus = detail::sorted_by_abs_imag(down);

  auto max_abs_im = [&](int j) {
    double m = 0.0;
    for (int jj : {j, -1 - j}) {
      for (cplx w : {pole_w(jj), root_w(jj)}) m = std::max(m, std::abs(std::sqrt(w).imag()));
    }
    return m;
  };
  auto min_abs_im = [&](int j) {
    double m = INFINITY;
    for (int jj : {j, -1 - j}) {
      for (cplx w : {pole_w(jj), root_w(jj)}) m = std::min(m, std::abs(std::sqrt(w).imag()));
    }
    return m;
  };
  k.a = 0.5 * (max_abs_im(pole_count - 1) + min_abs_im(pole_count));
  k.nu_halfwidth = min_abs_im(0);
  {
    const double reach = std::sqrt(std::abs(h) + 40.0 * T) + 1.0;
    require_admissible(k, -reach, reach);
  }

  const double strip = k.a;
  k.closed_form_roots = [=](int n) {
    GeneratedRoots out;
    if (c == cplx{}) {
      out.warnings.push_back("beta = 0: phi vanishes identically, 1 + phi has no zeros");
      return out;
    }
    for (int j = 0; j < n; ++j) {
      // series 1 from w_j, series 2 from w_{-1-j}; lower roots mirror the labels
      const cplx p1 = detail::sqrt_in_half_plane(root_w(j), true);
      const cplx p2 = detail::sqrt_in_half_plane(root_w(-1 - j), true);
      const cplx m1 = detail::sqrt_in_half_plane(root_w(-1 - j), false);
      const cplx m2 = detail::sqrt_in_half_plane(root_w(j), false);
      bool inside = true;
      for (cplx q : {p1, p2, m1, m2}) inside = inside && std::abs(q.imag()) < strip;
      if (!inside) {
        out.warnings.push_back("boson roots of order " + std::to_string(j) +
                               " leave the strip; series truncated");
        break;
      }
      out.plus.push_back({p1, 0, j, -1});
      out.plus.push_back({p2, 1, j, -1});
      out.minus.push_back({m1, 0, j, -1});
      out.minus.push_back({m2, 1, j, -1});
    }
    return out;
  };
  return k;
}

/// Fourier image of the XXZ normalization kernel:
///   phi(l) = sinh(l (pi/2 - zeta)) / sinh(l pi / 2),  g = 0,  0 < zeta < pi.
/// Poles at 2ik, k = 1..pole_count, minus those cancelled by the numerator.
inline GskKernel xxz_kernel(double zeta, int pole_count = 16) {
  if (!(zeta > 0.0 && zeta < pi)) {
    fail(ErrorKind::domain, "xxz_kernel: zeta must lie strictly inside (0, pi)");
  }
  if (pole_count < 1) fail(ErrorKind::config, "xxz_kernel: pole_count must be >= 1");
  const double b = pi / 2 - zeta;
  const double c = pi / 2;
  GskKernel k;
  {
    std::ostringstream os;
    os << "xxz(zeta=" << zeta << ")";
    k.label = os.str();
  }
  k.phi = [=](cplx l) -> cplx {
    if (b == 0.0) return 0.0;
    if (l == cplx{}) return b / c;
    if (l.real() < 0.0) l = -l;  // even
    if (l.real() * c > 300.0) {
      // e^{-zeta l} (1 - e^{-2 b l}) / (1 - e^{-2 c l})
      return std::exp(-zeta * l) * (-gsk::expm1(-2.0 * b * l)) / (-gsk::expm1(-2.0 * c * l));
    }
    return std::sinh(b * l) / std::sinh(c * l);
  };
  k.phi_prime = [=](cplx l) -> cplx {
    if (b == 0.0) return 0.0;
    double sgn = 1.0;
    if (l.real() < 0.0) {  // odd derivative of an even function
      l = -l;
      sgn = -1.0;
    }
    if (std::abs(l) < 1e-3) {
      const cplx l2 = l * l;
      const double b2 = b * b, c2 = c * c;
      const cplx log_deriv = (b2 - c2) * l / 3.0 - (b2 * b2 - c2 * c2) * l * l2 / 45.0 +
                             2.0 * (b2 * b2 * b2 - c2 * c2 * c2) * l * l2 * l2 / 945.0;
      return sgn * (b / c) * (1.0 + (b2 - c2) * l2 / 6.0) * log_deriv;
    }
    if (l.real() * c > 20.0) {
      auto coth = [](cplx z) { return (1.0 + std::exp(-2.0 * z)) / (1.0 - std::exp(-2.0 * z)); };
      const cplx f = std::exp(-zeta * l) * (-gsk::expm1(-2.0 * b * l)) / (-gsk::expm1(-2.0 * c * l));
      return sgn * f * (b * coth(b * l) - c * coth(c * l));
    }
    const cplx sb = std::sinh(b * l), sc = std::sinh(c * l);
    return sgn * (b * std::cosh(b * l) * sc - c * sb * std::cosh(c * l)) / (sc * sc);
  };
  k.g = [](cplx) { return cplx{}; };
  k.g_prime = [](cplx) { return cplx{}; };
  k.g_is_zero = true;
  k.phi_real_on_axis = true;
  k.phi_even = true;

  double first_pole = INFINITY;
  for (int m = 1; m <= pole_count; ++m) {
    // numerator sinh(2 i m b) = i sin(2 m b) cancels the pole when it vanishes
    if (std::abs(std::sin(2.0 * m * b)) < 1e-10) continue;
    k.poles_plus.emplace_back(0.0, 2.0 * m);
    k.poles_minus.emplace_back(0.0, -2.0 * m);
    first_pole = std::min(first_pole, 2.0 * m);
  }
  k.a = 2.0 * pole_count + 1.0;
  if (b == 0.0) {
    k.nu_halfwidth = 2.0;
  } else {
    k.nu_halfwidth = std::min({first_pole, 2.0 * pi / (pi - zeta), pi / zeta});
  }

  const double strip = k.a;
  k.closed_form_roots = [=](int n) {
    GeneratedRoots out;
    auto omitted = [](cplx q) { return std::abs(std::sinh(pi * q / 2.0)) < 1e-10; };
    auto generate = [&](int series, auto&& value_of) {
      int kept = 0;
      for (int j = 0; kept < n && j < n + 400; ++j) {
        const cplx q = value_of(j);
        if (omitted(q)) continue;
        if (!(q.imag() < strip)) {
          out.warnings.push_back("xxz series " + std::to_string(series + 1) +
                                 " leaves the strip after " + std::to_string(kept) + " roots");
          return;
        }
        bool duplicate = false;
        for (const auto& r : out.plus) {
          if (std::abs(r.value - q) < 1e-8 * (1.0 + std::abs(q))) duplicate = true;
        }
        if (duplicate) {
          out.warnings.push_back("xxz: coincident roots at " + std::to_string(q.imag()) +
                                 "i (double zero of 1 + phi); kept once");
          continue;
        }
        out.plus.push_back({q, series, kept, -1});
        out.minus.push_back({std::conj(q), series, kept, -1});
        ++kept;
      }
      if (kept < n) {
        out.warnings.push_back("xxz series " + std::to_string(series + 1) + " yielded only " +
                               std::to_string(kept) + " of " + std::to_string(n) + " roots");
      }
    };
    generate(0, [&](int j) { return cplx(0.0, 2.0 * pi * (j + 1) / (pi - zeta)); });
    generate(1, [&](int j) { return cplx(0.0, pi * (2 * j + 1) / zeta); });
    return out;
  };

  auto alpha_minus = [=](cplx l) -> cplx {
    const double zb = pi - zeta;
    const cplx log_val = 0.5 * std::log(2.0 * zb) - I * l * zeta / (2.0 * pi) * std::log(pi / zeta) -
                         I * l * zb / (2.0 * pi) * std::log(pi / zb) + log_gamma(1.0 + I * l / 2.0) -
                         log_gamma(0.5 + I * l * zeta / (2.0 * pi)) -
                         log_gamma(1.0 + I * l * zb / (2.0 * pi));
    return std::exp(log_val);
  };
  k.closed_form_alpha_minus = alpha_minus;
  k.closed_form_alpha_plus = [=](cplx l) { return 1.0 / alpha_minus(-l); };
  return k;
}

/// Pole-free control kernel phi(l) = gamma exp(-(l / width)^2), g = 0.
inline GskKernel entire_test_kernel(cplx gamma_value, double width) {
  if (!(std::abs(gamma_value) < 1.0)) {
    fail(ErrorKind::config, "entire_test_kernel: |gamma| must be < 1");
  }
  if (!(width > 0.0)) fail(ErrorKind::config, "entire_test_kernel: width must be positive");
  GskKernel k;
  {
    std::ostringstream os;
    os << "entire_test(gamma=" << gamma_value << ",width=" << width << ")";
    k.label = os.str();
  }
  k.phi = [=](cplx l) { return gamma_value * std::exp(-(l / width) * (l / width)); };
  k.phi_prime = [=](cplx l) {
    return -2.0 * l / (width * width) * gamma_value * std::exp(-(l / width) * (l / width));
  };
  k.g = [](cplx) { return cplx{}; };
  k.g_prime = [](cplx) { return cplx{}; };
  k.g_is_zero = true;
  k.phi_real_on_axis = gamma_value.imag() == 0.0;
  k.phi_even = true;
  // 1 + phi vanishes where (l / width)^2 = Log(-gamma) + 2 pi i m.
  double nearest = 3.0 * width;
  if (gamma_value != cplx{}) {
    for (int m = -4; m <= 4; ++m) {
      const cplx s2 = std::log(-gamma_value) + 2.0 * pi * I * static_cast<double>(m);
      nearest = std::min(nearest, width * std::abs(std::sqrt(s2).imag()));
    }
  }
  k.nu_halfwidth = nearest;
  k.a = nearest;
  k.closed_form_roots = [](int) { return GeneratedRoots{}; };
  return k;
}

/// Invariant checks shared by every kernel: pole placement, admissibility on
/// [-cutoff, cutoff], decay at the cutoff and the analytic derivative.
struct KernelCheck {
  double sup_phi = 0.0;
  double sup_argmax = 0.0;
  double tail = 0.0;
  double derivative_error = 0.0;
};

inline KernelCheck check_kernel(const GskKernel& k, double cutoff, double tail_tol) {
  for (cplx p : k.poles_plus) {
    if (!(p.imag() > 0.0 && p.imag() < k.a)) {
      fail(ErrorKind::config, k.label + ": upper pole outside (0, a)");
    }
  }
  for (cplx p : k.poles_minus) {
    if (!(p.imag() < 0.0 && -p.imag() < k.a)) {
      fail(ErrorKind::config, k.label + ": lower pole outside (-a, 0)");
    }
  }
  KernelCheck r;
  const SupResult s = sup_abs_phi(k, -cutoff, cutoff, 4001);
  r.sup_phi = s.sup;
  r.sup_argmax = s.argmax;
  if (!(s.sup < 1.0)) {
    std::ostringstream os;
    os << k.label << ": not admissible, sup|phi| = " << s.sup << " at lambda = " << s.argmax;
    fail(ErrorKind::config, os.str());
  }
  r.tail = std::max(std::abs(k.phi(-cutoff)), std::abs(k.phi(cutoff)));
  if (!(r.tail < tail_tol)) {
    std::ostringstream os;
    os << k.label << ": cutoff too small, |phi(+-" << cutoff << ")| = " << r.tail
       << " exceeds tail tolerance " << tail_tol;
    fail(ErrorKind::config, os.str());
  }
  const double step = 1e-5;
  for (int i = 0; i <= 40; ++i) {
    const double t = -cutoff + 2.0 * cutoff * i / 40.0;
    const cplx fd = (k.phi(t + step) - k.phi(t - step)) / (2.0 * step);
    r.derivative_error = std::max(r.derivative_error, std::abs(fd - k.phi_prime(t)));
  }
  if (!(r.derivative_error < 1e-6)) {
    fail(ErrorKind::config, k.label + ": phi_prime disagrees with central differences");
  }
  return r;
}

}  // namespace gsk

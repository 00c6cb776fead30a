#pragma once

// Scalar Riemann-Hilbert data of a kernel:
//   nu(l)    = -log(1 + phi(l)) / (2 pi i),   nu(+inf) = 0,
//   alpha(z) = exp( int nu(m) / (m - z) dm ),
// its boundary values alpha+- on R (alpha- = alpha+ (1 + phi)) and the
// moment alpha_1 = -int nu.

#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "gsk/common.hpp"
#include "gsk/kernels.hpp"
#include "gsk/quadrature.hpp"

namespace gsk {

namespace detail {

inline cplx one_plus_phi(const GskKernel& k, cplx l) {
  const cplx v = 1.0 + k.phi(l);
  if (std::abs(v) < 1e-300 || !std::isfinite(std::abs(v))) {
    std::ostringstream os;
    os << k.label << ": 1 + phi vanishes or diverges at " << l << " (log singularity of nu)";
    fail(ErrorKind::domain, os.str());
  }
  return v;
}

/// Shift log value v by multiples of 2 pi i to within pi of ref.
inline cplx align_branch(cplx v, cplx ref) {
  const double turns = std::round((ref.imag() - v.imag()) / (2.0 * pi));
  return v + I * (2.0 * pi * turns);
}

}  // namespace detail

/// nu on the principal branch of the logarithm. Under sup|phi| < 1 on R this
/// is the branch continuous along R with nu(+inf) = 0.
inline cplx nu(const GskKernel& k, cplx l) {
  return -std::log(detail::one_plus_phi(k, l)) / (2.0 * pi * I);
}

inline cplx nu_prime(const GskKernel& k, cplx l) {
  return -k.phi_prime(l) / (2.0 * pi * I * detail::one_plus_phi(k, l));
}

struct CauchyOptions {
  double tail_tol = 1e-12;
  // Test hook: computes nu with the wrong sign so the jump check must fail.
  bool inject_nu_sign_fault = false;
};

class CauchyData {
 public:
  static CauchyData build(GskKernel kernel, QuadratureRule rule, CauchyOptions options = {}) {
    CauchyData d;
    d.kernel_ = std::make_shared<const GskKernel>(std::move(kernel));
    d.rule_ = std::move(rule);
    d.inner_ = interlaced_rule(d.rule_);
    d.options_ = options;
    d.sign_ = options.inject_nu_sign_fault ? -1.0 : 1.0;

    // Unwrap log(1 + phi) right to left, starting from ~0 at the right cutoff.
    const std::size_t n = d.rule_.size();
    d.log_samples_.resize(n);
    cplx prev = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      cplx v = std::log(detail::one_plus_phi(*d.kernel_, d.rule_.nodes[i]));
      v = detail::align_branch(v, prev);
      d.log_samples_[i] = v;
      prev = v;
    }
    d.nu_.resize(n);
    d.dnu_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.nu_[i] = d.nu_from_log(d.log_samples_[i]);
      d.dnu_[i] = d.nu_prime_at(d.rule_.nodes[i]);
    }
    d.nu_inner_.resize(d.inner_.size());
    d.dnu_inner_.resize(d.inner_.size());
    for (std::size_t j = 0; j < d.inner_.size(); ++j) {
      d.nu_inner_[j] = d.nu_at(d.inner_.nodes[j]);
      d.dnu_inner_[j] = d.nu_prime_at(d.inner_.nodes[j]);
    }
    d.alpha1_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) d.alpha1_ -= d.rule_.weights[i] * d.nu_[i];

    d.double_integral_ = regularized_double_integral([&d](double t) { return d.nu_at(t); },
                                                     [&d](double t) { return d.nu_prime_at(t); },
                                                     d.rule_, options.tail_tol);
    d.g_moment_ = 0.0;
    if (!d.kernel_->g_is_zero) {
      for (std::size_t i = 0; i < n; ++i) {
        d.g_moment_ += d.rule_.weights[i] * d.kernel_->g_prime(d.rule_.nodes[i]) * d.nu_[i];
      }
    }
    return d;
  }

  [[nodiscard]] const GskKernel& kernel() const { return *kernel_; }
  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }
  [[nodiscard]] const CauchyOptions& options() const { return options_; }
  [[nodiscard]] std::span<const cplx> nu_samples() const { return nu_; }
  [[nodiscard]] std::span<const cplx> nu_prime_samples() const { return dnu_; }

  /// alpha_1 = -int nu.
  [[nodiscard]] cplx alpha1() const { return alpha1_; }
  /// int int nu(l) nu(m) / (l - m - i0)^2.
  [[nodiscard]] cplx double_integral() const { return double_integral_; }
  /// int g'(l) nu(l) dl.
  [[nodiscard]] cplx g_moment() const { return g_moment_; }

  /// nu at a real point, on the branch of the nearest node.
  [[nodiscard]] cplx nu_at(double t) const {
    cplx v = std::log(detail::one_plus_phi(*kernel_, t));
    v = detail::align_branch(v, log_samples_[rule_.nearest(t)]);
    return nu_from_log(v);
  }

  [[nodiscard]] cplx nu_prime_at(double t) const { return sign_ * nu_prime(*kernel_, t); }

  /// nu continued off the axis along the vertical segment from Re z.
  [[nodiscard]] cplx nu_continued(cplx z) const {
    const double t = z.real();
    cplx v = std::log(detail::one_plus_phi(*kernel_, t));
    v = detail::align_branch(v, log_samples_[rule_.nearest(t)]);
    constexpr int steps = 32;
    for (int s = 1; s <= steps; ++s) {
      const cplx p(t, z.imag() * s / steps);
      v = detail::align_branch(std::log(detail::one_plus_phi(*kernel_, p)), v);
    }
    return nu_from_log(v);
  }

  /// log alpha(z) for z off the axis: the continuation of log alpha+ above R
  /// and of log alpha- below it.
  [[nodiscard]] cplx log_alpha_at(cplx z) const {
    const double y = std::abs(z.imag());
    if (!(y >= 1e-3 * kernel_->a)) {
      std::ostringstream os;
      os << "alpha_at: " << z << " is too close to the real axis; use alpha_pm";
      fail(ErrorKind::domain, os.str());
    }
    if (y < 0.5 * kernel_->nu_halfwidth) {
      // Subtract nu(z); the remaining integrand is analytic near R.
      const cplx nz = nu_continued(z);
      cplx acc = 0.0;
      for (std::size_t k = 0; k < rule_.size(); ++k) {
        acc += rule_.weights[k] * (nu_[k] - nz) / (rule_.nodes[k] - z);
      }
      return acc + nz * (std::log(rule_.hi - z) - std::log(rule_.lo - z));
    }
    cplx acc = 0.0;
    for (std::size_t k = 0; k < rule_.size(); ++k) {
      acc += rule_.weights[k] * nu_[k] / (rule_.nodes[k] - z);
    }
    return acc;
  }

  [[nodiscard]] cplx alpha_at(cplx z) const { return std::exp(log_alpha_at(z)); }

  /// PV int nu(m) / (m - t) dm.
  [[nodiscard]] cplx pv_nu(double t) const {
    require_inside(t);
    const cplx f = nu_at(t);
    if (collides_with_node(rule_, t)) return detail::pv_from_samples(inner_, nu_inner_, f, t);
    return detail::pv_from_samples(rule_, nu_, f, t);
  }

  /// log alpha+-(t) = PV int nu / (m - t) +- i pi nu(t).
  [[nodiscard]] cplx log_alpha_pm(double t, Side side) const {
    return pv_nu(t) + static_cast<double>(sign_of(side)) * I * pi * nu_at(t);
  }

  [[nodiscard]] cplx alpha_pm(double t, Side side) const { return std::exp(log_alpha_pm(t, side)); }

  /// d/dt log alpha+-(t) = PV int nu'(m) / (m - t) dm +- i pi nu'(t).
  [[nodiscard]] cplx log_alpha_pm_derivative(double t, Side side) const {
    require_inside(t);
    const cplx f = nu_prime_at(t);
    const cplx pv = collides_with_node(rule_, t) ? detail::pv_from_samples(inner_, dnu_inner_, f, t)
                                                 : detail::pv_from_samples(rule_, dnu_, f, t);
    return pv + static_cast<double>(sign_of(side)) * I * pi * f;
  }

 private:
  CauchyData() = default;

  [[nodiscard]] cplx nu_from_log(cplx log_value) const {
    return -sign_ * log_value / (2.0 * pi * I);
  }

  void require_inside(double t) const {
    if (!(t > rule_.lo && t < rule_.hi)) {
      std::ostringstream os;
      os << "alpha_pm: point " << t << " outside the quadrature domain (" << rule_.lo << ", "
         << rule_.hi << ")";
      fail(ErrorKind::domain, os.str());
    }
  }

  std::shared_ptr<const GskKernel> kernel_;
  QuadratureRule rule_;
  QuadratureRule inner_;
  CauchyOptions options_;
  double sign_ = 1.0;
  std::vector<cplx> log_samples_;
  std::vector<cplx> nu_, dnu_, nu_inner_, dnu_inner_;
  cplx alpha1_;
  cplx double_integral_;
  cplx g_moment_;
};

/// alpha(z) off the axis.
inline cplx alpha_at(const CauchyData& data, cplx z) { return data.alpha_at(z); }

/// Boundary value alpha+ (side = plus) or alpha- on R.
inline cplx alpha_pm(const CauchyData& data, double t, Side side) { return data.alpha_pm(t, side); }

inline cplx alpha1(const CauchyData& data) { return data.alpha1(); }

}  // namespace gsk

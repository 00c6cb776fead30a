#pragma once

// Composite Gauss-Legendre rules on a truncated real line, principal-value
// integrals by singularity subtraction, and the regularized double integral
// (lambda - mu - i0)^-2 evaluated by parts.

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "gsk/common.hpp"

namespace gsk {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 0.0;
  int panels = 0;
  int order = 0;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  [[nodiscard]] double cutoff() const { return std::max(std::abs(lo), std::abs(hi)); }

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }

  /// Index of the node closest to t.
  [[nodiscard]] std::size_t nearest(double t) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    if (it == nodes.begin()) return 0;
    if (it == nodes.end()) return nodes.size() - 1;
    auto prev = it - 1;
    return (t - *prev <= *it - t) ? static_cast<std::size_t>(prev - nodes.begin())
                                  : static_cast<std::size_t>(it - nodes.begin());
  }
};

/// Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1],
/// nodes ascending. Newton iteration on the three-term recurrence.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1 || order > 512) {
    fail(ErrorKind::config, "gauss_legendre: order must lie in [1, 512], got " +
                                std::to_string(order));
  }
  const int n = order;
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Refresh the derivative at the converged node.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {std::move(x), std::move(w)};
}

/// `panels` equal Gauss-Legendre panels of the given order on [lo, hi].
inline QuadratureRule composite_rule(double lo, double hi, int panels, int order) {
  if (!(hi > lo)) fail(ErrorKind::config, "composite_rule: need lo < hi");
  if (panels < 1) fail(ErrorKind::config, "composite_rule: panels must be >= 1");
  auto [x, w] = gauss_legendre(order);
  QuadratureRule rule;
  rule.lo = lo;
  rule.hi = hi;
  rule.panels = panels;
  rule.order = order;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
  rule.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    const double b = (p + 1 == panels) ? hi : a + width;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int k = 0; k < order; ++k) {
      rule.nodes.push_back(mid + half * x[k]);
      rule.weights.push_back(half * w[k]);
    }
  }
  return rule;
}

/// Composite rule on [-cutoff, cutoff].
inline QuadratureRule truncated_line_rule(double cutoff, int panels, int order) {
  if (!(cutoff > 0.0)) fail(ErrorKind::config, "truncated_line_rule: cutoff must be positive");
  return composite_rule(-cutoff, cutoff, panels, order);
}

/// Same panels, one more node per panel. Its nodes interlace strictly with
/// the parent's, so no node of one coincides with a node of the other.
inline QuadratureRule interlaced_rule(const QuadratureRule& rule) {
  return composite_rule(rule.lo, rule.hi, rule.panels, rule.order + 1);
}

inline constexpr double pv_collision_tol = 1e-10;

[[nodiscard]] inline bool collides_with_node(const QuadratureRule& rule, double t) {
  if (rule.nodes.empty()) return false;
  return std::abs(rule.nodes[rule.nearest(t)] - t) < pv_collision_tol;
}

namespace detail {

/// PV of f(mu)/(mu - t) over the rule's domain from samples of f on its nodes.
inline cplx pv_from_samples(const QuadratureRule& rule, std::span<const cplx> samples, cplx f_at_t,
                            double t) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    acc += rule.weights[k] * (samples[k] - f_at_t) / (rule.nodes[k] - t);
  }
  return acc + f_at_t * std::log((rule.hi - t) / (t - rule.lo));
}

}  // namespace detail

/// PV integral of f(mu)/(mu - t) over the rule's domain. When t sits on a
/// node the integral is recomputed on the interlaced rule.
template <class F>
cplx pv_line_integral(F&& f, double t, const QuadratureRule& rule) {
  if (!(t > rule.lo && t < rule.hi)) {
    std::ostringstream os;
    os << "pv_line_integral: pole " << t << " outside (" << rule.lo << ", " << rule.hi << ")";
    fail(ErrorKind::domain, os.str());
  }
  const QuadratureRule* use = &rule;
  QuadratureRule shifted;
  if (collides_with_node(rule, t)) {
    shifted = interlaced_rule(rule);
    use = &shifted;
  }
  std::vector<cplx> samples(use->nodes.size());
  for (std::size_t k = 0; k < samples.size(); ++k) samples[k] = cplx(f(use->nodes[k]));
  return detail::pv_from_samples(*use, samples, cplx(f(t)), t);
}

/// Integral of nu(l) nu(m) / (l - m - i0)^2 over the square, evaluated as
///   PV int int nu'(l) nu(m) / (l - m) + i pi int nu' nu.
/// The boundary term of the integration by parts is dropped, so nu must be
/// negligible at both cutoffs.
template <class Nu, class NuPrime>
cplx regularized_double_integral(Nu&& nu, NuPrime&& nu_prime, const QuadratureRule& rule,
                                 double tail_tol = 1e-12) {
  const cplx left = nu(rule.lo);
  const cplx right = nu(rule.hi);
  for (auto [where, value] : {std::pair{rule.lo, left}, std::pair{rule.hi, right}}) {
    if (std::abs(value) >= tail_tol) {
      std::ostringstream os;
      os.precision(6);
      os << "cutoff too small: |nu(" << where << ")| = " << std::abs(value)
         << " exceeds tail tolerance " << tail_tol;
      fail(ErrorKind::config, os.str());
    }
  }
  const QuadratureRule inner = interlaced_rule(rule);
  std::vector<cplx> dnu_inner(inner.size());
  for (std::size_t j = 0; j < inner.size(); ++j) dnu_inner[j] = nu_prime(inner.nodes[j]);

  cplx pv_part = 0.0;
  cplx jump_part = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double m = rule.nodes[i];
    const cplx nu_m = nu(m);
    const cplx dnu_m = nu_prime(m);
    pv_part += rule.weights[i] * nu_m * detail::pv_from_samples(inner, dnu_inner, dnu_m, m);
    jump_part += rule.weights[i] * dnu_m * nu_m;
  }
  return pv_part + I * pi * jump_part;
}

}  // namespace gsk

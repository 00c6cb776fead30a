#pragma once

// Zeros q+-_j of 1 + phi inside the strip, paired with the poles they sit
// next to, and the decay exponent of the truncation remainder.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gsk/common.hpp"
#include "gsk/kernels.hpp"

namespace gsk {

struct Root {
  cplx value;
  int series = 0;
  int order = 0;  // rank inside its series, 0 closest to the real axis
  int seed = -1;  // index into the kernel's pole list of the same half-plane
};

struct RootFailure {
  int seed_index = -1;
  cplx seed;
  std::string reason;
};

struct RootSet {
  std::vector<Root> plus;   // Im > 0
  std::vector<Root> minus;  // Im < 0
  double residual_tol = 1e-10;
  std::vector<std::string> warnings;
  std::vector<RootFailure> failures;

  [[nodiscard]] std::size_t n_plus() const { return plus.size(); }
  [[nodiscard]] std::size_t n_minus() const { return minus.size(); }

  [[nodiscard]] std::vector<cplx> plus_values() const {
    std::vector<cplx> v;
    for (const auto& r : plus) v.push_back(r.value);
    return v;
  }
  [[nodiscard]] std::vector<cplx> minus_values() const {
    std::vector<cplx> v;
    for (const auto& r : minus) v.push_back(r.value);
    return v;
  }

  /// The roots of order < n in every series.
  [[nodiscard]] RootSet retained(int n) const {
    RootSet out;
    out.residual_tol = residual_tol;
    out.warnings = warnings;
    out.failures = failures;
    for (const auto& r : plus) {
      if (r.order < n) out.plus.push_back(r);
    }
    for (const auto& r : minus) {
      if (r.order < n) out.minus.push_back(r);
    }
    return out;
  }
};

namespace detail {

inline void sort_roots(std::vector<Root>& v) {
  std::stable_sort(v.begin(), v.end(), [](const Root& a, const Root& b) {
    if (a.order != b.order) return a.order < b.order;
    return a.series < b.series;
  });
}

/// Greedy nearest-unused-pole pairing, closest roots first.
inline void pair_with_poles(std::vector<Root>& roots, const std::vector<cplx>& poles,
                            std::vector<std::string>& warnings) {
  std::vector<bool> used(poles.size(), false);
  std::vector<std::size_t> idx(roots.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(roots[a].value.imag()) < std::abs(roots[b].value.imag());
  });
  for (std::size_t i : idx) {
    double best = std::numeric_limits<double>::infinity();
    int pick = -1;
    for (std::size_t p = 0; p < poles.size(); ++p) {
      if (used[p]) continue;
      const double d = std::abs(poles[p] - roots[i].value);
      if (d < best) {
        best = d;
        pick = static_cast<int>(p);
      }
    }
    if (pick < 0) {
      std::ostringstream os;
      os << "root " << roots[i].value << " has no unpaired pole";
      warnings.push_back(os.str());
      continue;
    }
    used[static_cast<std::size_t>(pick)] = true;
    roots[i].seed = pick;
  }
}

inline void require_residuals(const GskKernel& k, const std::vector<Root>& roots, double tol) {
  for (const auto& r : roots) {
    const double res = std::abs(1.0 + k.phi(r.value));
    if (!(res < tol)) {
      std::ostringstream os;
      os << k.label << ": |1 + phi(" << r.value << ")| = " << res << " exceeds " << tol;
      fail(ErrorKind::numeric, os.str());
    }
  }
}

}  // namespace detail

/// Roots from the kernel's closed-form generator, n per series.
inline RootSet closed_form_roots(const GskKernel& k, int n, double residual_tol = 1e-10) {
  if (n < 0) fail(ErrorKind::config, "closed_form_roots: N must be >= 0");
  if (!k.closed_form_roots) {
    fail(ErrorKind::config, k.label + ": no closed-form root generator");
  }
  const GeneratedRoots gen = k.closed_form_roots(n);
  RootSet out;
  out.residual_tol = residual_tol;
  out.warnings = gen.warnings;
  for (const auto& r : gen.plus) out.plus.push_back({r.value, r.series, r.order, r.seed});
  for (const auto& r : gen.minus) out.minus.push_back({r.value, r.series, r.order, r.seed});
  detail::sort_roots(out.plus);
  detail::sort_roots(out.minus);
  detail::require_residuals(k, out.plus, residual_tol);
  detail::require_residuals(k, out.minus, residual_tol);
  detail::pair_with_poles(out.plus, k.poles_plus, out.warnings);
  detail::pair_with_poles(out.minus, k.poles_minus, out.warnings);
  return out;
}

/// Newton iteration on 1 + phi started next to each seed. Near a pole the
/// step is taken on the equivalent 1 + 1/phi, which is regular there.
inline RootSet newton_roots(const GskKernel& k, std::span<const cplx> seeds, double tol = 1e-13,
                            double residual_tol = 1e-10) {
  RootSet out;
  out.residual_tol = residual_tol;
  std::vector<Root> up, down;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const cplx seed = seeds[s];
    // nudge off the pole, toward the real axis
    cplx z = seed - I * (seed.imag() > 0 ? 1.0 : -1.0) * 1e-7 * (1.0 + std::abs(seed));
    bool converged = false;
    int iter = 0;
    for (; iter < 100; ++iter) {
      const cplx f = k.phi(z);
      const cplx fp = k.phi_prime(z);
      if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(fp)) || fp == cplx{}) break;
      const cplx step = std::abs(f) > 1.0 ? -f * (1.0 + f) / fp : (1.0 + f) / fp;
      z -= step;
      if (std::abs(step) < tol * (1.0 + std::abs(z))) {
        converged = std::abs(1.0 + k.phi(z)) < residual_tol;
        break;
      }
    }
    std::ostringstream why;
    if (!converged) {
      why << "no convergence after " << iter << " iterations";
      out.failures.push_back({static_cast<int>(s), seed, why.str()});
      continue;
    }
    if (!(std::abs(z.imag()) < k.a) || z.imag() == 0.0) {
      why << "root " << z << " escaped the strip";
      out.failures.push_back({static_cast<int>(s), seed, why.str()});
      continue;
    }
    if (iter > 20) {
      std::ostringstream os;
      os << "slow Newton convergence from seed " << seed << " (" << iter
         << " iterations): possible multiple root";
      out.warnings.push_back(os.str());
    }
    auto& bucket = z.imag() > 0 ? up : down;
    const bool duplicate = std::any_of(bucket.begin(), bucket.end(), [&](const Root& r) {
      return std::abs(r.value - z) < 1e-8;
    });
    if (duplicate) {
      std::ostringstream os;
      os << "seed " << seed << " converged to an already found root " << z;
      out.failures.push_back({static_cast<int>(s), seed, os.str()});
      continue;
    }
    bucket.push_back({z, 0, 0, -1});
  }
  auto rank = [](std::vector<Root>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Root& a, const Root& b) {
      if (std::abs(a.value.imag()) != std::abs(b.value.imag())) {
        return std::abs(a.value.imag()) < std::abs(b.value.imag());
      }
      return a.value.real() < b.value.real();
    });
    for (std::size_t i = 0; i < v.size(); ++i) v[i].order = static_cast<int>(i);
  };
  rank(up);
  rank(down);
  out.plus = std::move(up);
  out.minus = std::move(down);
  detail::pair_with_poles(out.plus, k.poles_plus, out.warnings);
  detail::pair_with_poles(out.minus, k.poles_minus, out.warnings);
  return out;
}

/// Newton roots seeded from all of the kernel's poles.
inline RootSet newton_roots(const GskKernel& k, double tol = 1e-13, double residual_tol = 1e-10) {
  std::vector<cplx> seeds = k.poles_plus;
  seeds.insert(seeds.end(), k.poles_minus.begin(), k.poles_minus.end());
  return newton_roots(k, seeds, tol, residual_tol);
}

/// a = min over series pairs of Im(q+_{n, i} - q-_{0, i'}): the gap between
/// the first dropped upper root and the closest lower root. Needs roots of
/// order n in every upper series.
inline double remainder_scale(const RootSet& roots, int n) {
  if (n < 0) fail(ErrorKind::config, "remainder_scale: N must be >= 0");
  std::map<int, double> dropped;    // series -> Im q+_{n}
  std::map<int, double> closest;    // series -> Im q-_{0}
  std::map<int, bool> series_seen;
  for (const auto& r : roots.plus) {
    series_seen[r.series] = true;
    if (r.order == n) dropped[r.series] = r.value.imag();
  }
  for (const auto& r : roots.minus) {
    if (r.order == 0) closest[r.series] = r.value.imag();
  }
  if (series_seen.empty() || closest.empty()) {
    fail(ErrorKind::config, "remainder_scale: root set is empty");
  }
  for (const auto& [series, seen] : series_seen) {
    if (!dropped.count(series)) {
      fail(ErrorKind::config, "remainder_scale: series " + std::to_string(series + 1) +
                                  " has no root of order " + std::to_string(n) +
                                  "; generate at least N + 1 roots per series");
    }
  }
  double a = std::numeric_limits<double>::infinity();
  for (const auto& [s1, im_plus] : dropped) {
    for (const auto& [s2, im_minus] : closest) a = std::min(a, im_plus - im_minus);
  }
  return a;
}

/// min over both half-planes of |Im q_{n, i}|: the distance from the real
/// axis to the first dropped root. Sets the decay of the f+- and resolvent
/// remainders, which is slower than the determinant's.
inline double first_dropped_distance(const RootSet& roots, int n) {
  if (n < 0) fail(ErrorKind::config, "first_dropped_distance: N must be >= 0");
  double b = std::numeric_limits<double>::infinity();
  for (const auto* half : {&roots.plus, &roots.minus}) {
    for (const auto& r : *half) {
      if (r.order == n) b = std::min(b, std::abs(r.value.imag()));
    }
  }
  if (!std::isfinite(b)) {
    fail(ErrorKind::config, "first_dropped_distance: no root of order " + std::to_string(n) +
                                "; generate at least N + 1 roots per series");
  }
  return b;
}

/// Throws unless every RootSet invariant holds for this kernel.
inline void validate_roots(const GskKernel& k, const RootSet& roots) {
  detail::require_residuals(k, roots.plus, roots.residual_tol);
  detail::require_residuals(k, roots.minus, roots.residual_tol);
  for (const auto& r : roots.plus) {
    if (!(r.value.imag() > 0.0 && r.value.imag() < k.a)) {
      fail(ErrorKind::numeric, "validate_roots: upper root outside (0, a)");
    }
  }
  for (const auto& r : roots.minus) {
    if (!(r.value.imag() < 0.0 && -r.value.imag() < k.a)) {
      fail(ErrorKind::numeric, "validate_roots: lower root outside (-a, 0)");
    }
  }
  std::vector<cplx> all = roots.plus_values();
  const auto lower = roots.minus_values();
  all.insert(all.end(), lower.begin(), lower.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (!(std::abs(all[i] - all[j]) > 1e-8)) {
        fail(ErrorKind::numeric, "validate_roots: coincident roots");
      }
    }
  }
  auto bijective = [](const std::vector<Root>& v) {
    std::vector<int> seeds;
    for (const auto& r : v) {
      if (r.seed < 0) return false;
      seeds.push_back(r.seed);
    }
    std::sort(seeds.begin(), seeds.end());
    return std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end();
  };
  if (!bijective(roots.plus) || !bijective(roots.minus)) {
    fail(ErrorKind::numeric, "validate_roots: root-to-pole pairing is not a bijection");
  }
}

}  // namespace gsk

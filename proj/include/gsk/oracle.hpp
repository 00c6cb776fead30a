#pragma once

// Reference values by direct discretization: Nystrom on the truncated line
// for I + gamma V, and on [-x/2, x/2] for the XXZ Wiener-Hopf operator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "gsk/common.hpp"
#include "gsk/kernels.hpp"
#include "gsk/linalg.hpp"
#include "gsk/quadrature.hpp"

namespace gsk {

struct DiscretizedOperator {
  QuadratureRule rule;
  double x = 0.0;
  Matrix matrix;                 // delta_ij + sqrt(w_i w_j) gamma V(l_i, l_j)
  std::vector<cplx> amplitude;   // sqrt(w_i) sqrt(phi(l_i))
};

/// Smallest node count the oscillation guard accepts.
inline std::size_t nyquist_nodes(double x, double cutoff) {
  return static_cast<std::size_t>(std::ceil(4.0 * x * cutoff / (2.0 * pi)));
}

inline void require_nyquist(double x, const QuadratureRule& rule) {
  const std::size_t need = nyquist_nodes(x, rule.cutoff());
  if (rule.size() < need) {
    std::ostringstream os;
    os << "quadrature under-resolves the kernel oscillation at x = " << x << ": " << rule.size()
       << " nodes, need at least " << need;
    fail(ErrorKind::config, os.str());
  }
}

inline DiscretizedOperator discretize(const GskKernel& k, double x, const QuadratureRule& rule) {
  require_nyquist(x, rule);
  DiscretizedOperator op;
  op.rule = rule;
  op.x = x;
  const auto n = static_cast<Eigen::Index>(rule.size());
  op.amplitude.resize(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    check_not_pole(k, rule.nodes[i], "discretize");
    op.amplitude[i] = std::sqrt(rule.weights[i]) * std::sqrt(k.phi(rule.nodes[i]));
  }
  op.matrix.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      const cplx v = op.amplitude[si] * op.amplitude[sj] / (2.0 * pi * I) *
                     bracket_quotient(k, x, rule.nodes[si], rule.nodes[sj]);
      op.matrix(i, j) = v;
      op.matrix(j, i) = v;
    }
    op.matrix(j, j) += 1.0;
  }
  return op;
}

/// int gamma V(l, l) dl over the rule.
inline cplx trace_V(const GskKernel& k, double x, const QuadratureRule& rule) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    acc += rule.weights[i] * k.phi(t) * bracket_quotient(k, x, t, t) / (2.0 * pi * I);
  }
  return acc;
}

struct NystromResult {
  cplx logdet;
  double error_estimate = 0.0;  // |fine - coarse| + tail bound
  double growth_factor = 1.0;
  std::size_t nodes = 0;
};

namespace detail {

inline QuadratureRule coarsened(const QuadratureRule& rule) {
  return composite_rule(rule.lo, rule.hi, std::max(1, rule.panels / 2), rule.order);
}

inline double tail_bound(const GskKernel& k, double x, const QuadratureRule& rule) {
  const double tail = std::max(std::abs(k.phi(rule.lo)), std::abs(k.phi(rule.hi)));
  return x / (2.0 * pi) * tail;
}

}  // namespace detail

/// log det(I + gamma V) on the rule. With `estimate` the same determinant is
/// recomputed with half the panels and the difference reported.
inline NystromResult nystrom_logdet(const GskKernel& k, double x, const QuadratureRule& rule,
                                    bool estimate = true) {
  const DiscretizedOperator op = discretize(k, x, rule);
  const LogDet ld = logdet_lu(op.matrix);
  NystromResult r;
  r.logdet = ld.value;
  r.growth_factor = ld.growth_factor;
  r.nodes = rule.size();
  r.error_estimate = detail::tail_bound(k, x, rule);
  if (estimate && rule.panels > 1) {
    const QuadratureRule coarse = detail::coarsened(rule);
    if (coarse.size() >= nyquist_nodes(x, coarse.cutoff())) {
      const LogDet c = logdet_lu(discretize(k, x, coarse).matrix);
      r.error_estimate += std::abs(log_difference(ld.value, c.value));
    }
  }
  return r;
}

/// Determinant, resolvent and exact x-derivative of one discretization.
struct NystromSolution {
  QuadratureRule rule;
  double x = 0.0;
  cplx logdet;
  cplx dlogdet_dx;  // tr(M^-1 dM/dx)
  Matrix resolvent;  // gamma R(l_i, l_j), weights stripped
};

inline NystromSolution nystrom_solve(const GskKernel& k, double x, const QuadratureRule& rule) {
  const DiscretizedOperator op = discretize(k, x, rule);
  const Eigen::PartialPivLU<Matrix> lu(op.matrix);
  NystromSolution s;
  s.rule = rule;
  s.x = x;
  s.logdet = detail::logdet_from_lu(lu, op.matrix.cwiseAbs().maxCoeff()).value;
  if (!(lu.rcond() > 1e-14)) {
    fail(ErrorKind::numeric, "nystrom_solve: I + gamma V is numerically singular");
  }
  const auto n = static_cast<Eigen::Index>(rule.size());
  const Matrix inv = lu.inverse();

  // dM/dx = a_i a_j (e+(l_i) e-(l_j) + e-(l_i) e+(l_j)) / (4 pi)
  std::vector<cplx> ep(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) ep[i] = e_pm(k, x, rule.nodes[i], Side::plus);
  cplx tr = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      const cplx dm = op.amplitude[si] * op.amplitude[sj] *
                      (ep[si] / ep[sj] + ep[sj] / ep[si]) / (4.0 * pi);
      tr += inv(j, i) * dm;
    }
  }
  s.dlogdet_dx = tr;

  // R_h = I - M^-1;  gamma R(l_i, l_j) = R_h(i, j) / sqrt(w_i w_j)
  s.resolvent = -inv;
  for (Eigen::Index i = 0; i < n; ++i) s.resolvent(i, i) += 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s.resolvent(i, j) /= std::sqrt(rule.weights[static_cast<std::size_t>(i)] *
                                     rule.weights[static_cast<std::size_t>(j)]);
    }
  }
  return s;
}

/// gamma R(l_i, l_j) on the rule's nodes.
inline Matrix nystrom_resolvent(const GskKernel& k, double x, const QuadratureRule& rule) {
  return nystrom_solve(k, x, rule).resolvent;
}

/// gamma R on an arbitrary grid by Nystrom interpolation of a solved
/// discretization:  R(l, m) = V(l, m) - sum_k w_k V(l, n_k) R(n_k, m).
inline Matrix nystrom_resolvent_on_grid(const GskKernel& k, const NystromSolution& s,
                                        std::span<const double> grid) {
  const QuadratureRule& rule = s.rule;
  const auto n = static_cast<Eigen::Index>(rule.size());
  const auto p = static_cast<Eigen::Index>(grid.size());
  Matrix v(p, n);    // V(g_i, n_l)
  Matrix vgn(p, n);  // V(g_i, n_l) w_l
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index l = 0; l < n; ++l) {
      v(i, l) = kernel_value(k, s.x, grid[static_cast<std::size_t>(i)],
                             rule.nodes[static_cast<std::size_t>(l)]);
      vgn(i, l) = v(i, l) * rule.weights[static_cast<std::size_t>(l)];
    }
  }
  // R(g_i, n_l), and R(n_l, g_j) by symmetry
  const Matrix rgn = v - vgn * s.resolvent;
  Matrix out = -vgn * rgn.transpose();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      out(i, j) += kernel_value(k, s.x, grid[static_cast<std::size_t>(i)],
                                grid[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

/// sup |R_h + K_h R_h - K_h| of a resolvent returned by nystrom_resolvent.
inline double resolvent_identity_residual(const GskKernel& k, double x, const QuadratureRule& rule,
                                          const Matrix& resolvent) {
  const DiscretizedOperator op = discretize(k, x, rule);
  const auto n = static_cast<Eigen::Index>(rule.size());
  Matrix kh = op.matrix - Matrix::Identity(n, n);
  Matrix rh = resolvent;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      rh(i, j) *= std::sqrt(rule.weights[static_cast<std::size_t>(i)] *
                            rule.weights[static_cast<std::size_t>(j)]);
    }
  }
  return (rh + kh * rh - kh).cwiseAbs().maxCoeff();
}

/// XXZ difference kernel K(t) = sin 2z / (2 pi sinh(t - iz) sinh(t + iz))
///                            = sin 2z / (2 pi (sinh^2 t + sin^2 z)).
inline double wiener_hopf_kernel(double zeta, double t) {
  const double s = std::sinh(t), z = std::sin(zeta);
  return std::sin(2.0 * zeta) / (2.0 * pi * (s * s + z * z));
}

/// log det(I + K) on [-x/2, x/2], Nystrom with `panels` x `order` nodes.
inline cplx wiener_hopf_logdet(double zeta, double x, int panels, int order) {
  if (!(zeta > 1e-8 && zeta < pi - 1e-8)) {
    fail(ErrorKind::domain, "wiener_hopf_logdet: zeta must lie strictly inside (0, pi)");
  }
  if (!(x >= 0.0)) fail(ErrorKind::config, "wiener_hopf_logdet: x must be >= 0");
  if (x == 0.0) return 0.0;
  const QuadratureRule rule = composite_rule(-0.5 * x, 0.5 * x, panels, order);
  const auto n = static_cast<Eigen::Index>(rule.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      m(i, j) = std::sqrt(rule.weights[si] * rule.weights[sj]) *
                wiener_hopf_kernel(zeta, rule.nodes[si] - rule.nodes[sj]);
    }
    m(i, i) += 1.0;
  }
  return logdet_lu(m).value;
}

}  // namespace gsk

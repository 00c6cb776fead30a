#pragma once

// Large-x formulas built from the Cauchy data and the retained roots:
// h+-, the matrices A+-, A = A- A+ and its partner A+ A-, the vectors C+-, D+-,
// the asymptotic f+- and resolvent, the leading functional and the two
// equivalent determinant formulas (LU of I - A and the sum over contours).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include "gsk/cauchy.hpp"
#include "gsk/common.hpp"
#include "gsk/kernels.hpp"
#include "gsk/linalg.hpp"
#include "gsk/roots.hpp"

namespace gsk {

/// x-independent data attached to the retained roots.
struct RootData {
  RootSet roots;
  std::vector<cplx> q_plus, q_minus;
  std::vector<cplx> alpha_plus, alpha_minus;        // alpha(q+), alpha(q-)
  std::vector<cplx> phi_prime_plus, phi_prime_minus;
  std::vector<cplx> h_plus, h_minus;

  [[nodiscard]] std::size_t n_plus() const { return q_plus.size(); }
  [[nodiscard]] std::size_t n_minus() const { return q_minus.size(); }
};

/// h+_k = -alpha(q+_k)^-2 / phi'(q+_k),  h-_k = -alpha(q-_k)^2 / phi'(q-_k).
inline RootData build_h(const CauchyData& data, const RootSet& roots) {
  const GskKernel& k = data.kernel();
  RootData r;
  r.roots = roots;
  r.q_plus = roots.plus_values();
  r.q_minus = roots.minus_values();
  auto degenerate = [&](cplx q, cplx dphi) {
    if (std::abs(dphi) < 1e-12 * (1.0 + std::abs(k.phi(q)))) {
      std::ostringstream os;
      os << k.label << ": phi'(q) = " << dphi << " at the root " << q
         << "; degenerate (multiple) root not supported";
      fail(ErrorKind::numeric, os.str());
    }
  };
  for (cplx q : r.q_plus) {
    const cplx a = data.alpha_at(q);
    const cplx dphi = k.phi_prime(q);
    degenerate(q, dphi);
    r.alpha_plus.push_back(a);
    r.phi_prime_plus.push_back(dphi);
    r.h_plus.push_back(-1.0 / (a * a * dphi));
  }
  for (cplx q : r.q_minus) {
    const cplx a = data.alpha_at(q);
    const cplx dphi = k.phi_prime(q);
    degenerate(q, dphi);
    r.alpha_minus.push_back(a);
    r.phi_prime_minus.push_back(dphi);
    r.h_minus.push_back(-a * a / dphi);
  }
  return r;
}

/// The leading functional on the real line:
///   -int (i x + g') nu + int int nu(l) nu(m) / (l - m - i0)^2.
inline cplx functional_A(const CauchyData& data, double x) {
  return I * x * data.alpha1() - data.g_moment() + data.double_integral();
}

struct AsymptoticModel {
  double x = 0.0;
  const CauchyData* data = nullptr;
  const RootData* root_data = nullptr;
  Vector e2_plus;   // e+^2(q+_k)
  Vector e2_minus;  // e-^2(q-_k)
  Matrix A_minus;   // N+ x N-
  Matrix A_plus;    // N- x N+
  Matrix A;         // N+ x N+
  Matrix A_tilde;   // N- x N-
  Vector C_plus, D_plus, C_minus, D_minus;
  cplx leading;
  LogDet logdet_correction;        // log det(I - A)
  LogDet logdet_correction_tilde;  // log det(I - A~)
  double residual_plus = 0.0;      // |(I - A) C+ - 1|_inf
  double residual_minus = 0.0;

  [[nodiscard]] const GskKernel& kernel() const { return data->kernel(); }
  [[nodiscard]] std::size_t n_plus() const { return static_cast<std::size_t>(e2_plus.size()); }
  [[nodiscard]] std::size_t n_minus() const { return static_cast<std::size_t>(e2_minus.size()); }
};

/// Fills A-, A+, A and A~ from the roots at the model's x.
inline void build_A_matrices(AsymptoticModel& m) {
  const RootData& r = *m.root_data;
  const GskKernel& k = m.kernel();
  const auto np = static_cast<Eigen::Index>(r.n_plus());
  const auto nm = static_cast<Eigen::Index>(r.n_minus());
  m.e2_plus.resize(np);
  m.e2_minus.resize(nm);
  for (Eigen::Index j = 0; j < np; ++j) m.e2_plus(j) = e_pm_squared(k, m.x, r.q_plus[j], Side::plus);
  for (Eigen::Index j = 0; j < nm; ++j) {
    m.e2_minus(j) = e_pm_squared(k, m.x, r.q_minus[j], Side::minus);
  }
  m.A_minus.resize(np, nm);
  m.A_plus.resize(nm, np);
  for (Eigen::Index j = 0; j < np; ++j) {
    for (Eigen::Index l = 0; l < nm; ++l) {
      m.A_minus(j, l) = r.h_minus[l] * m.e2_minus(l) / (r.q_plus[j] - r.q_minus[l]);
    }
  }
  for (Eigen::Index j = 0; j < nm; ++j) {
    for (Eigen::Index l = 0; l < np; ++l) {
      m.A_plus(j, l) = r.h_plus[l] * m.e2_plus(l) / (r.q_minus[j] - r.q_plus[l]);
    }
  }
  m.A = m.A_minus * m.A_plus;
  m.A_tilde = m.A_plus * m.A_minus;
}

/// (I - A) C+ = 1, D+ = A+ C+;  (I - A~) C- = 1, D- = A- C-.
inline void solve_CD(AsymptoticModel& m) {
  auto solve = [&](const Matrix& a, Vector& c, double& residual) {
    const Eigen::Index n = a.rows();
    if (n == 0) {
      c.resize(0);
      residual = 0.0;
      return;
    }
    const Matrix system = Matrix::Identity(n, n) - a;
    const Eigen::PartialPivLU<Matrix> lu(system);
    if (!(lu.rcond() > 1e-14)) {
      std::ostringstream os;
      os << "I - A is numerically singular at x = " << m.x
         << " (rcond " << lu.rcond() << "); use a larger x or a smaller N";
      fail(ErrorKind::numeric, os.str());
    }
    const Vector ones = Vector::Ones(n);
    c = lu.solve(ones);
    residual = (system * c - ones).cwiseAbs().maxCoeff();
  };
  solve(m.A, m.C_plus, m.residual_plus);
  solve(m.A_tilde, m.C_minus, m.residual_minus);
  m.D_plus = m.A_plus * m.C_plus;
  m.D_minus = m.A_minus * m.C_minus;
}

inline AsymptoticModel build_model(const CauchyData& data, const RootData& roots, double x) {
  if (!(x > 0.0)) fail(ErrorKind::config, "build_model: x must be positive");
  AsymptoticModel m;
  m.x = x;
  m.data = &data;
  m.root_data = &roots;
  build_A_matrices(m);
  solve_CD(m);
  m.leading = functional_A(data, x);
  const auto np = m.A.rows();
  const auto nm = m.A_tilde.rows();
  m.logdet_correction = logdet_lu(Matrix(Matrix::Identity(np, np) - m.A));
  m.logdet_correction_tilde = logdet_lu(Matrix(Matrix::Identity(nm, nm) - m.A_tilde));
  return m;
}

/// log of  exp(A_R) det(I - A).
inline cplx logdet_thm2(const AsymptoticModel& m) { return m.leading + m.logdet_correction.value; }

/// Same, with det(I - A~) in place of det(I - A).
inline cplx logdet_thm2_tilde(const AsymptoticModel& m) {
  return m.leading + m.logdet_correction_tilde.value;
}

// ---------------------------------------------------------------------------
// Sum over deformed contours

struct ContourIndex {
  std::vector<int> J;  // indices into q+, strictly increasing (0-based)
  std::vector<int> K;  // indices into q-, strictly increasing (0-based)

  [[nodiscard]] std::size_t n() const { return J.size(); }
};

inline void validate_contour_index(const ContourIndex& idx, std::size_t n_plus,
                                   std::size_t n_minus) {
  if (idx.J.size() != idx.K.size()) fail(ErrorKind::config, "ContourIndex: |J| != |K|");
  auto check = [](const std::vector<int>& v, std::size_t bound, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0 || static_cast<std::size_t>(v[i]) >= bound || (i > 0 && v[i] <= v[i - 1])) {
        fail(ErrorKind::config, std::string("ContourIndex: ") + name +
                                    " must be strictly increasing inside the root range");
      }
    }
  };
  check(idx.J, n_plus, "J");
  check(idx.K, n_minus, "K");
}

/// det[1 / (x_a - y_b)] by the product formula.
inline cplx cauchy_determinant(std::span<const cplx> xs, std::span<const cplx> ys) {
  const std::size_t n = xs.size();
  cplx num = 1.0, den = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < a; ++b) num *= (xs[a] - xs[b]) * (ys[b] - ys[a]);
    for (std::size_t b = 0; b < n; ++b) den *= xs[a] - ys[b];
  }
  return num / den;
}

/// exp(A_Gamma - A_R) for the contour through q+_J and q-_K:
///   cauchy_det^2 * prod (alpha(q-)/alpha(q+))^2 e+^2(q+) e-^2(q-) / (phi'(q+) phi'(q-)).
inline cplx contour_weight(const AsymptoticModel& m, const ContourIndex& idx) {
  const RootData& r = *m.root_data;
  validate_contour_index(idx, r.n_plus(), r.n_minus());
  std::vector<cplx> xs, ys;
  cplx prod = 1.0;
  for (std::size_t a = 0; a < idx.n(); ++a) {
    const auto j = static_cast<std::size_t>(idx.J[a]);
    const auto k = static_cast<std::size_t>(idx.K[a]);
    xs.push_back(r.q_plus[j]);
    ys.push_back(r.q_minus[k]);
    const cplx ratio = r.alpha_minus[k] / r.alpha_plus[j];
    prod *= ratio * ratio * m.e2_plus(static_cast<Eigen::Index>(j)) *
            m.e2_minus(static_cast<Eigen::Index>(k)) / (r.phi_prime_plus[j] * r.phi_prime_minus[k]);
  }
  const cplx c = cauchy_determinant(xs, ys);
  return c * c * prod;
}

inline constexpr std::size_t thm3_max_roots = 12;

namespace detail {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Calls f(subset) for every strictly increasing subset of {0..n-1} of size k.
template <class F>
void for_each_subset(int n, int k, F&& f) {
  std::vector<int> s(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(s);
    int i = k - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++s[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

/// Number of contours in the sum: sum_n C(N+, n) C(N-, n).
inline std::uint64_t contour_count(std::size_t n_plus, std::size_t n_minus) {
  std::uint64_t total = 0;
  for (std::size_t n = 0; n <= std::min(n_plus, n_minus); ++n) {
    total += detail::binomial(n_plus, n) * detail::binomial(n_minus, n);
  }
  return total;
}

/// Sum of contour weights over every contour (the n = 0 term is 1).
inline cplx contour_sum(const AsymptoticModel& m) {
  const RootData& r = *m.root_data;
  const std::size_t nmax = std::min(r.n_plus(), r.n_minus());
  if (nmax > thm3_max_roots) {
    std::ostringstream os;
    os << "contour sum refused: min(N+, N-) = " << nmax << " exceeds " << thm3_max_roots << " ("
       << contour_count(r.n_plus(), r.n_minus()) << " terms)";
    fail(ErrorKind::config, os.str());
  }
  cplx total = 1.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    detail::for_each_subset(static_cast<int>(r.n_plus()), static_cast<int>(n),
                            [&](const std::vector<int>& J) {
                              detail::for_each_subset(
                                  static_cast<int>(r.n_minus()), static_cast<int>(n),
                                  [&](const std::vector<int>& K) {
                                    total += contour_weight(m, ContourIndex{J, K});
                                  });
                            });
  }
  return total;
}

/// log of the sum over contours of exp(A_Gamma).
inline cplx logdet_thm3(const AsymptoticModel& m) { return m.leading + std::log(contour_sum(m)); }

// ---------------------------------------------------------------------------
// f+-, resolvent, x-derivative

struct ValueAndSlope {
  cplx value;
  cplx slope;
};

/// f+ or f- on the real line, with its derivative in lambda.
inline ValueAndSlope f_pm_with_slope(const AsymptoticModel& m, double lambda, Side side) {
  const RootData& r = *m.root_data;
  const CauchyData& data = *m.data;
  const GskKernel& k = m.kernel();
  const cplx ep = e_pm(k, m.x, lambda, Side::plus);
  const cplx em = 1.0 / ep;
  const cplx du = 0.5 * (I * m.x + (k.g_is_zero ? cplx{} : k.g_prime(lambda)));  // (log e+)'
  const cplx la_p = data.log_alpha_pm(lambda, Side::plus);
  const cplx la_m = data.log_alpha_pm(lambda, Side::minus);
  const cplx dla_p = data.log_alpha_pm_derivative(lambda, Side::plus);
  const cplx dla_m = data.log_alpha_pm_derivative(lambda, Side::minus);

  // alpha-^-1 e+ and alpha+ e- with their log-derivatives
  const cplx p = std::exp(-la_m) * ep;
  const cplx dp = p * (-dla_m + du);
  const cplx q = std::exp(la_p) * em;
  const cplx dq = q * (dla_p - du);

  // rational sums  sum c_j / (lambda - z_j)
  auto rational = [lambda](const Vector& coef, const std::vector<cplx>& poles) {
    ValueAndSlope s{0.0, 0.0};
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
      const cplx inv = 1.0 / (lambda - poles[static_cast<std::size_t>(j)]);
      s.value += coef(j) * inv;
      s.slope -= coef(j) * inv * inv;
    }
    return s;
  };
  auto coefficients = [](const Vector& outer, const std::vector<cplx>& h, const Vector& e2) {
    Vector c(outer.size());
    for (Eigen::Index j = 0; j < outer.size(); ++j) c(j) = outer(j) * h[static_cast<std::size_t>(j)] * e2(j);
    return c;
  };

  if (side == Side::plus) {
    const ValueAndSlope s1 = rational(coefficients(m.D_plus, r.h_minus, m.e2_minus), r.q_minus);
    const ValueAndSlope s2 = rational(coefficients(m.C_plus, r.h_plus, m.e2_plus), r.q_plus);
    return {p * (1.0 + s1.value) + q * s2.value,
            dp * (1.0 + s1.value) + p * s1.slope + dq * s2.value + q * s2.slope};
  }
  const ValueAndSlope s1 = rational(coefficients(m.D_minus, r.h_plus, m.e2_plus), r.q_plus);
  const ValueAndSlope s2 = rational(coefficients(m.C_minus, r.h_minus, m.e2_minus), r.q_minus);
  return {q * (1.0 + s1.value) + p * s2.value,
          dq * (1.0 + s1.value) + q * s1.slope + dp * s2.value + p * s2.slope};
}

inline cplx f_pm_asym(const AsymptoticModel& m, double lambda, Side side) {
  return f_pm_with_slope(m, lambda, side).value;
}

/// gamma R(l, m) = sqrt(phi(l) phi(m)) / (2 pi i (l - m)) [f+(l) f-(m) - f-(l) f+(m)].
inline cplx resolvent_asym(const AsymptoticModel& m, double lambda, double mu) {
  const GskKernel& k = m.kernel();
  const cplx amp = std::sqrt(k.phi(lambda)) * std::sqrt(k.phi(mu));
  if (std::abs(lambda - mu) < 1e-6) {
    const double c = 0.5 * (lambda + mu);
    const ValueAndSlope fp = f_pm_with_slope(m, c, Side::plus);
    const ValueAndSlope fm = f_pm_with_slope(m, c, Side::minus);
    return amp / (2.0 * pi * I) * (fp.slope * fm.value - fm.slope * fp.value);
  }
  const cplx bracket = f_pm_asym(m, lambda, Side::plus) * f_pm_asym(m, mu, Side::minus) -
                       f_pm_asym(m, lambda, Side::minus) * f_pm_asym(m, mu, Side::plus);
  return amp / (2.0 * pi * I * (lambda - mu)) * bracket;
}

/// gamma R_asym on grid x grid; f+- are evaluated once per grid point.
inline Matrix resolvent_asym_grid(const AsymptoticModel& m, std::span<const double> grid) {
  const GskKernel& k = m.kernel();
  const std::size_t p = grid.size();
  std::vector<ValueAndSlope> fp(p), fm(p);
  std::vector<cplx> amp(p);
  for (std::size_t i = 0; i < p; ++i) {
    fp[i] = f_pm_with_slope(m, grid[i], Side::plus);
    fm[i] = f_pm_with_slope(m, grid[i], Side::minus);
    amp[i] = std::sqrt(k.phi(grid[i]));
  }
  Matrix out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const cplx scale = amp[i] * amp[j] / (2.0 * pi * I);
      cplx v;
      if (std::abs(grid[i] - grid[j]) < 1e-6) {
        v = scale * (fp[i].slope * fm[i].value - fm[i].slope * fp[i].value);
      } else {
        v = scale * (fp[i].value * fm[j].value - fm[i].value * fp[j].value) / (grid[i] - grid[j]);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

/// max over the rule's nodes of |f+(l) + int K(l, m) phi(m) f+(m) dm - e+(l)|,
/// K the kernel bracket [e+(l) e-(m) - e-(l) e+(m)] / (2 pi i (l - m)).
inline double integral_equation_residual(const AsymptoticModel& m) {
  const GskKernel& k = m.kernel();
  const QuadratureRule& rule = m.data->rule();
  const std::size_t n = rule.size();
  std::vector<cplx> weighted(n), f(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = f_pm_asym(m, rule.nodes[j], Side::plus);
    weighted[j] = rule.weights[j] * k.phi(rule.nodes[j]) * f[j];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rule.nodes[i];
    cplx acc = f[i] - e_pm(k, m.x, t, Side::plus);
    for (std::size_t j = 0; j < n; ++j) {
      if (weighted[j] == cplx{}) continue;
      acc += bracket_quotient(k, m.x, t, rule.nodes[j]) / (2.0 * pi * I) * weighted[j];
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

/// d/dx log det by quadrature: (1/2pi) int f+(l) e-(l) phi(l) dl.
inline cplx x_derivative_asym(const AsymptoticModel& m) {
  const GskKernel& k = m.kernel();
  const QuadratureRule& rule = m.data->rule();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    const cplx phi = k.phi(t);
    if (phi == cplx{}) continue;
    acc += rule.weights[i] * f_pm_asym(m, t, Side::plus) * e_pm(k, m.x, t, Side::minus) * phi;
  }
  return acc / (2.0 * pi);
}

/// d/dx of A = A- A+: A'_{jl} = sum_k A-_{jk} A+_{kl} i (q+_l - q-_k).
inline Matrix A_x_derivative(const AsymptoticModel& m) {
  const RootData& r = *m.root_data;
  const Eigen::Index np = m.A.rows();
  const Eigen::Index nm = m.A_plus.rows();
  Matrix out = Matrix::Zero(np, np);
  for (Eigen::Index j = 0; j < np; ++j) {
    for (Eigen::Index l = 0; l < np; ++l) {
      cplx s = 0.0;
      for (Eigen::Index kk = 0; kk < nm; ++kk) {
        s += m.A_minus(j, kk) * m.A_plus(kk, l) * I *
             (r.q_plus[static_cast<std::size_t>(l)] - r.q_minus[static_cast<std::size_t>(kk)]);
      }
      out(j, l) = s;
    }
  }
  return out;
}

/// d/dx log det in closed form: i alpha_1 - tr((I - A)^-1 A').
/// With no roots this is i alpha_1.
inline cplx x_derivative_closed_form(const AsymptoticModel& m) {
  cplx out = I * m.data->alpha1();
  const Eigen::Index np = m.A.rows();
  if (np == 0) return out;
  const Matrix system = Matrix::Identity(np, np) - m.A;
  const Matrix solved = system.partialPivLu().solve(A_x_derivative(m));
  return out - solved.trace();
}

}  // namespace gsk

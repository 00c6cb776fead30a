#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "gsk/asymptotics.hpp"
#include "gsk/oracle.hpp"

using gsk::cplx;
using gsk::I;
using gsk::Matrix;
using gsk::pi;
using gsk::Side;

namespace {

struct Problem {
  gsk::GskKernel kernel;
  gsk::QuadratureRule rule;
  std::optional<gsk::CauchyData> data;
  gsk::RootSet all;

  Problem(gsk::GskKernel k, gsk::QuadratureRule r, int max_n)
      : kernel(std::move(k)), rule(std::move(r)) {
    data.emplace(gsk::CauchyData::build(kernel, rule));
    all = gsk::closed_form_roots(kernel, max_n + 1);
  }

  gsk::RootData roots(int n) const { return gsk::build_h(*data, all.retained(n)); }
};

const Problem& boson() {
  static const Problem s(gsk::boson_kernel(1.0, 1.0, 0.5), gsk::truncated_line_rule(7.0, 28, 20), 5);
  return s;
}

const Problem& xxz() {
  static const Problem s(gsk::xxz_kernel(1.0), gsk::truncated_line_rule(40.0, 80, 16), 4);
  return s;
}

const Problem& entire() {
  static const Problem s(gsk::entire_test_kernel(0.5, 1.0), gsk::truncated_line_rule(6.0, 24, 20), 0);
  return s;
}

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += std::log(ys[i]);
  }
  mx /= xs.size();
  my /= xs.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (std::log(ys[i]) - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

}  // namespace

TEST(Asymptotics, NoRootsReducesToTheLeadingFunctional) {
  const Problem& s = boson();
  const auto rd = s.roots(0);
  const auto m = gsk::build_model(*s.data, rd, 5.0);
  EXPECT_EQ(m.A.rows(), 0);
  EXPECT_EQ(gsk::logdet_thm2(m), m.leading);
  EXPECT_EQ(gsk::logdet_thm3(m), m.leading);
  EXPECT_EQ(gsk::x_derivative_closed_form(m), I * s.data->alpha1());
  // f+ = alpha-^-1 e+
  const double t = 0.4;
  const cplx want = gsk::e_pm(s.kernel, 5.0, t, Side::plus) / s.data->alpha_pm(t, Side::minus);
  EXPECT_NEAR(std::abs(gsk::f_pm_asym(m, t, Side::plus) - want), 0.0, 1e-14);
}

TEST(Asymptotics, LeadingFunctionalIsAffineInX) {
  const Problem& s = boson();
  const cplx a1 = gsk::functional_A(*s.data, 2.0), a2 = gsk::functional_A(*s.data, 5.0);
  const cplx a3 = gsk::functional_A(*s.data, 8.0);
  EXPECT_NEAR(std::abs(a1 + a3 - 2.0 * a2), 0.0, 1e-13);
  EXPECT_NEAR(std::abs((a2 - a1) / 3.0 - I * s.data->alpha1()), 0.0, 1e-14);
  // real for the boson: i alpha_1 real, double integral real
  EXPECT_NEAR(a2.imag(), 0.0, 1e-13);
}

TEST(Asymptotics, LuAndContourSumAgree) {
  for (const Problem* s : {&boson(), &xxz()}) {
    for (int n = 1; n <= 4; ++n) {
      const auto rd = s->roots(n);
      for (double x : {1.5, 3.0, 6.0, 10.0}) {
        const auto m = gsk::build_model(*s->data, rd, x);
        const cplx lu = gsk::logdet_thm2(m), contour = gsk::logdet_thm3(m);
        EXPECT_LT(std::abs(gsk::log_difference(lu, contour)), 1e-12)
            << s->kernel.label << " N = " << n << " x = " << x;
      }
    }
  }
}

TEST(Asymptotics, SylvesterDeterminantIdentity) {
  for (const Problem* s : {&boson(), &xxz()}) {
    const auto rd = s->roots(3);
    for (double x : {1.0, 2.0, 5.0}) {
      const auto m = gsk::build_model(*s->data, rd, x);
      const cplx d1 = std::exp(m.logdet_correction.value);
      const cplx d2 = std::exp(m.logdet_correction_tilde.value);
      EXPECT_LT(std::abs(d1 - d2), 1e-13 * (1.0 + std::abs(d1)));
      EXPECT_LT(std::abs(gsk::logdet_thm2(m) - gsk::logdet_thm2_tilde(m)), 1e-12);
    }
  }
}

TEST(Asymptotics, SingleContourWeightIsMinusAMinusAPlus) {
  const Problem& s = boson();
  const auto rd = s.roots(2);
  const auto m = gsk::build_model(*s.data, rd, 1.3);
  for (int j = 0; j < static_cast<int>(rd.n_plus()); ++j) {
    for (int k = 0; k < static_cast<int>(rd.n_minus()); ++k) {
      const cplx w = gsk::contour_weight(m, gsk::ContourIndex{{j}, {k}});
      const cplx want = -m.A_minus(j, k) * m.A_plus(k, j);
      EXPECT_LT(std::abs(w - want), 1e-13 * std::abs(want));
    }
  }
}

TEST(Asymptotics, CauchyDeterminantProductFormula) {
  const std::vector<cplx> xs = {cplx(0.3, 1.0), cplx(-0.4, 2.1), cplx(1.2, 3.3)};
  const std::vector<cplx> ys = {cplx(0.1, -1.0), cplx(0.7, -2.0), cplx(-1.5, -2.9)};
  Matrix c(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) c(a, b) = 1.0 / (xs[a] - ys[b]);
  }
  EXPECT_LT(std::abs(gsk::cauchy_determinant(xs, ys) - c.determinant()), 1e-14);
  EXPECT_EQ(gsk::cauchy_determinant(std::span<const cplx>{}, std::span<const cplx>{}), cplx(1.0));
}

TEST(Asymptotics, ContourIndexValidation) {
  EXPECT_EQ(gsk::contour_count(2, 2), 6u);
  EXPECT_EQ(gsk::contour_count(4, 4), 70u);
  EXPECT_EQ(gsk::contour_count(3, 0), 1u);
  EXPECT_THROW(gsk::validate_contour_index({{0, 1}, {0}}, 2, 2), gsk::Error);
  EXPECT_THROW(gsk::validate_contour_index({{1, 0}, {0, 1}}, 2, 2), gsk::Error);
  EXPECT_THROW(gsk::validate_contour_index({{0}, {2}}, 2, 2), gsk::Error);
  EXPECT_NO_THROW(gsk::validate_contour_index({{0, 1}, {0, 1}}, 2, 2));
}

TEST(Asymptotics, ContourSumRefusesLargeRootSets) {
  const auto k = gsk::boson_kernel(1.0, 1.0, 0.5, 10);
  const auto data = gsk::CauchyData::build(k, gsk::truncated_line_rule(7.0, 28, 20));
  const auto rd = gsk::build_h(data, gsk::closed_form_roots(k, 7));
  ASSERT_EQ(rd.n_plus(), 14u);
  const auto m = gsk::build_model(data, rd, 8.0);
  try {
    (void)gsk::logdet_thm3(m);
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::config);
  }
  EXPECT_NO_THROW((void)gsk::logdet_thm2(m));
}

TEST(Asymptotics, CDSystemIsSolved) {
  const Problem& s = xxz();
  const auto rd = s.roots(3);
  const auto m = gsk::build_model(*s.data, rd, 1.0);
  EXPECT_LT(m.residual_plus, 1e-13);
  EXPECT_LT(m.residual_minus, 1e-13);
  const auto np = m.A.rows();
  const gsk::Vector lhs = (Matrix::Identity(np, np) - m.A) * m.C_plus;
  EXPECT_LT((lhs - gsk::Vector::Ones(np)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((m.D_plus - m.A_plus * m.C_plus).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Asymptotics, HMatchesXxzClosedForm) {
  const Problem& s = xxz();
  const auto rd = s.roots(3);
  for (std::size_t j = 0; j < rd.n_plus(); ++j) {
    const cplx q = rd.q_plus[j];
    const cplx a = s.kernel.closed_form_alpha_plus(q);
    EXPECT_LT(std::abs(rd.alpha_plus[j] - a), 1e-10 * std::abs(a)) << q;
    const cplx h = -1.0 / (a * a * s.kernel.phi_prime(q));
    EXPECT_LT(std::abs(rd.h_plus[j] - h), 1e-9 * std::abs(h));
  }
  for (std::size_t j = 0; j < rd.n_minus(); ++j) {
    const cplx q = rd.q_minus[j];
    const cplx a = s.kernel.closed_form_alpha_minus(q);
    EXPECT_LT(std::abs(rd.alpha_minus[j] - a), 1e-10 * std::abs(a)) << q;
  }
}

TEST(Asymptotics, DegenerateRootIsANumericError) {
  const auto k = gsk::xxz_kernel(pi / 3);
  const auto data = gsk::CauchyData::build(k, gsk::truncated_line_rule(40.0, 80, 16));
  try {
    (void)gsk::build_h(data, gsk::closed_form_roots(k, 1));
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::numeric);
  }
}

TEST(Asymptotics, ADerivativeMatchesFiniteDifferences) {
  const Problem& s = boson();
  const auto rd = s.roots(2);
  const double x = 2.0, h = 1e-5;
  const auto m = gsk::build_model(*s.data, rd, x);
  const Matrix fd = (gsk::build_model(*s.data, rd, x + h).A - gsk::build_model(*s.data, rd, x - h).A) / (2 * h);
  EXPECT_LT((gsk::A_x_derivative(m) - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Asymptotics, ClosedFormDerivativeDifferentiatesTheLuFormula) {
  for (const Problem* s : {&boson(), &xxz()}) {
    const auto rd = s->roots(3);
    for (double x : {1.0, 4.0, 10.0}) {
      const double h = 1e-4;
      const cplx fd = (gsk::logdet_thm2(gsk::build_model(*s->data, rd, x + h)) -
                       gsk::logdet_thm2(gsk::build_model(*s->data, rd, x - h))) /
                      (2 * h);
      const cplx closed = gsk::x_derivative_closed_form(gsk::build_model(*s->data, rd, x));
      EXPECT_LT(std::abs(closed - fd), 1e-7) << s->kernel.label << " x = " << x;
    }
  }
}

TEST(Asymptotics, DerivativeTraceIsCyclic) {
  // tr((I - A)^-1 A') both ways round, and against the closed-form derivative
  const Problem& s = xxz();
  const auto rd = s.roots(3);
  const auto m = gsk::build_model(*s.data, rd, 2.0);
  const auto np = m.A.rows();
  const Matrix inv = (Matrix::Identity(np, np) - m.A).inverse();
  const Matrix da = gsk::A_x_derivative(m);
  const cplx t1 = (inv * da).trace(), t2 = (da * inv).trace();
  EXPECT_LT(std::abs(t1 - t2), 1e-14 * (1.0 + std::abs(t1)));
  EXPECT_LT(std::abs(gsk::x_derivative_closed_form(m) - (I * s.data->alpha1() - t1)), 1e-14);
}

TEST(Asymptotics, QuadratureDerivativeMatchesClosedFormAtLargeX) {
  const Problem& s = boson();
  const auto rd = s.roots(3);
  for (double x : {8.0, 12.0}) {
    const auto m = gsk::build_model(*s.data, rd, x);
    EXPECT_LT(std::abs(gsk::x_derivative_asym(m) - gsk::x_derivative_closed_form(m)), 1e-10) << x;
  }
}

TEST(Asymptotics, ResolventIsSymmetricAndReal) {
  const Problem& s = boson();
  const auto rd = s.roots(2);
  const auto m = gsk::build_model(*s.data, rd, 6.0);
  const std::vector<double> grid = {-2.0, -0.7, 0.0, 0.3, 1.9};
  const Matrix r = gsk::resolvent_asym_grid(m, grid);
  EXPECT_LT((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(r.imag().cwiseAbs().maxCoeff(), 1e-13);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_LT(std::abs(r(i, j) - gsk::resolvent_asym(m, grid[i], grid[j])), 1e-14);
    }
  }
  // diagonal as the limit of the off-diagonal
  EXPECT_LT(std::abs(gsk::resolvent_asym(m, 0.3 + 1e-5, 0.3) - r(3, 3)), 1e-4);
}

TEST(Asymptotics, MatchesOracleForAllKernels) {
  struct Case {
    const Problem* s;
    int n;
    double x;
    double tol;
  };
  for (const Case& c : {Case{&boson(), 3, 6.0, 1e-11}, Case{&boson(), 3, 10.0, 1e-12},
                        Case{&xxz(), 2, 4.0, 1e-12}, Case{&entire(), 0, 12.0, 1e-12}}) {
    const auto rd = c.s->roots(c.n);
    const auto m = gsk::build_model(*c.s->data, rd, c.x);
    const cplx oracle = gsk::nystrom_logdet(c.s->kernel, c.x, c.s->rule, false).logdet;
    EXPECT_LT(std::abs(gsk::log_difference(gsk::logdet_thm2(m), oracle)), c.tol)
        << c.s->kernel.label << " x = " << c.x;
  }
}

TEST(Asymptotics, ErrorDecaysAtTheRemainderScale) {
  // N = 0 and N = 1 stay above roundoff on this window, so the slope is measurable
  const Problem& s = boson();
  for (int n : {0, 1}) {
    const auto rd = s.roots(n);
    const double a = gsk::remainder_scale(s.all, n);
    std::vector<double> xs, errs;
    for (double x = 4.0; x <= (n == 0 ? 12.0 : 8.0); x += 1.0) {
      const auto m = gsk::build_model(*s.data, rd, x);
      const cplx oracle = gsk::nystrom_logdet(s.kernel, x, s.rule, false).logdet;
      xs.push_back(x);
      errs.push_back(std::abs(gsk::log_difference(gsk::logdet_thm2(m), oracle)));
    }
    const double fitted = slope(xs, errs);
    EXPECT_NEAR(fitted / -a, 1.0, 0.15) << "N = " << n << " slope " << fitted << " a " << a;
  }
}

TEST(Asymptotics, AddingRootsImprovesTheApproximation) {
  const Problem& s = boson();
  const double x = 5.0;
  const cplx oracle = gsk::nystrom_logdet(s.kernel, x, s.rule, false).logdet;
  double prev = INFINITY;
  for (int n = 0; n <= 3; ++n) {
    const auto rd = s.roots(n);
    const double err = std::abs(gsk::log_difference(gsk::logdet_thm2(gsk::build_model(*s.data, rd, x)), oracle));
    EXPECT_LT(err, std::max(prev, 1e-13)) << n;
    EXPECT_LT(err, 10.0 * std::exp(-gsk::remainder_scale(s.all, n) * x)) << n;
    prev = err;
  }
}

TEST(Asymptotics, IntegralEquationResidualDecaysAtTheFirstDroppedRoot) {
  // f+- carry e^{-b x}, b = |Im| of the first dropped root, not e^{-a x}
  const Problem& s = boson();
  const auto rd = s.roots(0);
  const double b = gsk::first_dropped_distance(s.all, 0);
  std::vector<double> xs, res;
  for (double x : {6.0, 8.0, 10.0, 12.0}) {
    xs.push_back(x);
    res.push_back(gsk::integral_equation_residual(gsk::build_model(*s.data, rd, x)));
  }
  EXPECT_NEAR(slope(xs, res) / -b, 1.0, 0.1);
}

TEST(Asymptotics, ResolventMatchesOracle) {
  const Problem& s = boson();
  const auto rd = s.roots(3);
  const double x = 10.0;
  const auto m = gsk::build_model(*s.data, rd, x);
  const auto sol = gsk::nystrom_solve(s.kernel, x, s.rule);
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-5.0 + 0.5 * i);
  const Matrix diff = gsk::resolvent_asym_grid(m, grid) - gsk::nystrom_resolvent_on_grid(s.kernel, sol, grid);
  EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Asymptotics, RejectsNonPositiveX) {
  const Problem& s = boson();
  const auto rd = s.roots(1);
  EXPECT_THROW(gsk::build_model(*s.data, rd, 0.0), gsk::Error);
  EXPECT_THROW(gsk::build_model(*s.data, rd, -1.0), gsk::Error);
}

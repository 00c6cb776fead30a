#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsk/oracle.hpp"

using gsk::cplx;
using gsk::I;
using gsk::Matrix;
using gsk::pi;

namespace {

// Laplace expansion along the first row.
cplx cofactor_det(const Matrix& m) {
  const auto n = m.rows();
  if (n == 1) return m(0, 0);
  cplx acc = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0, jj = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, jj++) = m(i, j);
      }
    }
    acc += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * cofactor_det(minor);
  }
  return acc;
}

const gsk::GskKernel& boson() {
  static const gsk::GskKernel k = gsk::boson_kernel(1.0, 1.0, 0.5);
  return k;
}

const gsk::QuadratureRule& boson_rule() {
  static const gsk::QuadratureRule r = gsk::truncated_line_rule(7.0, 28, 20);
  return r;
}

}  // namespace

TEST(LogDet, MatchesCofactorExpansion) {
  std::mt19937 gen(7);
  std::normal_distribution<double> dist;
  Matrix m(8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) m(i, j) = cplx(dist(gen), dist(gen));
  }
  const cplx want = cofactor_det(m);
  const cplx got = std::exp(gsk::logdet_lu(m).value);
  EXPECT_LT(std::abs(got - want), 1e-12 * std::abs(want));
}

TEST(LogDet, DiagonalAndPermutation) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = I;
  const cplx v = gsk::logdet_lu(d).value;
  EXPECT_NEAR(v.real(), std::log(2.0), 1e-15);
  EXPECT_NEAR(v.imag(), pi / 2, 1e-15);

  Matrix p = Matrix::Zero(2, 2);
  p(0, 1) = 1.0;
  p(1, 0) = 1.0;
  EXPECT_LT(std::abs(std::exp(gsk::logdet_lu(p).value) + 1.0), 1e-15);
  EXPECT_EQ(gsk::logdet_lu(Matrix(0, 0)).value, cplx(0.0));
}

TEST(LogDet, SingularMatrixIsANumericError) {
  Matrix m = Matrix::Ones(3, 3);
  try {
    (void)gsk::logdet_lu(m);
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::numeric);
  }
}

TEST(Oracle, ZeroCouplingGivesZero) {
  const auto rule = gsk::truncated_line_rule(7.0, 28, 20);
  const auto r = gsk::nystrom_logdet(gsk::boson_kernel(1.0, 1.0, 0.0), 10.0, rule);
  EXPECT_EQ(r.logdet, cplx(0.0));
  const auto e = gsk::nystrom_logdet(gsk::entire_test_kernel(0.0, 1.0), 10.0, rule);
  EXPECT_EQ(e.logdet, cplx(0.0));
}

TEST(Oracle, SmallCouplingIsTheTrace) {
  const double gamma = 1e-4, width = 1.0, x = 3.0;
  const auto k = gsk::entire_test_kernel(gamma, width);
  const auto rule = gsk::truncated_line_rule(8.0, 16, 20);
  const cplx tr = gsk::trace_V(k, x, rule);
  // int gamma e^{-l^2} x / (2 pi) dl
  EXPECT_NEAR(std::abs(tr - gamma * std::sqrt(pi) * x / (2.0 * pi)), 0.0, 1e-15);
  const cplx ld = gsk::nystrom_logdet(k, x, rule).logdet;
  EXPECT_LT(std::abs(ld - tr), 10.0 * std::norm(tr));
  EXPECT_GT(std::abs(ld - tr), 0.0);
}

TEST(Oracle, MatrixIsSymmetric) {
  const auto op = gsk::discretize(boson(), 5.0, boson_rule());
  EXPECT_LT((op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_LT(op.matrix.imag().cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Oracle, LogDetIsRealAndConverged) {
  const auto r = gsk::nystrom_logdet(boson(), 10.0, boson_rule());
  EXPECT_NEAR(r.logdet.imag(), 0.0, 1e-14);
  EXPECT_LT(r.error_estimate, 1e-12);
  EXPECT_GE(r.growth_factor, 0.0);
  const auto finer = gsk::nystrom_logdet(boson(), 10.0, gsk::truncated_line_rule(7.0, 40, 24), false);
  EXPECT_LT(std::abs(finer.logdet - r.logdet), 1e-13);
}

TEST(Oracle, ShiftOfTheCutoffWindowDoesNotMatter) {
  // phi decays well inside both windows
  const auto a = gsk::nystrom_logdet(boson(), 6.0, gsk::composite_rule(-7.0, 7.0, 28, 20), false);
  const auto b = gsk::nystrom_logdet(boson(), 6.0, gsk::composite_rule(-8.0, 6.5, 29, 20), false);
  EXPECT_LT(std::abs(a.logdet - b.logdet), 1e-13);
}

TEST(Oracle, UnderResolvedOscillationIsRefused) {
  const auto rule = gsk::truncated_line_rule(7.0, 2, 10);
  try {
    (void)gsk::nystrom_logdet(boson(), 50.0, rule);
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::config);
  }
  EXPECT_EQ(gsk::nyquist_nodes(50.0, 7.0), static_cast<std::size_t>(std::ceil(4.0 * 50.0 * 7.0 / (2 * pi))));
}

TEST(Oracle, ExactDerivativeMatchesFiniteDifferences) {
  const double x = 7.0, h = 1e-3;
  const auto s = gsk::nystrom_solve(boson(), x, boson_rule());
  const cplx fd = (gsk::nystrom_logdet(boson(), x + h, boson_rule(), false).logdet -
                   gsk::nystrom_logdet(boson(), x - h, boson_rule(), false).logdet) /
                  (2 * h);
  EXPECT_LT(std::abs(s.dlogdet_dx - fd), 1e-7);
  EXPECT_LT(std::abs(s.logdet - gsk::nystrom_logdet(boson(), x, boson_rule(), false).logdet), 1e-14);
}

TEST(Oracle, ResolventSatisfiesItsIdentity) {
  const double x = 6.0;
  const Matrix r = gsk::nystrom_resolvent(boson(), x, boson_rule());
  EXPECT_LT(gsk::resolvent_identity_residual(boson(), x, boson_rule(), r), 1e-13);
  EXPECT_LT((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Oracle, GridInterpolationReproducesNodeValues) {
  const double x = 6.0;
  const auto& rule = boson_rule();
  const auto s = gsk::nystrom_solve(boson(), x, rule);
  const std::vector<std::size_t> idx = {100, 250, 280, 300, 431};
  std::vector<double> grid;
  for (auto i : idx) grid.push_back(rule.nodes[i]);
  const Matrix g = gsk::nystrom_resolvent_on_grid(boson(), s, grid);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      EXPECT_LT(std::abs(g(a, b) - s.resolvent(idx[a], idx[b])), 1e-12);
    }
  }
}

TEST(WienerHopf, KernelAtZero) {
  for (double zeta : {0.4, pi / 3, 2.0}) {
    EXPECT_NEAR(gsk::wiener_hopf_kernel(zeta, 0.0), 1.0 / (pi * std::tan(zeta)), 1e-15);
    EXPECT_NEAR(gsk::wiener_hopf_kernel(zeta, 0.7), gsk::wiener_hopf_kernel(zeta, -0.7), 0.0);
  }
}

TEST(WienerHopf, SmallIntervalLimit) {
  const double zeta = pi / 3;
  EXPECT_EQ(gsk::wiener_hopf_logdet(zeta, 0.0, 4, 20), cplx(0.0));
  const double x = 1e-3;
  const cplx v = gsk::wiener_hopf_logdet(zeta, x, 1, 10);
  // tr K - tr K^2 / 2 with K ~ K(0) on a short interval
  const double t = x * gsk::wiener_hopf_kernel(zeta, 0.0);
  EXPECT_NEAR(v.real(), t - 0.5 * t * t, 1e-10);
}

TEST(WienerHopf, ConvergesInNodes) {
  const double zeta = pi / 3, x = 6.0;
  const cplx a = gsk::wiener_hopf_logdet(zeta, x, 12, 20);
  const cplx b = gsk::wiener_hopf_logdet(zeta, x, 16, 24);
  EXPECT_LT(std::abs(a - b), 1e-13);
}

TEST(WienerHopf, RejectsBadArguments) {
  EXPECT_THROW(gsk::wiener_hopf_logdet(0.0, 1.0, 4, 8), gsk::Error);
  EXPECT_THROW(gsk::wiener_hopf_logdet(pi, 1.0, 4, 8), gsk::Error);
  EXPECT_THROW(gsk::wiener_hopf_logdet(1.0, -1.0, 4, 8), gsk::Error);
}

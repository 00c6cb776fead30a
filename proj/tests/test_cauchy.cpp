#include <cmath>

#include <gtest/gtest.h>

#include "gsk/cauchy.hpp"
#include "gsk/special_functions.hpp"

using gsk::cplx;
using gsk::I;
using gsk::pi;
using gsk::Side;

namespace {

gsk::CauchyData boson_data() {
  return gsk::CauchyData::build(gsk::boson_kernel(1.0, 1.0, 0.5), gsk::truncated_line_rule(7.0, 28, 20));
}

gsk::CauchyData xxz_data(double zeta) {
  return gsk::CauchyData::build(gsk::xxz_kernel(zeta), gsk::truncated_line_rule(40.0, 80, 16));
}

}  // namespace

TEST(SpecialFunctions, GammaReflectionOnHalfLine) {
  for (double t : {0.0, 0.3, 1.7, 5.0, 12.0}) {
    const cplx g = gsk::gamma(cplx(0.5, t));
    EXPECT_NEAR(std::norm(g) * std::cosh(pi * t) / pi, 1.0, 1e-13) << t;
  }
  EXPECT_NEAR(std::abs(gsk::gamma(5.0) - 24.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(gsk::gamma(0.5) - std::sqrt(pi)), 0.0, 1e-14);
}

TEST(Cauchy, NuIsPurelyImaginaryForRealPhi) {
  const auto d = boson_data();
  for (double t : {-3.0, 0.0, 1.2}) EXPECT_NEAR(d.nu_at(t).real(), 0.0, 1e-16);
  EXPECT_NEAR(d.alpha1().real(), 0.0, 1e-15);
  EXPECT_GT(std::abs(d.alpha1()), 0.1);
}

TEST(Cauchy, NuPrimeMatchesFiniteDifferences) {
  const auto d = boson_data();
  for (double t : {-2.0, -0.5, 0.3, 1.0, 2.5}) {
    const double h = 1e-5;
    const cplx fd = (d.nu_at(t + h) - d.nu_at(t - h)) / (2.0 * h);
    EXPECT_NEAR(std::abs(fd - d.nu_prime_at(t)), 0.0, 1e-9);
  }
}

TEST(Cauchy, Alpha1IsMinusIntegralOfNu) {
  const auto d = boson_data();
  const auto fine = gsk::truncated_line_rule(7.0, 60, 24);
  const cplx direct = -fine.integrate([&](double t) { return gsk::nu(d.kernel(), t); });
  EXPECT_NEAR(std::abs(direct - d.alpha1()), 0.0, 1e-14);
}

TEST(Cauchy, JumpRelationAtFiftyPoints) {
  for (const auto& d : {boson_data(), xxz_data(1.0)}) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double t = -5.0 + 10.0 * (i + 0.37) / 50.0;
      const cplx ratio = d.alpha_pm(t, Side::minus) / d.alpha_pm(t, Side::plus);
      worst = std::max(worst, std::abs(ratio - (1.0 + d.kernel().phi(t))));
    }
    EXPECT_LT(worst, 1e-12) << d.kernel().label;
  }
}

TEST(Cauchy, XxzMatchesGammaFunctionClosedForm) {
  for (double zeta : {pi / 3, 1.0, 2.0}) {
    const auto d = xxz_data(zeta);
    const auto& k = d.kernel();
    for (double t : {-6.0, -1.3, 0.0, 0.4, 3.0}) {
      const cplx num = d.alpha_pm(t, Side::minus);
      EXPECT_LT(std::abs(num - k.closed_form_alpha_minus(t)), 1e-10 * std::abs(num)) << zeta << " " << t;
      const cplx up = d.alpha_pm(t, Side::plus);
      EXPECT_LT(std::abs(up - k.closed_form_alpha_plus(t)), 1e-10 * std::abs(up));
    }
    // continuation below the axis
    for (cplx z : {cplx(0.5, -0.7), cplx(-2.0, -1.5)}) {
      const cplx num = d.alpha_at(z);
      EXPECT_LT(std::abs(num - k.closed_form_alpha_minus(z)), 1e-10 * std::abs(num));
    }
  }
}

TEST(Cauchy, XxzAlphaMinusAtZero) {
  const double zeta = pi / 3;
  const auto d = xxz_data(zeta);
  const double want = std::sqrt(2.0 * (pi - zeta) / pi);
  EXPECT_NEAR(std::abs(d.alpha_pm(0.0, Side::minus) - want), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d.kernel().closed_form_alpha_minus(0.0) - want), 0.0, 1e-14);
}

TEST(Cauchy, SchwarzReflection) {
  // phi real on R: nu imaginary, so alpha(conj z) = 1 / conj(alpha(z))
  const auto d = boson_data();
  for (cplx z : {cplx(0.3, 0.2), cplx(-1.5, 0.05), cplx(2.0, 0.9)}) {
    const cplx up = d.alpha_at(z);
    const cplx down = d.alpha_at(std::conj(z));
    EXPECT_NEAR(std::abs(down * std::conj(up) - 1.0), 0.0, 1e-12) << z;
  }
  for (double t : {-1.0, 0.25}) {
    const cplx p = d.alpha_pm(t, Side::plus), m = d.alpha_pm(t, Side::minus);
    EXPECT_NEAR(std::abs(m * std::conj(p) - 1.0), 0.0, 1e-12);
  }
}

TEST(Cauchy, BoundaryValuesAreLimitsOfTheContinuation) {
  const auto d = boson_data();
  const double t = 0.37;
  const cplx plus = d.alpha_pm(t, Side::plus), minus = d.alpha_pm(t, Side::minus);
  double prev = INFINITY;
  const double floor = 2e-3 * d.kernel().a;  // alpha_at refuses |Im z| < 1e-3 a
  for (double eps = 0.2; eps >= floor; eps /= 4.0) {
    const double err_p = std::abs(d.alpha_at(cplx(t, eps)) - plus);
    const double err_m = std::abs(d.alpha_at(cplx(t, -eps)) - minus);
    EXPECT_LT(err_p, prev);
    EXPECT_LT(err_p, 2.0 * eps);
    EXPECT_LT(err_m, 2.0 * eps);
    prev = err_p;
  }
}

TEST(Cauchy, LargeZAsymptotics) {
  const auto d = boson_data();
  for (cplx z : {cplx(0.0, 25.0), cplx(30.0, 1.0), cplx(-40.0, -2.0)}) {
    const cplx a = d.alpha_at(z);
    EXPECT_LT(std::abs(a - (1.0 + d.alpha1() / z)), 5.0 / std::norm(z)) << z;
  }
}

TEST(Cauchy, NearAxisContinuationIsRefused) {
  const auto d = boson_data();
  try {
    (void)d.alpha_at(cplx(0.2, 1e-6));
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::domain);
  }
  EXPECT_THROW((void)d.alpha_pm(8.0, Side::plus), gsk::Error);
}

TEST(Cauchy, NodeCollisionIsContinuous) {
  const auto d = boson_data();
  const double t = d.rule().nodes[283];
  const cplx on = d.alpha_pm(t, Side::plus);
  const cplx off = d.alpha_pm(t + 1e-8, Side::plus);
  EXPECT_TRUE(std::isfinite(on.real()));
  EXPECT_LT(std::abs(on - off), 1e-7);
}

TEST(Cauchy, LogAlphaDerivativeMatchesFiniteDifferences) {
  const auto d = xxz_data(1.0);
  for (double t : {-1.0, 0.2, 2.7}) {
    for (Side s : {Side::plus, Side::minus}) {
      const double h = 1e-5;
      const cplx fd = (d.log_alpha_pm(t + h, s) - d.log_alpha_pm(t - h, s)) / (2.0 * h);
      EXPECT_NEAR(std::abs(fd - d.log_alpha_pm_derivative(t, s)), 0.0, 1e-8);
    }
  }
}

TEST(Cauchy, SmallCutoffIsAConfigError) {
  try {
    (void)gsk::CauchyData::build(gsk::boson_kernel(1.0, 1.0, 0.5), gsk::truncated_line_rule(3.0, 12, 16));
    FAIL();
  } catch (const gsk::Error& e) {
    EXPECT_EQ(e.kind(), gsk::ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("cutoff too small"), std::string::npos);
  }
}

TEST(Cauchy, DoubleIntegralIsRealForImaginaryNu) {
  // nu = i r with r real: the finite part is -(r, |k| r) < 0 times i^2, so positive and real
  const auto d = boson_data();
  EXPECT_NEAR(d.double_integral().imag(), 0.0, 1e-13);
  EXPECT_GT(d.double_integral().real(), 0.0);
  EXPECT_EQ(d.g_moment(), cplx(0.0));
}

TEST(Cauchy, SignFaultFlipsNu) {
  gsk::CauchyOptions opt;
  opt.inject_nu_sign_fault = true;
  const auto good = boson_data();
  const auto bad = gsk::CauchyData::build(gsk::boson_kernel(1.0, 1.0, 0.5),
                                          gsk::truncated_line_rule(7.0, 28, 20), opt);
  EXPECT_NEAR(std::abs(good.alpha1() + bad.alpha1()), 0.0, 1e-15);
  const double t = 0.1;
  const cplx ratio = bad.alpha_pm(t, Side::minus) / bad.alpha_pm(t, Side::plus);
  EXPECT_GT(std::abs(ratio - (1.0 + bad.kernel().phi(t))), 0.1);
}

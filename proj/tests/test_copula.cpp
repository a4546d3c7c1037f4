#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "semicont/copula.hpp"
#include "semicont/normal.hpp"
#include "semicont/stats.hpp"

using namespace semicont;
using enum CopulaFamily;

namespace {

std::vector<CopulaSpec> test_copulas() {
  return {{gaussian, 0.5}, {gaussian, -0.5}, {clayton, 0.5}, {clayton, 2.0},
          {frank, 0.5},    {frank, -0.5},    {frank, 2.0}};
}

std::vector<double> interior_grid(int k) {
  std::vector<double> g;
  for (int i = 0; i < k; ++i) g.push_back((i + 0.5) / k);
  return g;
}

double fd_du(const CopulaSpec& c, double u, double v, double h) {
  return (copula_cdf(c, u + h, v) - copula_cdf(c, u - h, v)) / (2.0 * h);
}

double mixed_fd(const CopulaSpec& c, double u, double v, double h) {
  return (copula_cdf(c, u + h, v + h) - copula_cdf(c, u + h, v - h) - copula_cdf(c, u - h, v + h) +
          copula_cdf(c, u - h, v - h)) /
         (4.0 * h * h);
}

}  // namespace

TEST(CopulaSpec, RejectsOutOfDomainParameters) {
  EXPECT_THROW(CopulaSpec(gaussian, 1.0), DomainError);
  EXPECT_THROW(CopulaSpec(gaussian, -1.2), DomainError);
  EXPECT_THROW(CopulaSpec(clayton, 0.0), DomainError);
  EXPECT_THROW(CopulaSpec(clayton, -0.5), DomainError);
  EXPECT_THROW(CopulaSpec(frank, 0.0), DomainError);
  EXPECT_THROW(CopulaSpec(frank, std::nan("")), DomainError);
  EXPECT_NO_THROW(CopulaSpec(frank, -3.0));
  EXPECT_EQ(CopulaSpec(independence, 7.0).theta(), 0.0);
}

TEST(CopulaSpec, FamilyNames) {
  for (auto f : {gaussian, clayton, frank, independence}) EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_THROW(parse_family("Gaussian"), DomainError);
  EXPECT_THROW(parse_family("gumbel"), DomainError);
}

TEST(CopulaCdf, Examples) {
  EXPECT_NEAR(copula_cdf(CopulaSpec::independence(), 0.3, 0.7), 0.21, 1e-15);
  for (const auto& c : test_copulas()) {
    EXPECT_NEAR(copula_cdf(c, 0.42, 1.0), 0.42, 1e-12);
    EXPECT_NEAR(copula_cdf(c, 1.0, 0.42), 0.42, 1e-12);
    EXPECT_EQ(copula_cdf(c, 0.42, 0.0), 0.0);
    EXPECT_EQ(copula_cdf(c, 0.0, 0.42), 0.0);
  }
}

TEST(CopulaCdf, FrechetBounds) {
  for (const auto& c : test_copulas())
    for (double u : interior_grid(15))
      for (double v : interior_grid(15)) {
        const double cv = copula_cdf(c, u, v);
        EXPECT_GE(cv, std::max(u + v - 1.0, 0.0) - 1e-14);
        EXPECT_LE(cv, std::min(u, v) + 1e-14);
      }
}

TEST(CopulaCdf, ClaytonClosedFormAgainstIntegratedDensity) {
  const CopulaSpec c(clayton, 0.5);
  const double closed = std::pow(std::pow(0.5, -0.5) + std::pow(0.5, -0.5) - 1.0, -2.0);
  EXPECT_NEAR(copula_cdf(c, 0.5, 0.5), closed, 1e-15);
  // C(u, v) = int_0^u h(v | s) ds, and h itself integrates the density.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double via_h = GK::integrate([&](double s) { return hfunc(c, 0.5, s); }, 0.0, 0.5, 15, 1e-13);
  const double via_c = GK::integrate(
      [&](double s) {
        return GK::integrate([&](double t) { return copula_density(c, s, t); }, 0.0, 0.5, 15, 1e-11);
      },
      0.0, 0.5, 15, 1e-10);
  EXPECT_NEAR(via_h, closed, 1e-10);
  EXPECT_NEAR(via_c, closed, 1e-6);
}

TEST(CopulaDensity, IntegratesToOne) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (const auto& c : {CopulaSpec(gaussian, 0.5), CopulaSpec(clayton, 2.0), CopulaSpec(frank, 2.0)}) {
    const double total = GK::integrate(
        [&](double s) {
          return GK::integrate([&](double t) { return copula_density(c, s, t); }, 0.0, 1.0, 15, 1e-10);
        },
        0.0, 1.0, 15, 1e-9);
    EXPECT_NEAR(total, 1.0, 1e-4) << to_string(c.family());
  }
}

TEST(CopulaDensity, Examples) {
  EXPECT_DOUBLE_EQ(copula_density(CopulaSpec::independence(), 0.3, 0.8), 1.0);
  EXPECT_NEAR(copula_density(CopulaSpec(gaussian, 0.0), 0.13, 0.77), 1.0, 1e-15);
  const CopulaSpec f(frank, 2.0);
  const double fd = mixed_fd(f, 0.4, 0.6, 1e-5);
  EXPECT_NEAR(copula_density(f, 0.4, 0.6), fd, 1e-6 * fd);
}

TEST(CopulaDensity, CornersAreClampedNotInfinite) {
  for (const auto& c : test_copulas()) {
    EXPECT_TRUE(std::isfinite(copula_log_density(c, 0.0, 0.0)));
    EXPECT_TRUE(std::isfinite(copula_log_density(c, 1.0, 0.0)));
    EXPECT_TRUE(std::isfinite(copula_log_density(c, 1.0, 1.0)));
  }
}

TEST(CopulaDensity, MatchesMixedFiniteDifferenceOnGrid) {
  for (const auto& c : test_copulas())
    for (double u : interior_grid(20))
      for (double v : interior_grid(20)) {
        // Richardson-extrapolated second-order stencil
        const double d = (4.0 * mixed_fd(c, u, v, 1e-4) - mixed_fd(c, u, v, 2e-4)) / 3.0;
        const double got = copula_density(c, u, v);
        EXPECT_NEAR(got, d, 1e-5 * std::abs(d)) << to_string(c.family()) << ' ' << c.theta() << ' ' << u << ' ' << v;
      }
}

TEST(Hfunc, Examples) {
  EXPECT_DOUBLE_EQ(hfunc(CopulaSpec::independence(), 0.37, 0.9), 0.37);
  EXPECT_NEAR(hfunc(CopulaSpec(gaussian, 0.5), 0.5, 0.5), 0.5, 1e-15);
  const CopulaSpec g(gaussian, 0.5);
  const double closed = normal::cdf((normal::quantile(0.2) - 0.5 * normal::quantile(0.7)) / std::sqrt(0.75));
  EXPECT_NEAR(hfunc(g, 0.2, 0.7), closed, 1e-15);
  const CopulaSpec cl(clayton, 0.5);
  const double fd = fd_du(cl, 0.6, 0.3, 1e-6);
  EXPECT_NEAR(hfunc(cl, 0.3, 0.6), fd, 1e-6 * fd);
}

TEST(Hfunc, MatchesFiniteDifferenceOnGrid) {
  for (const auto& c : test_copulas())
    for (double u : interior_grid(20))
      for (double v : interior_grid(20)) {
        const double d = (4.0 * fd_du(c, u, v, 1e-4) - fd_du(c, u, v, 2e-4)) / 3.0;
        EXPECT_NEAR(hfunc(c, v, u), d, 1e-6 * std::abs(d)) << to_string(c.family()) << ' ' << c.theta() << ' ' << u << ' ' << v;
      }
}

TEST(Hfunc, BoundaryValuesAndMonotone) {
  for (const auto& c : test_copulas())
    for (double u : interior_grid(9)) {
      EXPECT_EQ(hfunc(c, 0.0, u), 0.0);
      EXPECT_EQ(hfunc(c, 1.0, u), 1.0);
      double prev = 0.0;
      for (int i = 0; i <= 100; ++i) {
        const double h = hfunc(c, i / 100.0, u);
        EXPECT_GE(h, prev);
        prev = h;
      }
    }
}

TEST(HfuncInv, Examples) {
  EXPECT_DOUBLE_EQ(hfunc_inv(CopulaSpec::independence(), 0.25, 0.8), 0.25);
  // dense-grid inversion oracle
  const CopulaSpec f(frank, -0.5);
  const int k = 1000000;
  int idx = 0;
  while (hfunc(f, (idx + 1.0) / k, 0.3) < 0.7) ++idx;
  const double v = hfunc_inv(f, 0.7, 0.3);
  EXPECT_GE(v, static_cast<double>(idx) / k - 1e-12);
  EXPECT_LE(v, (idx + 1.0) / k + 1e-12);
  EXPECT_NEAR(hfunc(f, v, 0.3), 0.7, 1e-10);
}

TEST(HfuncInv, RoundTripOnGrid) {
  for (const auto& c : test_copulas())
    for (double u : interior_grid(20))
      for (double v : interior_grid(20)) {
        EXPECT_NEAR(hfunc_inv(c, hfunc(c, v, u), u), v, 1e-8);
        const double back = hfunc_inv(c, v, u);
        EXPECT_NEAR(hfunc(c, back, u), v, 1e-10);
      }
}

TEST(HfuncInv, BisectionAgreesWithClosedForm) {
  for (const auto& c : test_copulas())
    for (double u : {0.1, 0.5, 0.9})
      for (double p : {0.05, 0.5, 0.95}) EXPECT_NEAR(hfunc_inv_bisect(c, p, u), hfunc_inv(c, p, u), 1e-8);
}

TEST(CopulaLimits, SmallParameterApproachesIndependence) {
  for (const auto& c : {CopulaSpec(gaussian, 1e-4), CopulaSpec(clayton, 1e-4), CopulaSpec(frank, 1e-4)}) {
    double worst = 0.0;
    for (double u : interior_grid(20))
      for (double v : interior_grid(20)) worst = std::max(worst, std::abs(copula_cdf(c, u, v) - u * v));
    EXPECT_LE(worst, 1e-3) << to_string(c.family());
  }
}

TEST(KendallTau, ClosedFormsAndInversion) {
  EXPECT_NEAR(tau_to_theta(gaussian, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(tau_to_theta(clayton, 0.5), 2.0, 1e-14);
  EXPECT_NEAR(kendall_tau(CopulaSpec(clayton, 0.5)), 0.2, 1e-15);
  EXPECT_NEAR(kendall_tau(CopulaSpec(gaussian, 0.5)), 2.0 * std::asin(0.5) / M_PI, 1e-15);
  for (double tau : {-0.7, -0.2, 0.1, 0.5, 0.8}) {
    EXPECT_NEAR(kendall_tau(CopulaSpec(frank, tau_to_theta(frank, tau))), tau, 1e-8);
    EXPECT_NEAR(kendall_tau(CopulaSpec(gaussian, tau_to_theta(gaussian, tau))), tau, 1e-12);
  }
  EXPECT_THROW(tau_to_theta(clayton, -0.3), DomainError);
  EXPECT_THROW(tau_to_theta(frank, 1.0), DomainError);
}

TEST(KendallTau, FrankInversionBySimulation) {
  const double theta = tau_to_theta(frank, 0.5);
  const auto pairs = copula_sample(CopulaSpec(frank, theta), 1000000, 11);
  std::vector<double> u, v;
  for (const auto& [a, b] : pairs) {
    u.push_back(a);
    v.push_back(b);
  }
  EXPECT_NEAR(stats::kendall_tau(u, v), 0.5, 0.01);
}

TEST(CopulaSample, IndependenceCorrelation) {
  const auto pairs = copula_sample(CopulaSpec::independence(), 1000, 5);
  double su = 0, sv = 0, suv = 0, suu = 0, svv = 0;
  for (const auto& [u, v] : pairs) {
    su += u;
    sv += v;
    suv += u * v;
    suu += u * u;
    svv += v * v;
  }
  const double n = 1000.0;
  const double cov = suv / n - su * sv / (n * n);
  const double r = cov / std::sqrt((suu / n - su * su / (n * n)) * (svv / n - sv * sv / (n * n)));
  EXPECT_LT(std::abs(r), 0.08);
}

TEST(CopulaSample, GaussianKendallTau) {
  const auto pairs = copula_sample(CopulaSpec(gaussian, 0.5), 100000, 7);
  std::vector<double> u, v;
  for (const auto& [a, b] : pairs) {
    u.push_back(a);
    v.push_back(b);
  }
  EXPECT_NEAR(stats::kendall_tau(u, v), 2.0 * std::asin(0.5) / M_PI, 0.01);
}

TEST(CopulaSample, Deterministic) {
  const auto a = copula_sample(CopulaSpec(clayton, 2.0), 500, 99);
  const auto b = copula_sample(CopulaSpec(clayton, 2.0), 500, 99);
  const auto c = copula_sample(CopulaSpec(clayton, 2.0), 500, 100);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(CopulaSample, IndependenceChiSquareUniformity) {
  const int n = 10000;
  const auto pairs = copula_sample(CopulaSpec::independence(), n, 2024);
  std::vector<int> counts(100, 0);
  for (const auto& [u, v] : pairs) {
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[static_cast<int>(u * 10) * 10 + static_cast<int>(v * 10)];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
  const boost::math::chi_squared_distribution<double> ref(99.0);
  EXPECT_LT(chi2, boost::math::quantile(ref, 0.999));
}

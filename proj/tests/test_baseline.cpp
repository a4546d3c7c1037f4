#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "semicont/baseline.hpp"
#include "semicont/dgp.hpp"
#include "semicont/random.hpp"

using namespace semicont;

namespace {

// Minimum check loss over every line through two observations.
double enumerate_vertices(const std::vector<double>& x, const std::vector<double>& y, double alpha,
                          double* b0_out = nullptr, double* b1_out = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[i] == x[j]) continue;
      const double b1 = (y[j] - y[i]) / (x[j] - x[i]);
      const double b0 = y[i] - b1 * x[i];
      const double obj = check_objective(x, y, alpha, b0, b1);
      if (obj < best) {
        best = obj;
        if (b0_out) *b0_out = b0;
        if (b1_out) *b1_out = b1;
      }
    }
  return best;
}

struct Binary {
  std::vector<double> x;
  std::vector<int> z;
};

Binary logistic_sample(std::size_t n, double g0, double g1, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  Binary b;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = nd(gen);
    b.x.push_back(x);
    b.z.push_back(ud(gen) < 1.0 / (1.0 + std::exp(-(g0 + g1 * x))) ? 1 : 0);
  }
  return b;
}

}  // namespace

TEST(FitLogistic, RecoversCoefficients) {
  const auto b = logistic_sample(10000, 0.0, 0.5, 1);
  const auto fit = fit_logistic(b.x, b.z);
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.gradient_norm, 1e-8);
  EXPECT_NEAR(fit.gamma0, 0.0, 0.1);
  EXPECT_NEAR(fit.gamma1, 0.5, 0.1);
}

TEST(FitLogistic, IndependentGivesInterceptOnly) {
  const auto b = logistic_sample(5000, 0.8, 0.0, 2);
  const auto fit = fit_logistic(b.x, b.z);
  double mean_z = 0.0;
  for (int v : b.z) mean_z += v;
  mean_z /= static_cast<double>(b.z.size());
  EXPECT_NEAR(fit.gamma1, 0.0, 0.1);
  // with gamma1 near zero the score equation pins gamma0 close to logit(mean z)
  EXPECT_NEAR(fit.gamma0, std::log(mean_z / (1.0 - mean_z)), 0.02);
  // constant covariate: intercept-only fit is exactly logit(mean z)
  const std::vector<double> xc(b.x.size(), 2.0);
  const auto c = fit_logistic(xc, b.z);
  EXPECT_NEAR(c.gamma0 + 2.0 * c.gamma1, std::log(mean_z / (1.0 - mean_z)), 1e-8);
}

TEST(FitLogistic, LabelFlipNegates) {
  auto b = logistic_sample(2000, -0.3, 1.2, 3);
  const auto fit = fit_logistic(b.x, b.z);
  for (int& v : b.z) v = 1 - v;
  const auto flipped = fit_logistic(b.x, b.z);
  EXPECT_NEAR(flipped.gamma0, -fit.gamma0, 1e-7);
  EXPECT_NEAR(flipped.gamma1, -fit.gamma1, 1e-7);
}

TEST(FitLogistic, DevianceMonotoneAndSeparationRejected) {
  const auto b = logistic_sample(3000, 1.0, -2.0, 4);
  const auto fit = fit_logistic(b.x, b.z);
  ASSERT_GE(fit.deviance_path.size(), 2u);
  // nonincreasing up to the rounding noise of the deviance sum
  for (std::size_t i = 1; i < fit.deviance_path.size(); ++i)
    EXPECT_LE(fit.deviance_path[i], fit.deviance_path[i - 1] * (1.0 + 1e-13));
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<int> z{0, 0, 0, 1, 1, 1};
  EXPECT_THROW(fit_logistic(x, z), DataError);
  EXPECT_THROW(fit_logistic(x, std::vector<int>(6, 1)), DataError);
}

TEST(LinQuant, ExactLineRecovered) {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.1 * i);
    y.push_back(1.0 + 2.0 * 0.1 * i);
  }
  for (double a : {0.05, 0.3, 0.5, 0.9}) {
    const auto fit = fit_linquant(x, y, a);
    EXPECT_NEAR(fit.beta0, 1.0, 1e-12);
    EXPECT_NEAR(fit.beta1, 2.0, 1e-12);
    EXPECT_NEAR(fit.objective, 0.0, 1e-12);
  }
}

TEST(LinQuant, LadMatchesVertexEnumeration) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> x(30), y(30);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = nd(gen);
    y[i] = 0.5 - 1.5 * x[i] + nd(gen);
  }
  double b0 = 0.0, b1 = 0.0;
  const double best = enumerate_vertices(x, y, 0.5, &b0, &b1);
  const auto fit = fit_linquant(x, y, 0.5);
  EXPECT_NEAR(fit.objective, best, 1e-9 * best);
  EXPECT_NEAR(fit.beta0, b0, 1e-9);
  EXPECT_NEAR(fit.beta1, b1, 1e-9);
}

TEST(LinQuant, RandomInstancesMatchEnumeration) {
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> size(10, 50);
  std::uniform_real_distribution<double> ud(0.02, 0.98);
  std::exponential_distribution<double> ed(1.0);
  for (int inst = 0; inst < 100; ++inst) {
    const auto m = static_cast<std::size_t>(size(gen));
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = ud(gen);
      y[i] = ed(gen) * (1.0 + x[i]) + 0.3 * x[i];
    }
    if (inst % 10 == 0) x[1] = x[0];  // tied covariates
    const double alpha = ud(gen);
    const auto fit = fit_linquant(x, y, alpha);
    const double best = enumerate_vertices(x, y, alpha);
    EXPECT_NEAR(fit.objective, best, 1e-9 * std::max(1.0, best)) << inst;
    EXPECT_NEAR(check_objective(x, y, alpha, fit.beta0, fit.beta1), fit.objective, 1e-12 * std::max(1.0, best));

    // directional derivatives along +-e0, +-e1 are nonnegative
    for (const auto& [d0, d1] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
      double deriv = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - fit.beta0 - fit.beta1 * x[i];
        const double dr = -(d0 + d1 * x[i]);
        // one-sided derivative of rho_alpha(r + t dr) at t = 0+
        const bool at_kink = std::abs(r) <= 1e-12 * std::max(1.0, std::abs(y[i]));
        if (at_kink) deriv += dr > 0 ? alpha * dr : (alpha - 1.0) * dr;
        else deriv += (r > 0 ? alpha : alpha - 1.0) * dr;
      }
      EXPECT_GE(deriv, -1e-9) << inst << ' ' << d0 << ' ' << d1;
    }
  }
}

TEST(LinQuant, ConstantCovariateIsInterceptOnly) {
  const std::vector<double> x(12, 3.0);
  std::vector<double> y;
  for (int i = 1; i <= 12; ++i) y.push_back(i);
  const auto fit = fit_linquant(x, y, 0.25);
  EXPECT_EQ(fit.beta1, 0.0);
  EXPECT_EQ(fit.beta0, 3.0);
  EXPECT_THROW(fit_linquant(std::vector<double>(9, 1.0), std::vector<double>(9, 1.0), 0.5), DataError);
  EXPECT_THROW(fit_linquant(x, y, 1.0), DomainError);
}

TEST(Zilqr, ZeroBelowPi0AndNonnegative) {
  const auto dgp = catalog_dgp("ll1");
  const auto d = generate(dgp, 400, 7);
  const auto model = fit_zilqr(d.x, d.z, d.y);
  for (double x = 0.1; x < 0.5; x += 0.02) {
    const double p = model.logistic().pi0(x);
    for (int t = 1; t < 100; ++t) {
      const double tau = t / 100.0;
      const double q = model.predict(tau, x);
      EXPECT_GE(q, 0.0);
      if (tau <= p) EXPECT_EQ(q, 0.0);
    }
  }
}

TEST(Zilqr, FlatLogisticShiftsTheLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.1 * i);
    y.push_back(1.0 + 2.0 * 0.1 * i);
  }
  LogisticFit flat;
  flat.gamma0 = std::log(0.8 / 0.2);  // pi0 = 0.2 everywhere
  flat.gamma1 = 0.0;
  for (double xq : {0.0, 0.7, 1.5}) {
    EXPECT_EQ(zilqr_predict(flat, x, y, 0.1, xq), 0.0);
    EXPECT_NEAR(zilqr_predict(flat, x, y, 0.6, xq), 1.0 + 2.0 * xq, 1e-12);
  }
}

TEST(Zilqr, CloseToTruthWhenCorrectlySpecified) {
  // monotone coefficient process, so beta0(t) + beta1(t) x is a genuine quantile
  const auto dgp = make_logistic_linear_dgp(
      "monotone", -0.5, 2.0, [](double t) { return 0.2 + t; }, [](double t) { return 1.0 + t * t; });
  const auto d = generate(dgp, 20000, 8);
  const auto model = fit_zilqr(d.x, d.z, d.y);
  EXPECT_NEAR(model.logistic().gamma0, -0.5, 0.3);
  EXPECT_NEAR(model.logistic().gamma1, 2.0, 1.2);
  for (double q : {0.2, 0.5, 0.8}) {
    const double x0 = dgp.margin_x.quantile(q);
    for (double tau : {0.6, 0.7, 0.9})
      EXPECT_NEAR(model.predict(tau, x0), true_quantile(dgp, tau, x0), 0.03) << tau << ' ' << x0;
  }
}

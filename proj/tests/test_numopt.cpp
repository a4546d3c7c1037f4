#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "semicont/diagnostics.hpp"
#include "semicont/numopt.hpp"

using namespace semicont;

TEST(MaximizeScalar, Quadratic) {
  const auto r = maximize_scalar([](double x) { return -(x - 0.3) * (x - 0.3); }, -1.0, 1.0);
  EXPECT_NEAR(r.argmax, 0.3, 1e-8);
  EXPECT_TRUE(r.converged);
}

TEST(MaximizeScalar, Sine) {
  const auto r = maximize_scalar([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(r.argmax, std::numbers::pi / 2.0, 1e-8);
}

TEST(MaximizeScalar, BimodalAgainstDenseGrid) {
  // global maximum near 0.7, a lower local maximum near -0.6
  auto f = [](double x) {
    return std::exp(-50.0 * (x - 0.7) * (x - 0.7)) + 0.8 * std::exp(-20.0 * (x + 0.6) * (x + 0.6));
  };
  double best_x = 0.0, best = -1.0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = -1.0 + 2.0 * i / 100000.0;
    if (f(x) > best) {
      best = f(x);
      best_x = x;
    }
  }
  const auto r = maximize_scalar(f, -1.0, 1.0);
  EXPECT_NEAR(r.argmax, best_x, 2e-5);
  EXPECT_GE(r.value, best - 1e-12);
}

TEST(MaximizeScalar, NonFiniteValuesAreSkipped) {
  auto f = [](double x) { return x < 0.2 ? -std::numeric_limits<double>::infinity() : -(x - 0.5) * (x - 0.5); };
  EXPECT_NEAR(maximize_scalar(f, 0.0, 1.0).argmax, 0.5, 1e-8);
  auto g = [](double x) { return x < 0.5 ? std::nan("") : -x; };
  const auto r = maximize_scalar(g, 0.0, 1.0);
  EXPECT_GE(r.argmax, 0.5);
}

TEST(MaximizeScalar, NowhereFinite) {
  auto f = [](double) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(maximize_scalar(f, 0.0, 1.0), Error);
}

TEST(MaximizeScalar, StaysInsideBoundsAndIsDeterministic) {
  auto f = [](double x) { return x; };
  const auto a = maximize_scalar(f, -2.0, 3.0);
  const auto b = maximize_scalar(f, -2.0, 3.0);
  EXPECT_LE(a.argmax, 3.0);
  EXPECT_GE(a.argmax, -2.0);
  EXPECT_NEAR(a.argmax, 3.0, 1e-7);
  EXPECT_EQ(a.argmax, b.argmax);
  EXPECT_EQ(a.value, b.value);
}

TEST(BisectRoot, Examples) {
  EXPECT_NEAR(bisect_root([](double x) { return x - 0.5; }, 0.0, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(bisect_root([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-12), std::cbrt(2.0), 1e-11);
}

TEST(BisectRoot, SameSignBracketThrows) {
  EXPECT_THROW(bisect_root([](double x) { return x + 1.0; }, 0.0, 1.0), Error);
}

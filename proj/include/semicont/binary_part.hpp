#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semicont/copula.hpp"
#include "semicont/copula_fit.hpp"
#include "semicont/diagnostics.hpp"
#include "semicont/margins.hpp"
#include "semicont/normal.hpp"

namespace semicont {

inline constexpr double kLogClamp = 1e-12;
inline constexpr std::size_t kMinBinarySample = 20;

// Copula binary regression for the occurrence process,
// pi0(x) = P(Y = 0 | X = x) = C_{V|U}(p0 | F_X(x)).
struct BinaryFit {
  CopulaSpec copula;
  double p0_hat = 0.0;
  EmpiricalCdf fx_hat;
  double loglik = 0.0;
};

// Occurrence log-likelihood
// sum_i (1 - z_i) log h(p0 | u_i) + z_i log(1 - h(p0 | u_i)).
inline double binary_loglik(const CopulaSpec& copula, double p0, std::span<const double> u,
                            std::span<const int> z) {
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double h = hfunc(copula, p0, u[i]);
    ll += z[i] == 0 ? std::log(std::max(h, kLogClamp)) : std::log(std::max(1.0 - h, kLogClamp));
  }
  return ll;
}

inline BinaryFit fit_binary(std::span<const double> x, std::span<const int> z,
                            CopulaFamily family) {
  if (x.size() != z.size()) throw DataError("fit_binary: x and z differ in length");
  if (x.size() < kMinBinarySample)
    throw DataError("fit_binary: need at least 20 observations");
  std::size_t zeros = 0;
  for (int zi : z) {
    if (zi != 0 && zi != 1) throw DataError("fit_binary: z must be 0/1");
    zeros += zi == 0 ? 1 : 0;
  }
  if (zeros == 0 || zeros == z.size())
    throw DataError("fit_binary: indicator has a single class");

  const double p0 = static_cast<double>(zeros) / static_cast<double>(z.size());
  EmpiricalCdf fx(x, /*rescale=*/true);
  std::vector<double> u(x.size());
  std::transform(x.begin(), x.end(), u.begin(), [&](double xi) { return fx(xi); });

  if (family == CopulaFamily::gaussian) {
    // Same terms as binary_loglik with the normal scores computed once.
    const double q0 = normal::quantile(p0);
    std::vector<double> scores(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      scores[i] = normal::quantile(std::clamp(u[i], kUnitEps, 1.0 - kUnitEps));
    const auto res = maximize_copula_loglik(family, [&](const CopulaSpec& c) {
      const double th = c.theta();
      const double sd = std::sqrt((1.0 - th) * (1.0 + th));
      double ll = 0.0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const double h = std::clamp(normal::cdf((q0 - th * scores[i]) / sd), 0.0, 1.0);
        ll += z[i] == 0 ? std::log(std::max(h, kLogClamp)) : std::log(std::max(1.0 - h, kLogClamp));
      }
      return ll;
    });
    return BinaryFit{res.copula, p0, std::move(fx), res.loglik};
  }
  const auto res = maximize_copula_loglik(
      family, [&](const CopulaSpec& c) { return binary_loglik(c, p0, u, z); });
  return BinaryFit{res.copula, p0, std::move(fx), res.loglik};
}

// Occurrence model for a zero-free response: pi0 is identically zero.
inline BinaryFit degenerate_binary(std::span<const double> x) {
  return BinaryFit{CopulaSpec::independence(), 0.0, EmpiricalCdf(x, true), 0.0};
}

inline double pi0(const BinaryFit& fit, double x) {
  return hfunc(fit.copula, fit.p0_hat, fit.fx_hat(x));
}

}  // namespace semicont

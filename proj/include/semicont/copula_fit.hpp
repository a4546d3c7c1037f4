#pragma once

#include <cmath>
#include <utility>

#include "semicont/copula.hpp"
#include "semicont/numopt.hpp"

namespace semicont {

struct CopulaFitResult {
  CopulaSpec copula;
  double loglik = 0.0;
  OptResult search;
};

// Search domains for the scalar dependence parameter.
inline constexpr double kGaussianBound = 1.0 - 1e-6;
inline constexpr double kClaytonLogMin = -7.0;
inline constexpr double kClaytonLogMax = 5.0;
inline constexpr double kFrankBound = 35.0;
inline constexpr double kFrankIndependenceBand = 1e-4;

// Maps a search coordinate onto a copula for the given family. Frank values
// inside the independence band map to the independence copula.
inline CopulaSpec copula_from_search(CopulaFamily family, double s) {
  switch (family) {
    case CopulaFamily::independence:
      return CopulaSpec::independence();
    case CopulaFamily::gaussian:
      return {family, s};
    case CopulaFamily::clayton:
      return {family, std::exp(s)};
    case CopulaFamily::frank:
      if (std::abs(s) < kFrankIndependenceBand) return CopulaSpec::independence();
      return {family, s};
  }
  return CopulaSpec::independence();
}

inline std::pair<double, double> search_domain(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::gaussian: return {-kGaussianBound, kGaussianBound};
    case CopulaFamily::clayton: return {kClaytonLogMin, kClaytonLogMax};
    case CopulaFamily::frank: return {-kFrankBound, kFrankBound};
    case CopulaFamily::independence: break;
  }
  return {0.0, 0.0};
}

// Maximises a copula log-likelihood over the family's parameter domain.
template <class LogLik>
CopulaFitResult maximize_copula_loglik(CopulaFamily family, LogLik&& loglik) {
  CopulaFitResult out;
  if (family == CopulaFamily::independence) {
    out.copula = CopulaSpec::independence();
    out.loglik = loglik(out.copula);
    out.search.argmax = 0.0;
    out.search.value = out.loglik;
    out.search.converged = true;
    return out;
  }
  const auto [lo, hi] = search_domain(family);
  out.search = maximize_scalar(
      [&](double s) { return loglik(copula_from_search(family, s)); }, lo, hi, 1e-8);
  out.copula = copula_from_search(family, out.search.argmax);
  out.loglik = out.search.value;
  return out;
}

}  // namespace semicont

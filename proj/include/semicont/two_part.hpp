#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string_view>
#include <vector>

#include "semicont/binary_part.hpp"
#include "semicont/diagnostics.hpp"
#include "semicont/positive_part.hpp"

namespace semicont {

inline constexpr double kDefaultDelta = 0.25;
inline constexpr double kBandCeiling = 1.0 - 1e-6;

struct TwoPartOptions {
  double delta = kDefaultDelta;
  PositiveOptions positive;
};

// Fitted two-part model: occurrence copula C with p0 and F_X, positive-part
// copula D with the smoothed margins of the positive subsample, and the
// interpolation exponent delta. response_shift is subtracted from positive-part
// quantiles (nonzero only when positives had to be shifted onto (0, inf)).
struct TwoPartFit {
  BinaryFit binary;
  PositiveFit positive;
  std::size_t n = 0;
  double delta = kDefaultDelta;
  double response_shift = 0.0;
  bool zero_free = false;

  double band_width() const { return std::pow(static_cast<double>(n), -delta); }
};

enum class Region { A1, A2, A3 };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::A1: return "A1";
    case Region::A2: return "A2";
    case Region::A3: return "A3";
  }
  return "?";
}

struct QuantileRegion {
  Region tag = Region::A3;
  double pi0_at_x = 0.0;
  double band_width = 0.0;
};

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 0.5)");
}

// Two-part fit from an explicit occurrence indicator. Responses with z = 1 are
// the positive part; if any of them is not strictly positive the positive part
// is shifted by (min - eps) before fitting and shifted back at prediction.
inline TwoPartFit fit_two_part_indicator(std::span<const double> x, std::span<const int> z,
                                         std::span<const double> y, CopulaFamily family_c,
                                         CopulaFamily family_d, const TwoPartOptions& opts = {}) {
  check_delta(opts.delta);
  if (x.size() != y.size() || x.size() != z.size())
    throw DataError("fit_two_part: x, z, y differ in length");
  std::vector<double> x_pos, y_pos;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (z[i] == 1) {
      x_pos.push_back(x[i]);
      y_pos.push_back(y[i]);
    }
  }
  if (y_pos.empty()) throw DataError("no positive part to model");

  double shift = 0.0;
  const double y_min = *std::min_element(y_pos.begin(), y_pos.end());
  if (!(y_min > 0.0)) {
    constexpr double kShiftEps = 1e-6;
    shift = -y_min + kShiftEps;
    for (double& v : y_pos) v += shift;
  }

  const bool zero_free = y_pos.size() == x.size();
  TwoPartFit fit{zero_free ? degenerate_binary(x) : fit_binary(x, z, family_c),
                 fit_positive(x_pos, y_pos, family_d, opts.positive),
                 x.size(),
                 opts.delta,
                 shift,
                 zero_free};
  if (zero_free) warn("response has no zeros; two-part model degenerates to copula QR");
  return fit;
}

inline std::vector<int> positive_indicator(std::span<const double> y) {
  std::vector<int> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0 || std::isnan(y[i])) throw DataError("responses must be >= 0");
    z[i] = y[i] > 0.0 ? 1 : 0;
  }
  return z;
}

inline TwoPartFit fit_two_part(std::span<const double> x, std::span<const double> y,
                               CopulaFamily family_c, CopulaFamily family_d,
                               const TwoPartOptions& opts = {}) {
  const auto z = positive_indicator(y);
  return fit_two_part_indicator(x, z, y, family_c, family_d, opts);
}

// Scaled quantile level (tau - pi0) / (1 - pi0) for the positive part.
inline double scaled_level(double tau, double pi0_val) {
  if (!(pi0_val >= 0.0 && pi0_val < 1.0)) throw DomainError("scaled_level: pi0 must lie in [0, 1)");
  if (!(tau > pi0_val)) throw DomainError("scaled_level: tau must exceed pi0");
  return (tau - pi0_val) / (1.0 - pi0_val);
}

namespace detail {

inline double effective_band(double pi0_x, double band) {
  if (pi0_x + band >= 1.0) {
    std::ostringstream os;
    os << "interpolation band overruns 1 (pi0=" << pi0_x << ", n^-delta=" << band
       << "); truncated at 1-1e-6";
    debug(os.str());
    return std::max(kBandCeiling - pi0_x, 0.0);
  }
  return band;
}

}  // namespace detail

// Region of the quantile level: A1 below pi0(x), A2 on the closed band
// [pi0(x), pi0(x) + n^-delta], A3 above it.
inline QuantileRegion classify_region(const TwoPartFit& fit, double tau, double x) {
  QuantileRegion r;
  r.pi0_at_x = pi0(fit.binary, x);
  if (fit.zero_free) {
    r.band_width = 0.0;
    r.tag = Region::A3;
    return r;
  }
  r.band_width = detail::effective_band(r.pi0_at_x, fit.band_width());
  if (tau < r.pi0_at_x) r.tag = Region::A1;
  else if (tau <= r.pi0_at_x + r.band_width) r.tag = Region::A2;
  else r.tag = Region::A3;
  return r;
}

// Positive-part quantile on the original response scale.
inline double positive_quantile(const TwoPartFit& fit, double alpha, double x) {
  return q_positive(fit.positive, alpha, x) - fit.response_shift;
}

inline double predict_quantile(const TwoPartFit& fit, double tau, double x,
                               QuantileRegion* region_out = nullptr) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("predict_quantile: tau must lie in (0, 1)");
  const QuantileRegion r = classify_region(fit, tau, x);
  if (region_out != nullptr) *region_out = r;
  if (fit.zero_free) return positive_quantile(fit, tau, x);
  switch (r.tag) {
    case Region::A1:
      return 0.0;
    case Region::A2: {
      if (r.band_width <= 0.0) return 0.0;
      const double right_level = r.band_width / (1.0 - r.pi0_at_x);
      const double right = positive_quantile(fit, right_level, x);
      return right * ((tau - r.pi0_at_x) / r.band_width);
    }
    case Region::A3:
      return positive_quantile(fit, scaled_level(tau, r.pi0_at_x), x);
  }
  return 0.0;
}

}  // namespace semicont

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semicont/copula.hpp"
#include "semicont/copula_fit.hpp"
#include "semicont/diagnostics.hpp"
#include "semicont/margins.hpp"
#include "semicont/normal.hpp"

namespace semicont {

inline constexpr std::size_t kMinPositiveSample = 20;

// How pseudo-observations (and the covariate transform at prediction time) are
// formed for the positive-part copula.
enum class MarginEstimate { smoothed, empirical };

inline std::string_view to_string(MarginEstimate m) {
  return m == MarginEstimate::smoothed ? "smoothed" : "empirical";
}

inline MarginEstimate parse_margin_estimate(std::string_view s) {
  if (s == "smoothed") return MarginEstimate::smoothed;
  if (s == "empirical") return MarginEstimate::empirical;
  throw DomainError("unknown margin estimate '" + std::string(s) + "' (expected smoothed|empirical)");
}

struct PositiveOptions {
  BandwidthRule bandwidth = BandwidthRule::normal_reference;
  MarginEstimate margin = MarginEstimate::smoothed;
};

// Copula quantile regression for Y | Y > 0. Both smoothed CDFs are built from
// the same positive subsample.
struct PositiveFit {
  CopulaSpec copula;
  SmoothedCdf fy_pos;
  SmoothedCdf fx_pos;
  EmpiricalCdf fx_pos_rank;
  MarginEstimate margin = MarginEstimate::smoothed;
  std::size_t m = 0;
  double loglik = 0.0;

  // Covariate transform u+ = F_{X|Y>0}(x). The rank transform is clamped like
  // the pseudo-observations; a zero would make the conditional copula degenerate.
  double covariate_cdf(double x) const {
    if (margin == MarginEstimate::smoothed) return fx_pos.eval(x);
    const double md = static_cast<double>(m);
    return std::clamp(fx_pos_rank(x), 1.0 / (md + 1.0), md / (md + 1.0));
  }
};

// Pseudo-observations for the positive-part copula, clamped to
// [1/(m+1), m/(m+1)].
inline std::vector<double> positive_pseudo_obs(std::span<const double> values,
                                               const SmoothedCdf& smooth,
                                               const EmpiricalCdf& rank, MarginEstimate margin) {
  const double m = static_cast<double>(values.size());
  const double lo = 1.0 / (m + 1.0);
  const double hi = m / (m + 1.0);
  // Evaluated once per distinct value (resampled data repeat values).
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(values.size());
  if (margin == MarginEstimate::smoothed && !values.empty()) {
    const auto knots = smooth.knots();
    const bool on_knots = std::all_of(values.begin(), values.end(), [&](double v) {
      return std::binary_search(knots.begin(), knots.end(), v);
    });
    if (on_knots) {
      const auto at_knots = smooth.eval_knots();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(knots.begin(), knots.end(), values[i]) - knots.begin());
        out[i] = std::clamp(at_knots[k], lo, hi);
      }
      return out;
    }
  }
  double prev_value = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double val = values[order[k]];
    if (k == 0 || val != prev_value) {
      const double raw = margin == MarginEstimate::smoothed ? smooth.eval(val) : rank(val);
      prev = std::clamp(raw, lo, hi);
      prev_value = val;
    }
    out[order[k]] = prev;
  }
  return out;
}

inline double positive_loglik(const CopulaSpec& copula, std::span<const double> u,
                              std::span<const double> v) {
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) ll += copula_log_density(copula, u[i], v[i]);
  return ll;
}

namespace detail {

// positive_loglik with per-observation transforms computed once: normal-score
// sums for the Gaussian family, logs for Clayton.
class PositiveLoglik {
public:
  PositiveLoglik(CopulaFamily family, std::span<const double> u, std::span<const double> v)
      : family_(family), u_(u), v_(v) {
    const std::size_t m = u.size();
    if (family == CopulaFamily::gaussian) {
      for (std::size_t i = 0; i < m; ++i) {
        const double x = normal::quantile(std::clamp(u[i], kUnitEps, 1.0 - kUnitEps));
        const double y = normal::quantile(std::clamp(v[i], kUnitEps, 1.0 - kUnitEps));
        sum_sq_ += x * x + y * y;
        sum_xy_ += x * y;
      }
    } else if (family == CopulaFamily::clayton) {
      lu_.resize(m);
      lv_.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        lu_[i] = std::log(std::clamp(u[i], kUnitEps, 1.0 - kUnitEps));
        lv_[i] = std::log(std::clamp(v[i], kUnitEps, 1.0 - kUnitEps));
      }
    }
  }

  double operator()(const CopulaSpec& c) const {
    const double th = c.theta();
    if (c.family() == CopulaFamily::gaussian && family_ == CopulaFamily::gaussian) {
      const double one_minus = (1.0 - th) * (1.0 + th);
      const double m = static_cast<double>(u_.size());
      return -0.5 * m * std::log(one_minus) - (th * th * sum_sq_ - 2.0 * th * sum_xy_) / (2.0 * one_minus);
    }
    if (c.family() == CopulaFamily::clayton && family_ == CopulaFamily::clayton) {
      const double a = std::log1p(th);
      const double b = 1.0 / th + 2.0;
      double ll = 0.0;
      for (std::size_t i = 0; i < lu_.size(); ++i) {
        const double s = std::expm1(-th * lu_[i]) + std::expm1(-th * lv_[i]);
        ll += a - (th + 1.0) * (lu_[i] + lv_[i]) - b * std::log1p(s);
      }
      return ll;
    }
    return positive_loglik(c, u_, v_);
  }

private:
  CopulaFamily family_;
  std::span<const double> u_;
  std::span<const double> v_;
  double sum_sq_ = 0.0;
  double sum_xy_ = 0.0;
  std::vector<double> lu_;
  std::vector<double> lv_;
};

inline void check_positive_sample(std::span<const double> x_pos, std::span<const double> y_pos) {
  if (x_pos.size() != y_pos.size()) throw DataError("fit_positive: x and y differ in length");
  if (x_pos.size() < kMinPositiveSample) throw DataError("positive subsample too small");
  for (double y : y_pos)
    if (!(y > 0.0)) throw DataError("fit_positive: responses must be strictly positive");
}

}  // namespace detail

// Builds a positive-part fit with given bandwidths and copula (no estimation
// of the dependence parameter); used when reloading a saved model.
inline PositiveFit assemble_positive(std::span<const double> x_pos, std::span<const double> y_pos,
                                     const CopulaSpec& copula, double bandwidth_y,
                                     double bandwidth_x, MarginEstimate margin) {
  detail::check_positive_sample(x_pos, y_pos);
  PositiveFit fit{copula,
                  SmoothedCdf(y_pos, bandwidth_y),
                  SmoothedCdf(x_pos, bandwidth_x),
                  EmpiricalCdf(x_pos, true),
                  margin,
                  x_pos.size(),
                  0.0};
  const EmpiricalCdf y_rank(y_pos, true);
  const auto u = positive_pseudo_obs(x_pos, fit.fx_pos, fit.fx_pos_rank, margin);
  const auto v = positive_pseudo_obs(y_pos, fit.fy_pos, y_rank, margin);
  fit.loglik = positive_loglik(copula, u, v);
  return fit;
}

inline PositiveFit fit_positive(std::span<const double> x_pos, std::span<const double> y_pos,
                                CopulaFamily family, const PositiveOptions& opts = {}) {
  detail::check_positive_sample(x_pos, y_pos);
  PositiveFit fit{CopulaSpec::independence(),
                  SmoothedCdf(y_pos, bandwidth_select(y_pos, opts.bandwidth)),
                  SmoothedCdf(x_pos, bandwidth_select(x_pos, opts.bandwidth)),
                  EmpiricalCdf(x_pos, true),
                  opts.margin,
                  x_pos.size(),
                  0.0};
  const EmpiricalCdf y_rank(y_pos, true);
  const auto u = positive_pseudo_obs(x_pos, fit.fx_pos, fit.fx_pos_rank, opts.margin);
  const auto v = positive_pseudo_obs(y_pos, fit.fy_pos, y_rank, opts.margin);
  const detail::PositiveLoglik loglik(family, u, v);
  const auto res = maximize_copula_loglik(family, loglik);
  fit.copula = res.copula;
  fit.loglik = res.loglik;
  return fit;
}

// Q_{Y|Y>0}(alpha | x) = F_{Y|Y>0}^{-1}(D^{-1}_{V+|U+}(alpha | F_{X|Y>0}(x))).
inline double q_positive(const PositiveFit& fit, double alpha, double x) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("q_positive: alpha must lie in (0, 1)");
  const double v = hfunc_inv(fit.copula, alpha, fit.covariate_cdf(x));
  return fit.fy_pos.inverse(std::clamp(v, kUnitEps, 1.0 - kUnitEps));
}

}  // namespace semicont

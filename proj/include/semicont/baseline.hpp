#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "semicont/diagnostics.hpp"
#include "semicont/stats.hpp"

namespace semicont {

// Logistic occurrence model logit P(Y > 0 | X) = gamma0 + gamma1 X.
struct LogisticFit {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> deviance_path;

  double prob_positive(double x) const { return 1.0 / (1.0 + std::exp(-(gamma0 + gamma1 * x))); }
  double pi0(double x) const { return 1.0 - prob_positive(x); }
};

namespace detail {

inline double logistic_deviance(std::span<const double> x, std::span<const int> z, double g0,
                                double g1) {
  double dev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = g0 + g1 * x[i];
    // log(1 + e^eta) computed without overflow
    const double log1pexp = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    dev += 2.0 * (log1pexp - z[i] * eta);
  }
  return dev;
}

}  // namespace detail

// Damped Newton iterations on the Bernoulli log-likelihood; stops when the
// gradient norm drops to 1e-8 or after 100 iterations.
inline LogisticFit fit_logistic(std::span<const double> x, std::span<const int> z) {
  if (x.size() != z.size() || x.empty()) throw DataError("fit_logistic: x and z differ in length");
  double min0 = std::numeric_limits<double>::infinity(), max0 = -min0;
  double min1 = min0, max1 = -min0;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (z[i] != 0 && z[i] != 1) throw DataError("fit_logistic: z must be 0/1");
    if (z[i] == 1) {
      ++ones;
      min1 = std::min(min1, x[i]);
      max1 = std::max(max1, x[i]);
    } else {
      min0 = std::min(min0, x[i]);
      max0 = std::max(max0, x[i]);
    }
  }
  if (ones == 0 || ones == x.size()) throw DataError("fit_logistic: indicator has a single class");
  const bool constant_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (!constant_x && (max0 < min1 || max1 < min0)) {
    std::ostringstream os;
    os << "fit_logistic: perfect separation (class 0 x-range [" << min0 << ", " << max0
       << "], class 1 x-range [" << min1 << ", " << max1 << "])";
    throw DataError(os.str());
  }

  const double pbar = static_cast<double>(ones) / static_cast<double>(x.size());
  LogisticFit fit;
  fit.gamma0 = std::log(pbar / (1.0 - pbar));
  fit.gamma1 = 0.0;
  double dev = detail::logistic_deviance(x, z, fit.gamma0, fit.gamma1);
  fit.deviance_path.push_back(dev);

  constexpr int kMaxIter = 100;
  constexpr double kGradTol = 1e-8;
  for (int it = 0; it < kMaxIter; ++it) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(fit.gamma0 + fit.gamma1 * x[i])));
      const double r = z[i] - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * x[i];
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    fit.gradient_norm = constant_x ? std::abs(g0) : std::hypot(g0, g1);
    fit.iterations = it;
    if (fit.gradient_norm <= kGradTol) {
      fit.converged = true;
      return fit;
    }
    double s0, s1;
    const double det = h00 * h11 - h01 * h01;
    if (constant_x || !(det > 0.0)) {
      s0 = g0 / h00;
      s1 = 0.0;
    } else {
      s0 = (h11 * g0 - h01 * g1) / det;
      s1 = (h00 * g1 - h01 * g0) / det;
    }
    // Near the optimum the Newton decrease falls below the rounding error of
    // the deviance sum, so changes within that noise count as non-increasing.
    const double slack = 1e-13 * std::max(1.0, dev);
    double step = 1.0;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const double c0 = fit.gamma0 + step * s0;
      const double c1 = fit.gamma1 + step * s1;
      const double cand = detail::logistic_deviance(x, z, c0, c1);
      if (cand <= dev + slack) {
        fit.gamma0 = c0;
        fit.gamma1 = c1;
        dev = cand;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    fit.deviance_path.push_back(dev);
    if (!improved) break;
  }
  if (!fit.converged && fit.gradient_norm > 1e-6) {
    std::ostringstream os;
    os << "fit_logistic: Newton iterations stalled with gradient norm " << fit.gradient_norm;
    throw ConvergenceError(os.str());
  }
  return fit;
}

// Linear quantile regression fit Q(alpha | x) = beta0 + beta1 x.
struct LinQuantFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double objective = 0.0;

  double predict(double x) const { return beta0 + beta1 * x; }
};

inline double check_loss(double r, double alpha) { return r * (alpha - (r < 0.0 ? 1.0 : 0.0)); }

inline double check_objective(std::span<const double> x, std::span<const double> y, double alpha,
                              double b0, double b1) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += check_loss(y[i] - b0 - b1 * x[i], alpha);
  return total;
}

// Exact check-loss minimiser for a single covariate. For fixed slope the best
// intercept is an alpha order statistic of the residuals, which makes the
// profile objective g(slope) convex and piecewise linear with breakpoints at
// pairwise slopes (y_j - y_i) / (x_j - x_i). Golden-section search localises
// the minimiser; the answer is the better of the two breakpoints enclosing it,
// so the returned line passes through two observations.
class LinearQuantileSolver {
public:
  LinearQuantileSolver(std::span<const double> x, std::span<const double> y)
      : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size()) throw DataError("linear quantile fit: x and y differ in length");
    if (x_.size() < 2) throw DataError("linear quantile fit needs at least two observations");
    constant_x_ = std::all_of(x_.begin(), x_.end(), [&](double v) { return v == x_[0]; });
    if (!constant_x_) {
      slope_lo_ = std::numeric_limits<double>::infinity();
      slope_hi_ = -slope_lo_;
      for_each_slope([&](double s) {
        slope_lo_ = std::min(slope_lo_, s);
        slope_hi_ = std::max(slope_hi_, s);
      });
    }
  }

  std::size_t size() const { return x_.size(); }

  // Profile objective min_b0 sum rho_alpha(y - b0 - slope x); writes b0.
  double profile(double alpha, double slope, double* intercept = nullptr) const {
    std::vector<double> r(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) r[i] = y_[i] - slope * x_[i];
    const double b0 = alpha_order_statistic(r, alpha);
    if (intercept != nullptr) *intercept = b0;
    double total = 0.0;
    for (double ri : r) total += check_loss(ri - b0, alpha);
    return total;
  }

  LinQuantFit solve(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw DomainError("linear quantile fit: alpha must lie in (0, 1)");
    LinQuantFit fit;
    if (constant_x_) {
      std::vector<double> r(y_);
      fit.beta1 = 0.0;
      fit.beta0 = alpha_order_statistic(r, alpha);
      fit.objective = check_objective(x_, y_, alpha, fit.beta0, 0.0);
      return fit;
    }
    double a = slope_lo_;
    double b = slope_hi_;
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = profile(alpha, c);
    double gd = profile(alpha, d);
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    for (int it = 0; it < 300 && (b - a) > 1e-14 * scale; ++it) {
      if (gc <= gd) {
        b = d;
        d = c;
        gd = gc;
        c = b - inv_phi * (b - a);
        gc = profile(alpha, c);
      } else {
        a = c;
        c = d;
        gc = gd;
        d = a + inv_phi * (b - a);
        gd = profile(alpha, d);
      }
    }
    const double centre = 0.5 * (a + b);
    // Breakpoints bracketing the located minimiser.
    double below = -std::numeric_limits<double>::infinity();
    double above = std::numeric_limits<double>::infinity();
    for_each_slope([&](double s) {
      if (s <= centre) below = std::max(below, s);
      if (s >= centre) above = std::min(above, s);
    });
    fit.objective = std::numeric_limits<double>::infinity();
    for (double s : {below, above}) {
      if (!std::isfinite(s)) continue;
      double b0 = 0.0;
      const double obj = profile(alpha, s, &b0);
      if (obj < fit.objective) {
        fit.objective = obj;
        fit.beta0 = b0;
        fit.beta1 = s;
      }
    }
    return fit;
  }

private:
  template <class F>
  void for_each_slope(F&& f) const {
    for (std::size_t i = 0; i < x_.size(); ++i)
      for (std::size_t j = i + 1; j < x_.size(); ++j)
        if (x_[i] != x_[j]) f((y_[j] - y_[i]) / (x_[j] - x_[i]));
  }

  static double alpha_order_statistic(std::vector<double>& r, double alpha) {
    const double m = static_cast<double>(r.size());
    auto k = static_cast<std::size_t>(std::ceil(alpha * m));
    k = std::clamp<std::size_t>(k, 1, r.size()) - 1;
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
    return r[k];
  }

  std::vector<double> x_;
  std::vector<double> y_;
  bool constant_x_ = false;
  double slope_lo_ = 0.0;
  double slope_hi_ = 0.0;
};

inline LinQuantFit fit_linquant(std::span<const double> x_pos, std::span<const double> y_pos,
                                double alpha) {
  if (x_pos.size() < 10) throw DataError("linear quantile fit needs at least 10 observations");
  return LinearQuantileSolver(x_pos, y_pos).solve(alpha);
}

// Logistic/linear two-part quantile regression (ZILQR). The positive-part line
// is refitted at the scaled level of each (tau, x); negative fitted quantiles
// are clamped at zero.
class ZilqrModel {
public:
  ZilqrModel(LogisticFit logistic, std::span<const double> x_pos, std::span<const double> y_pos)
      : logistic_(std::move(logistic)), solver_(x_pos, y_pos) {
    if (x_pos.size() < 10) throw DataError("ZILQR positive part needs at least 10 observations");
  }

  const LogisticFit& logistic() const { return logistic_; }

  double predict(double tau, double x) const {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("zilqr_predict: tau must lie in (0, 1)");
    const double p0 = logistic_.pi0(x);
    if (tau <= p0) return 0.0;
    const double alpha = (tau - p0) / (1.0 - p0);
    const auto fit = solver_.solve(alpha);
    return std::max(0.0, fit.predict(x));
  }

private:
  LogisticFit logistic_;
  LinearQuantileSolver solver_;
};

inline ZilqrModel fit_zilqr(std::span<const double> x, std::span<const int> z,
                            std::span<const double> y) {
  std::vector<double> x_pos, y_pos;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (z[i] == 1) {
      x_pos.push_back(x[i]);
      y_pos.push_back(y[i]);
    }
  }
  return ZilqrModel(fit_logistic(x, z), x_pos, y_pos);
}

inline double zilqr_predict(const LogisticFit& logistic, std::span<const double> x_pos,
                            std::span<const double> y_pos, double tau, double x) {
  return ZilqrModel(logistic, x_pos, y_pos).predict(tau, x);
}

}  // namespace semicont

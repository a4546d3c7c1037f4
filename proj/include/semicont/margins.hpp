#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semicont/diagnostics.hpp"
#include "semicont/normal.hpp"
#include "semicont/numopt.hpp"
#include "semicont/stats.hpp"

namespace semicont {

// Kumaraswamy(a, b) on (0, 1): F(x) = 1 - (1 - x^a)^b.
class KumaraswamyDist {
public:
  KumaraswamyDist(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw DomainError("Kumaraswamy shapes must be positive and finite");
  }

  double a() const { return a_; }
  double b() const { return b_; }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return -std::expm1(b_ * std::log1p(-std::pow(x, a_)));
  }

  double quantile(double p) const {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return std::pow(-std::expm1(std::log1p(-p) / b_), 1.0 / a_);
  }

  double pdf(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return a_ * b_ * std::pow(x, a_ - 1.0) * std::pow(1.0 - std::pow(x, a_), b_ - 1.0);
  }

  friend bool operator==(const KumaraswamyDist&, const KumaraswamyDist&) = default;

private:
  double a_;
  double b_;
};

inline double kumar_cdf(const KumaraswamyDist& d, double x) { return d.cdf(x); }
inline double kumar_quantile(const KumaraswamyDist& d, double p) { return d.quantile(p); }

// Right-continuous empirical distribution function; with rescale on, values are
// multiplied by n / (n + 1) so sample points map strictly inside (0, 1).
class EmpiricalCdf {
public:
  EmpiricalCdf(std::span<const double> sample, bool rescale)
      : sorted_(sample.begin(), sample.end()), rescale_(rescale) {
    if (sorted_.empty()) throw DataError("empirical CDF needs a nonempty sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto count = static_cast<double>(
        std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
    const double n = static_cast<double>(sorted_.size());
    return rescale_ ? count / (n + 1.0) : count / n;
  }

  std::size_t size() const { return sorted_.size(); }
  bool rescaled() const { return rescale_; }
  std::span<const double> sorted() const { return sorted_; }

private:
  std::vector<double> sorted_;
  bool rescale_;
};

inline EmpiricalCdf ecdf_fit(std::span<const double> sample, bool rescale = false) {
  return EmpiricalCdf(sample, rescale);
}
inline double ecdf_eval(const EmpiricalCdf& f, double x) { return f(x); }

// Proportion of exact zeros. An all-zero sample has nothing to model; a
// zero-free sample returns 0 and logs a warning.
inline double estimate_p0(std::span<const double> y, bool* zero_free = nullptr) {
  if (y.empty()) throw DataError("estimate_p0: empty response sample");
  std::size_t zeros = 0;
  for (double v : y) {
    if (v < 0.0 || std::isnan(v)) throw DataError("estimate_p0: responses must be >= 0");
    if (v == 0.0) ++zeros;
  }
  if (zeros == y.size()) throw DataError("no positive part to model");
  if (zero_free != nullptr) *zero_free = zeros == 0;
  if (zeros == 0) warn("response has no zeros; two-part model degenerates to copula QR");
  return static_cast<double>(zeros) / static_cast<double>(y.size());
}

enum class BandwidthRule { normal_reference, cross_validation };

inline std::string_view to_string(BandwidthRule r) {
  return r == BandwidthRule::normal_reference ? "normal-reference" : "cross-validation";
}

inline BandwidthRule parse_bandwidth_rule(std::string_view s) {
  if (s == "normal-reference" || s == "nrd") return BandwidthRule::normal_reference;
  if (s == "cross-validation" || s == "cv") return BandwidthRule::cross_validation;
  throw DomainError("unknown bandwidth rule '" + std::string(s) +
                    "' (expected normal-reference|cross-validation)");
}

// Kernel-smoothed distribution function with Gaussian integrated kernel:
// F(y) = (1/m) sum_i Phi((y - Y_i) / h).
class SmoothedCdf {
public:
  SmoothedCdf(std::span<const double> sample, double bandwidth)
      : sorted_(sample.begin(), sample.end()), h_(bandwidth) {
    if (sorted_.empty()) throw DataError("smoothed CDF needs a nonempty sample");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
      throw DomainError("smoothed CDF bandwidth must be positive");
    std::sort(sorted_.begin(), sorted_.end());
    // Distinct knots with multiplicities; below_[k] counts observations < knots_[k].
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      if (i == 0 || sorted_[i] != sorted_[i - 1]) {
        knots_.push_back(sorted_[i]);
        counts_.push_back(0.0);
        below_.push_back(static_cast<double>(i));
      }
      counts_.back() += 1.0;
    }
  }

  double bandwidth() const { return h_; }
  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }

  double operator()(double y) const { return eval(y); }

  double eval(double y) const {
    // Kernel terms beyond +8.5 evaluate to exactly 1 in double precision.
    const double lo_cut = y - kCut * h_;
    const double hi_cut = y + kCut * h_;
    const auto first = std::lower_bound(knots_.begin(), knots_.end(), lo_cut);
    const auto last = std::upper_bound(first, knots_.end(), hi_cut);
    auto k = static_cast<std::size_t>(first - knots_.begin());
    const auto k_end = static_cast<std::size_t>(last - knots_.begin());
    double total = k < knots_.size() ? below_[k] : static_cast<double>(sorted_.size());
    for (; k < k_end; ++k) total += counts_[k] * normal::cdf((y - knots_[k]) / h_);
    // Far-right terms are below 1e-17 each; they only matter deep in the left tail.
    if (total < 1e-3) {
      for (; k < knots_.size(); ++k) {
        const double t = normal::cdf((y - knots_[k]) / h_);
        if (t == 0.0) break;
        total += counts_[k] * t;
      }
    }
    return total / static_cast<double>(sorted_.size());
  }

  double density(double y) const {
    const auto first = std::lower_bound(knots_.begin(), knots_.end(), y - kCut * h_);
    const auto last = std::upper_bound(first, knots_.end(), y + kCut * h_);
    double total = 0.0;
    for (auto it = first; it != last; ++it)
      total += counts_[static_cast<std::size_t>(it - knots_.begin())] * normal::pdf((y - *it) / h_);
    return total / (static_cast<double>(sorted_.size()) * h_);
  }

  std::span<const double> knots() const { return knots_; }

  // eval() at every distinct sample value. Each pair of knots is visited once,
  // using Phi(-a) = 1 - Phi(a) for the mirrored term.
  std::vector<double> eval_knots() const {
    const std::size_t k_n = knots_.size();
    std::vector<double> acc(k_n, 0.0);
    std::size_t start = 0;
    for (std::size_t k = 0; k < k_n; ++k) {
      while (knots_[start] < knots_[k] - kCut * h_) ++start;
      acc[k] += below_[start] + 0.5 * counts_[k];
      for (std::size_t j = start; j < k; ++j) {
        const double t = normal::cdf((knots_[j] - knots_[k]) / h_);
        acc[k] += counts_[j] * (1.0 - t);
        acc[j] += counts_[k] * t;
      }
    }
    const double n = static_cast<double>(sorted_.size());
    for (double& a : acc) a /= n;
    return acc;
  }

  // Numerical inverse on the bracket [min - 6h, max + 6h] (widened if p lies
  // beyond it). Newton steps are taken only when they stay inside the current
  // bracket; otherwise the step is a bisection.
  double inverse(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("smoothed CDF inverse needs p in (0, 1)");
    double pad = kInversePad;
    double lo = sorted_.front() - pad * h_;
    double hi = sorted_.back() + pad * h_;
    double flo = eval(lo) - p;
    double fhi = eval(hi) - p;
    while (flo > 0.0 || fhi < 0.0) {
      pad *= 2.0;
      if (pad > 64.0) break;
      if (flo > 0.0) {
        lo = sorted_.front() - pad * h_;
        flo = eval(lo) - p;
      }
      if (fhi < 0.0) {
        hi = sorted_.back() + pad * h_;
        fhi = eval(hi) - p;
      }
    }
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxBisectIterations; ++it) {
      const double fx = eval(x) - p;
      if (std::abs(fx) <= kInverseTolerance) return x;
      if (fx < 0.0) lo = x;
      else hi = x;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
        return x;
      const double dens = density(x);
      double next = dens > 0.0 ? x - fx / dens : lo - 1.0;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    std::ostringstream os;
    os << "smoothed CDF inverse did not converge for p=" << p << " (bracket [" << lo << ", " << hi
       << "])";
    throw ConvergenceError(os.str());
  }

  static constexpr double kCut = 8.5;
  static constexpr double kInversePad = 6.0;
  static constexpr double kInverseTolerance = 1e-11;

private:
  std::vector<double> sorted_;
  double h_;
  std::vector<double> knots_;
  std::vector<double> counts_;
  std::vector<double> below_;
};

inline SmoothedCdf smoothed_cdf_fit(std::span<const double> sample, double h) {
  return SmoothedCdf(sample, h);
}
inline double smoothed_cdf_eval(const SmoothedCdf& s, double y) { return s.eval(y); }
inline double smoothed_cdf_inv(const SmoothedCdf& s, double p) { return s.inverse(p); }

namespace detail {

inline double robust_scale(std::span<const double> sample) {
  const double s = stats::sd(sample);
  const double q = stats::iqr(std::vector<double>(sample.begin(), sample.end())) / 1.349;
  if (!(s > 0.0)) throw DataError("bandwidth selection: sample has zero variance");
  return q > 0.0 ? std::min(s, q) : s;
}

// Leave-one-out cross-validation criterion for distribution-function
// smoothing, (1/m) sum_i integral (1{Y_i <= x} - F_{-i}(x))^2 dx, evaluated by
// the trapezoid rule on a fixed grid.
inline double cdf_cv_criterion(std::span<const double> sorted, double h,
                               std::span<const double> grid) {
  const std::size_t m = sorted.size();
  const std::size_t g = grid.size();
  std::vector<double> kern(m * g);
  std::vector<double> full(g, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      const double k = normal::cdf((grid[j] - sorted[i]) / h);
      kern[i * g + j] = k;
      full[j] += k;
    }
  }
  const double md = static_cast<double>(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double integral = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
      const double loo = (full[j] - kern[i * g + j]) / (md - 1.0);
      const double ind = sorted[i] <= grid[j] ? 1.0 : 0.0;
      const double val = (ind - loo) * (ind - loo);
      if (j > 0) integral += 0.5 * (val + prev) * (grid[j] - grid[j - 1]);
      prev = val;
    }
    total += integral;
  }
  return total / md;
}

}  // namespace detail

inline constexpr double kNormalReferenceConstant = 1.587;

// Bandwidth for distribution-function smoothing. Normal reference:
// h = 1.587 * sigma * m^(-1/3), sigma = min(sd, IQR / 1.349). Cross-validation
// minimises the leave-one-out CDF criterion over a 30-point log grid spanning
// [h_ref / 5, 5 h_ref].
inline double bandwidth_select(std::span<const double> sample,
                               BandwidthRule rule = BandwidthRule::normal_reference) {
  if (sample.size() < 5) throw DataError("bandwidth selection needs at least 5 observations");
  const double m = static_cast<double>(sample.size());
  const double h_ref = kNormalReferenceConstant * detail::robust_scale(sample) * std::cbrt(1.0 / m);
  if (rule == BandwidthRule::normal_reference) return h_ref;

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  constexpr int kCandidates = 30;
  constexpr int kGridPoints = 400;
  const double h_max = 5.0 * h_ref;
  const double lo = sorted.front() - 5.0 * h_max;
  const double hi = sorted.back() + 5.0 * h_max;
  std::vector<double> grid(kGridPoints);
  for (int j = 0; j < kGridPoints; ++j) grid[j] = lo + (hi - lo) * j / (kGridPoints - 1);

  double best_h = h_ref;
  double best_cv = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kCandidates; ++c) {
    const double h = h_ref * std::exp(std::log(0.2) + std::log(25.0) * c / (kCandidates - 1));
    const double cv = detail::cdf_cv_criterion(sorted, h, grid);
    if (cv < best_cv) {
      best_cv = cv;
      best_h = h;
    }
  }
  return best_h;
}

}  // namespace semicont

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>

#include "semicont/diagnostics.hpp"

namespace semicont {

struct OptResult {
  double argmax = 0.0;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

inline constexpr int kMaxBisectIterations = 200;
inline constexpr int kGridSeedPoints = 50;

namespace detail {
template <class F>
double finite_or_neg_inf(F& f, double x) {
  const double v = f(x);
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}
}  // namespace detail

// Maximizes a scalar objective on [lo, hi]: a 50-point uniform grid locates the
// best cell, then golden-section search refines inside the neighbouring cells
// until the bracket is no wider than tol. Non-finite values count as -inf.
template <class F>
OptResult maximize_scalar(F&& f, double lo, double hi, double tol = 1e-8) {
  if (!(lo < hi)) throw DomainError("maximize_scalar: require lo < hi");
  const double step = (hi - lo) / (kGridSeedPoints - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridSeedPoints; ++i) {
    const double x = (i == kGridSeedPoints - 1) ? hi : lo + i * step;
    const double v = detail::finite_or_neg_inf(f, x);
    if (v > best_value) {
      best_value = v;
      best = static_cast<std::size_t>(i);
    }
  }
  if (best_value == -std::numeric_limits<double>::infinity())
    throw ConvergenceError("objective nowhere finite");

  const double grid_best = (best == kGridSeedPoints - 1) ? hi : lo + best * step;
  double a = best == 0 ? lo : grid_best - step;
  double b = best == kGridSeedPoints - 1 ? hi : grid_best + step;
  a = std::max(a, lo);
  b = std::min(b, hi);

  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = detail::finite_or_neg_inf(f, c);
  double fd = detail::finite_or_neg_inf(f, d);
  int it = 0;
  while (b - a > tol && it < kMaxBisectIterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = detail::finite_or_neg_inf(f, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = detail::finite_or_neg_inf(f, d);
    }
    ++it;
  }

  OptResult out;
  out.iterations = it;
  out.converged = (b - a) <= tol;
  const double mid = 0.5 * (a + b);
  const double fmid = detail::finite_or_neg_inf(f, mid);
  // The refined point must not lose to the grid seed (plateaus, kinks).
  if (fmid >= best_value) {
    out.argmax = mid;
    out.value = fmid;
  } else {
    out.argmax = grid_best;
    out.value = best_value;
  }
  return out;
}

// Root of a monotone function on [lo, hi] by bisection. Stops when the bracket
// is no wider than tol or the midpoint is an exact root.
template <class G>
double bisect_root(G&& g, double lo, double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw DomainError("bisect_root: require lo < hi");
  double glo = g(lo);
  const double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (std::signbit(glo) == std::signbit(ghi) || std::isnan(glo) || std::isnan(ghi)) {
    std::ostringstream msg;
    msg << "bisect_root: bracket [" << lo << ", " << hi << "] does not change sign (g(lo)="
        << glo << ", g(hi)=" << ghi << ")";
    throw DomainError(msg.str());
  }
  for (int it = 0; it < kMaxBisectIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol || mid <= lo || mid >= hi) return mid;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (std::signbit(gm) == std::signbit(glo)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  std::ostringstream msg;
  msg << "bisect_root: no convergence after " << kMaxBisectIterations
      << " iterations, bracket [" << lo << ", " << hi << "]";
  throw ConvergenceError(msg.str());
}

}  // namespace semicont

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "semicont/diagnostics.hpp"
#include "semicont/normal.hpp"
#include "semicont/numopt.hpp"
#include "semicont/random.hpp"

namespace semicont {

enum class CopulaFamily { independence, gaussian, clayton, frank };

inline std::string_view to_string(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::frank: return "frank";
  }
  return "unknown";
}

inline CopulaFamily parse_family(std::string_view name) {
  if (name == "independence") return CopulaFamily::independence;
  if (name == "gaussian") return CopulaFamily::gaussian;
  if (name == "clayton") return CopulaFamily::clayton;
  if (name == "frank") return CopulaFamily::frank;
  throw DomainError("unknown copula family '" + std::string(name) +
                    "' (expected gaussian|clayton|frank|independence)");
}

// Corner clamp for density and h-function arguments.
inline constexpr double kUnitEps = 1e-12;

// A bivariate copula family together with its scalar dependence parameter.
// Construction validates the parameter domain; instances are immutable.
class CopulaSpec {
public:
  CopulaSpec() = default;

  CopulaSpec(CopulaFamily family, double theta) : family_(family), theta_(theta) {
    if (!std::isfinite(theta)) throw DomainError("copula parameter must be finite");
    switch (family) {
      case CopulaFamily::independence:
        theta_ = 0.0;
        break;
      case CopulaFamily::gaussian:
        if (!(theta > -1.0 && theta < 1.0))
          throw DomainError(param_message("gaussian", theta, "(-1, 1)"));
        break;
      case CopulaFamily::clayton:
        if (!(theta > 0.0)) throw DomainError(param_message("clayton", theta, "(0, inf)"));
        break;
      case CopulaFamily::frank:
        if (theta == 0.0) throw DomainError(param_message("frank", theta, "R \\ {0}"));
        break;
    }
  }

  static CopulaSpec independence() { return {}; }

  CopulaFamily family() const { return family_; }
  double theta() const { return theta_; }

  friend bool operator==(const CopulaSpec&, const CopulaSpec&) = default;

private:
  static std::string param_message(const char* fam, double theta, const char* domain) {
    std::ostringstream os;
    os << fam << " copula parameter " << theta << " outside " << domain;
    return os.str();
  }

  CopulaFamily family_ = CopulaFamily::independence;
  double theta_ = 0.0;
};

namespace detail {

inline double clamp_unit(double u, const char* what) {
  if (u < kUnitEps || u > 1.0 - kUnitEps) {
    if (log_level() >= LogLevel::debug) {
      std::ostringstream os;
      os << what << ": argument " << u << " clamped to [1e-12, 1-1e-12]";
      debug(os.str());
    }
    return std::clamp(u, kUnitEps, 1.0 - kUnitEps);
  }
  return u;
}

// expm1(-theta * x), the building block of the Frank family.
inline double frank_e(double theta, double x) { return std::expm1(-theta * x); }

}  // namespace detail

// C(u, v).
inline double copula_cdf(const CopulaSpec& spec, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  const double th = spec.theta();
  switch (spec.family()) {
    case CopulaFamily::independence:
      return u * v;
    case CopulaFamily::gaussian:
      return normal::bivariate_cdf(normal::quantile(u), normal::quantile(v), th);
    case CopulaFamily::clayton: {
      const double s = std::expm1(-th * std::log(u)) + std::expm1(-th * std::log(v));
      return std::exp(-std::log1p(s) / th);
    }
    case CopulaFamily::frank: {
      const double e1 = detail::frank_e(th, 1.0);
      const double a = detail::frank_e(th, u) * detail::frank_e(th, v) / e1;
      return -std::log1p(a) / th;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// log c(u, v); arguments clamped into [eps, 1 - eps].
inline double copula_log_density(const CopulaSpec& spec, double u, double v) {
  u = detail::clamp_unit(u, "copula_density");
  v = detail::clamp_unit(v, "copula_density");
  const double th = spec.theta();
  switch (spec.family()) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian: {
      const double x = normal::quantile(u);
      const double y = normal::quantile(v);
      const double one_minus = (1.0 - th) * (1.0 + th);
      return -0.5 * std::log(one_minus) -
             (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * one_minus);
    }
    case CopulaFamily::clayton: {
      const double lu = std::log(u);
      const double lv = std::log(v);
      const double s = std::expm1(-th * lu) + std::expm1(-th * lv);
      return std::log1p(th) - (th + 1.0) * (lu + lv) - (1.0 / th + 2.0) * std::log1p(s);
    }
    case CopulaFamily::frank: {
      const double e1 = detail::frank_e(th, 1.0);
      const double denom = e1 + detail::frank_e(th, u) * detail::frank_e(th, v);
      return std::log(-th * e1) - th * (u + v) - 2.0 * std::log(std::abs(denom));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// c(u, v) = d^2 C / du dv.
inline double copula_density(const CopulaSpec& spec, double u, double v) {
  return std::exp(copula_log_density(spec, u, v));
}

// h-function: P(V <= v | U = u) = dC(u, v)/du.
inline double hfunc(const CopulaSpec& spec, double v, double u) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  u = detail::clamp_unit(u, "hfunc");
  const double th = spec.theta();
  double h = 0.0;
  switch (spec.family()) {
    case CopulaFamily::independence:
      h = v;
      break;
    case CopulaFamily::gaussian: {
      const double x = normal::quantile(u);
      const double y = normal::quantile(v);
      h = normal::cdf((y - th * x) / std::sqrt((1.0 - th) * (1.0 + th)));
      break;
    }
    case CopulaFamily::clayton: {
      const double t = std::exp(th * std::log(u)) * std::expm1(-th * std::log(v));
      h = std::exp(-(1.0 + th) / th * std::log1p(t));
      break;
    }
    case CopulaFamily::frank: {
      const double ev = detail::frank_e(th, v);
      h = std::exp(-th * u) * ev / (detail::frank_e(th, 1.0) + detail::frank_e(th, u) * ev);
      break;
    }
  }
  return std::clamp(h, 0.0, 1.0);
}

inline constexpr double kHinvTolerance = 1e-10;

// Generic inverse of the h-function in v by monotone bisection on [eps, 1-eps].
inline double hfunc_inv_bisect(const CopulaSpec& spec, double p, double u) {
  double lo = kUnitEps;
  double hi = 1.0 - kUnitEps;
  if (hfunc(spec, lo, u) >= p) return lo;
  if (hfunc(spec, hi, u) <= p) return hi;
  for (int it = 0; it < kMaxBisectIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h = hfunc(spec, mid, u);
    if (std::abs(h - p) <= kHinvTolerance || mid <= lo || mid >= hi) return mid;
    if (h < p) lo = mid;
    else hi = mid;
  }
  std::ostringstream os;
  os << "hfunc_inv: bisection did not converge (family=" << to_string(spec.family())
     << ", theta=" << spec.theta() << ", p=" << p << ", u=" << u << ", bracket=[" << lo << ", "
     << hi << "])";
  throw ConvergenceError(os.str());
}

// Inverse h-function: v with hfunc(spec, v, u) = p. Closed forms for every
// implemented family; falls back to bisection if the closed form misses the
// residual tolerance.
inline double hfunc_inv(const CopulaSpec& spec, double p, double u) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  u = detail::clamp_unit(u, "hfunc_inv");
  const double th = spec.theta();
  double v = std::numeric_limits<double>::quiet_NaN();
  switch (spec.family()) {
    case CopulaFamily::independence:
      return p;
    case CopulaFamily::gaussian: {
      const double x = normal::quantile(u);
      v = normal::cdf(normal::quantile(p) * std::sqrt((1.0 - th) * (1.0 + th)) + th * x);
      break;
    }
    case CopulaFamily::clayton: {
      const double t = std::expm1(-th / (1.0 + th) * std::log(p));
      v = std::exp(-std::log1p(t * std::exp(-th * std::log(u))) / th);
      break;
    }
    case CopulaFamily::frank: {
      const double a = std::exp(-th * u);
      const double b = p * detail::frank_e(th, 1.0) / (p + (1.0 - p) * a);
      v = -std::log1p(b) / th;
      break;
    }
  }
  if (std::isfinite(v) && v >= 0.0 && v <= 1.0) {
    const double resid = std::abs(hfunc(spec, v, u) - p);
    if (resid <= kHinvTolerance) return v;
    // The closed form can lose digits where h is very steep; try the bracket.
    const double w = hfunc_inv_bisect(spec, p, u);
    return std::abs(hfunc(spec, w, u) - p) < resid ? w : v;
  }
  return hfunc_inv_bisect(spec, p, u);
}

namespace detail {

// Debye function D1(x) = (1/x) * integral_0^x t / (e^t - 1) dt.
inline double debye1(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x / 4.0;
  auto f = [x](double s) {
    const double t = x * s;
    return t == 0.0 ? 1.0 : t / std::expm1(t);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-14);
}

}  // namespace detail

// Kendall's tau implied by a family and parameter.
inline double kendall_tau(const CopulaSpec& spec) {
  const double th = spec.theta();
  switch (spec.family()) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::gaussian: return 2.0 * std::asin(th) / std::numbers::pi;
    case CopulaFamily::clayton: return th / (th + 2.0);
    case CopulaFamily::frank:
      if (std::abs(th) < 1e-6) return th / 9.0;
      return 1.0 + 4.0 * (detail::debye1(th) - 1.0) / th;
  }
  return 0.0;
}

inline double tau_to_theta(CopulaFamily family, double tau) {
  if (!(tau > -1.0 && tau < 1.0)) throw DomainError("Kendall's tau must lie in (-1, 1)");
  switch (family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian:
      return std::sin(std::numbers::pi * tau / 2.0);
    case CopulaFamily::clayton:
      if (!(tau > 0.0)) throw DomainError("clayton copula attains only Kendall's tau in (0, 1)");
      return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::frank: {
      if (tau == 0.0) return 0.0;
      auto g = [tau](double th) {
        if (th == 0.0) return -tau;
        return kendall_tau(CopulaSpec(CopulaFamily::frank, th)) - tau;
      };
      double bound = 10.0;
      while (g(bound) * g(-bound) > 0.0) {
        bound *= 2.0;
        if (bound > 1e4) throw DomainError("frank copula cannot attain the requested tau");
      }
      return bisect_root(g, -bound, bound, 1e-11);
    }
  }
  return 0.0;
}

// n pairs from the copula by the conditional-distribution method:
// u, t ~ U(0,1), v = hfunc_inv(t | u).
inline std::vector<std::pair<double, double>> copula_sample(const CopulaSpec& spec,
                                                            std::size_t n,
                                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double t = rng.uniform();
    out.emplace_back(u, hfunc_inv(spec, t, u));
  }
  return out;
}

}  // namespace semicont

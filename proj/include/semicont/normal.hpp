#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace semicont::normal {

inline double pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Standard normal quantile. Acklam's rational approximation followed by one
// Halley step against the erfc-based cdf; absolute error ~1e-15.
inline double quantile(double p) {
  if (std::isnan(p)) return std::numeric_limits<double>::quiet_NaN();
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p > 0.5) return -quantile(1.0 - p);

  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace detail {

struct GaussLegendreHalf {
  const double* w;
  const double* x;
  int size;
};

inline GaussLegendreHalf gl_nodes(double abs_r) {
  static constexpr double w6[] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr double x6[] = {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970};
  static constexpr double w12[] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                   0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
  static constexpr double x12[] = {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
                                   -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
  static constexpr double w20[] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                   0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                   0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                   0.1527533871307259};
  static constexpr double x20[] = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                   -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                                   -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                                   -0.07652652113349733};
  if (abs_r < 0.3) return {w6, x6, 3};
  if (abs_r < 0.75) return {w12, x12, 6};
  return {w20, x20, 10};
}

// Upper orthant probability P(X > dh, Y > dk) for a standard bivariate normal
// with correlation r (Genz's BVND, double precision).
inline double bvn_upper(double dh, double dk, double r) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (std::isinf(dh) || std::isinf(dk)) {
    if (dh == std::numeric_limits<double>::infinity() ||
        dk == std::numeric_limits<double>::infinity())
      return 0.0;
    if (dh == -std::numeric_limits<double>::infinity())
      return dk == -std::numeric_limits<double>::infinity() ? 1.0 : cdf(-dk);
    return cdf(-dh);
  }
  const auto gl = gl_nodes(std::abs(r));
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (int i = 0; i < gl.size; ++i) {
      double sn = std::sin(asr * (gl.x[i] + 1.0) / 2.0);
      bvn += gl.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-gl.x[i] + 1.0) / 2.0);
      bvn += gl.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + cdf(-h) * cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < gl.size; ++i) {
      for (double sign : {1.0, -1.0}) {
        const double xs = std::pow(a * (sign * gl.x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        bvn += a * gl.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) bvn += cdf(-std::max(h, k));
  if (r < 0.0) bvn = -bvn + std::max(0.0, cdf(-h) - cdf(-k));
  return bvn;
}

}  // namespace detail

// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
inline double bivariate_cdf(double h, double k, double rho) {
  return std::clamp(detail::bvn_upper(-h, -k, rho), 0.0, 1.0);
}

}  // namespace semicont::normal

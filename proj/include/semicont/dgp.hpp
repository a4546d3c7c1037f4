#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "semicont/copula.hpp"
#include "semicont/diagnostics.hpp"
#include "semicont/margins.hpp"
#include "semicont/random.hpp"

namespace semicont {

enum class DgpKind { copula_pair, logistic_linear };

// Whether catalog dependence values are native copula parameters or Kendall's tau.
enum class ParamScale { native, kendall };

inline ParamScale parse_param_scale(std::string_view s) {
  if (s == "native") return ParamScale::native;
  if (s == "kendall") return ParamScale::kendall;
  throw DomainError("unknown parameter scale '" + std::string(s) + "' (expected native|kendall)");
}

// One data generating process. Copula pairs use (C, D, F_X, F_Y, p0); the
// logistic/linear design uses (gamma0, gamma1, beta0(tau), beta1(tau), F_X).
struct DgpConfig {
  std::string name;
  DgpKind kind = DgpKind::copula_pair;
  CopulaSpec copula_c;
  CopulaSpec copula_d;
  KumaraswamyDist margin_x{5.0, 16.0};
  KumaraswamyDist margin_y{2.0, 5.0};
  double p0 = 0.1;
  double gamma0 = 0.0;
  double gamma1 = 0.5;
  std::function<double(double)> beta0;
  std::function<double(double)> beta1;
};

inline DgpConfig make_copula_dgp(std::string name, CopulaSpec c, CopulaSpec d, double p0,
                                 KumaraswamyDist margin_x = {5.0, 16.0},
                                 KumaraswamyDist margin_y = {2.0, 5.0}) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must lie in (0, 1) for a copula DGP");
  DgpConfig cfg;
  cfg.name = std::move(name);
  cfg.kind = DgpKind::copula_pair;
  cfg.copula_c = c;
  cfg.copula_d = d;
  cfg.margin_x = margin_x;
  cfg.margin_y = margin_y;
  cfg.p0 = p0;
  return cfg;
}

inline DgpConfig make_logistic_linear_dgp(std::string name, double gamma0, double gamma1,
                                          std::function<double(double)> beta0,
                                          std::function<double(double)> beta1,
                                          KumaraswamyDist margin_x = {5.0, 16.0}) {
  DgpConfig cfg;
  cfg.name = std::move(name);
  cfg.kind = DgpKind::logistic_linear;
  cfg.gamma0 = gamma0;
  cfg.gamma1 = gamma1;
  cfg.beta0 = std::move(beta0);
  cfg.beta1 = std::move(beta1);
  cfg.margin_x = margin_x;
  cfg.p0 = std::numeric_limits<double>::quiet_NaN();
  return cfg;
}

namespace detail {
inline CopulaSpec catalog_copula(CopulaFamily f, double value, ParamScale scale) {
  return {f, scale == ParamScale::native ? value : tau_to_theta(f, value)};
}
}  // namespace detail

// The simulation catalog: gc, gf, cf (copula pairs) and ll1, ll2
// (logistic/linear). p0 is ignored for ll1/ll2.
inline DgpConfig catalog_dgp(std::string_view name, double p0 = 0.1,
                             ParamScale scale = ParamScale::native,
                             KumaraswamyDist margin_y = {2.0, 5.0}) {
  using enum CopulaFamily;
  if (name == "gc")
    return make_copula_dgp("gc", detail::catalog_copula(gaussian, 0.5, scale),
                           detail::catalog_copula(clayton, 0.5, scale), p0, {5.0, 16.0}, margin_y);
  if (name == "gf")
    return make_copula_dgp("gf", detail::catalog_copula(gaussian, -0.5, scale),
                           detail::catalog_copula(frank, -0.5, scale), p0, {5.0, 16.0}, margin_y);
  if (name == "cf")
    return make_copula_dgp("cf", detail::catalog_copula(clayton, 0.5, scale),
                           detail::catalog_copula(frank, -0.5, scale), p0, {5.0, 16.0}, margin_y);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (name == "ll1")
    return make_logistic_linear_dgp(
        "ll1", 0.0, 0.5, [](double t) { return std::sin(two_pi * t); },
        [](double t) { return std::sin(two_pi * t) + t * t * t; });
  if (name == "ll2")
    return make_logistic_linear_dgp(
        "ll2", 0.0, 0.5, [](double t) { return std::sin(two_pi * t); },
        [](double t) { return std::cos(two_pi * t) + t * t * t; });
  throw DomainError("unknown DGP '" + std::string(name) + "' (expected gc|gf|cf|ll1|ll2)");
}

struct Dataset {
  std::vector<double> x;
  std::vector<int> z;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
};

// Semicontinuous sample. Copula pairs: (U, V) ~ C, Z = 1{V >= p0},
// X = F_X^{-1}(U); for Z = 1, U+ = F_X(X), V+ = D^{-1}(t | U+) with t ~ U(0,1),
// Y = F_Y^{-1}(V+). Logistic/linear: Z ~ Bernoulli(logistic(g0 + g1 X)) and
// Y = beta0(t) + beta1(t) X with t ~ U(0,1) for Z = 1.
inline Dataset generate(const DgpConfig& dgp, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("generate: n must be at least 1");
  Dataset out;
  out.x.resize(n);
  out.z.resize(n);
  out.y.assign(n, 0.0);
  if (dgp.kind == DgpKind::copula_pair) {
    const auto pairs = copula_sample(dgp.copula_c, n, derive_seed(seed, 1));
    Rng rng_t(derive_seed(seed, 2));
    for (std::size_t i = 0; i < n; ++i) {
      const auto [u, v] = pairs[i];
      out.z[i] = v >= dgp.p0 ? 1 : 0;
      out.x[i] = dgp.margin_x.quantile(u);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (out.z[i] == 0) continue;
      const double u_pos = std::clamp(dgp.margin_x.cdf(out.x[i]), kUnitEps, 1.0 - kUnitEps);
      const double t = rng_t.uniform();
      const double v_pos = std::clamp(hfunc_inv(dgp.copula_d, t, u_pos), kUnitEps, 1.0 - kUnitEps);
      out.y[i] = dgp.margin_y.quantile(v_pos);
    }
  } else {
    Rng rng(derive_seed(seed, 3));
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] = dgp.margin_x.quantile(rng.uniform());
      const double prob = 1.0 / (1.0 + std::exp(-(dgp.gamma0 + dgp.gamma1 * out.x[i])));
      out.z[i] = rng.uniform() < prob ? 1 : 0;
      const double t = rng.uniform();
      if (out.z[i] == 1) out.y[i] = dgp.beta0(t) + dgp.beta1(t) * out.x[i];
    }
  }
  return out;
}

// P(Y = 0 | X = x) under the truth.
inline double true_pi0(const DgpConfig& dgp, double x) {
  if (dgp.kind == DgpKind::copula_pair)
    return hfunc(dgp.copula_c, dgp.p0, dgp.margin_x.cdf(x));
  return 1.0 / (1.0 + std::exp(dgp.gamma0 + dgp.gamma1 * x));
}

// CDF of X given Y > 0 implied by the copula-pair generator:
// (F_X(x) - C(F_X(x), p0)) / (1 - p0).
inline double positive_covariate_cdf(const DgpConfig& dgp, double x) {
  if (dgp.kind != DgpKind::copula_pair)
    throw DomainError("positive_covariate_cdf: defined for copula-pair DGPs only");
  const double u = dgp.margin_x.cdf(x);
  return (u - copula_cdf(dgp.copula_c, u, dgp.p0)) / (1.0 - dgp.p0);
}

// True two-part quantile of a copula-pair DGP. The positive part conditions on
// U+ = F_X(x), matching the generator.
inline double true_quantile_copula(const DgpConfig& dgp, double tau, double x) {
  if (dgp.kind != DgpKind::copula_pair)
    throw DomainError("true_quantile_copula: not a copula-pair DGP");
  const double p = true_pi0(dgp, x);
  if (tau <= p) return 0.0;
  const double ts = (tau - p) / (1.0 - p);
  const double u = std::clamp(dgp.margin_x.cdf(x), kUnitEps, 1.0 - kUnitEps);
  return dgp.margin_y.quantile(hfunc_inv(dgp.copula_d, ts, u));
}

inline double true_quantile(const DgpConfig& dgp, double tau, double x) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("true_quantile: tau must lie in (0, 1)");
  if (dgp.kind == DgpKind::copula_pair) return true_quantile_copula(dgp, tau, x);
  const double p = true_pi0(dgp, x);
  if (tau <= p) return 0.0;
  const double ts = (tau - p) / (1.0 - p);
  return dgp.beta0(ts) + dgp.beta1(ts) * x;
}

}  // namespace semicont

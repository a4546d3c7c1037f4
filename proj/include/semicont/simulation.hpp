#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "semicont/baseline.hpp"
#include "semicont/dgp.hpp"
#include "semicont/parallel.hpp"
#include "semicont/random.hpp"
#include "semicont/two_part.hpp"

namespace semicont {

enum class EstimatorKind { proposed, zilqr };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::proposed;
  CopulaFamily fit_c = CopulaFamily::gaussian;
  CopulaFamily fit_d = CopulaFamily::clayton;

  static EstimatorSpec proposed(CopulaFamily c, CopulaFamily d) {
    return {EstimatorKind::proposed, c, d};
  }
  static EstimatorSpec zilqr() { return {EstimatorKind::zilqr, CopulaFamily::independence, CopulaFamily::independence}; }

  std::string label() const { return kind == EstimatorKind::proposed ? "proposed" : "zilqr"; }
  std::string fit_c_name() const {
    return kind == EstimatorKind::proposed ? std::string(to_string(fit_c)) : "logistic";
  }
  std::string fit_d_name() const {
    return kind == EstimatorKind::proposed ? std::string(to_string(fit_d)) : "linear";
  }
};

// The fitting families matching a catalog DGP.
inline EstimatorSpec matching_proposed(const DgpConfig& dgp) {
  if (dgp.kind == DgpKind::copula_pair)
    return EstimatorSpec::proposed(dgp.copula_c.family(), dgp.copula_d.family());
  return EstimatorSpec::proposed(CopulaFamily::gaussian, CopulaFamily::gaussian);
}

struct SimCellConfig {
  DgpConfig dgp;
  std::size_t n = 100;
  std::vector<double> taus{0.5, 0.7, 0.9};
  std::vector<EstimatorSpec> estimators;
  std::size_t replications = 500;
  std::size_t grid_size = 91;
  double grid_lo = 0.05;
  double grid_hi = 0.95;
  std::uint64_t seed = 42;
  unsigned jobs = 1;
  TwoPartOptions options;
  // Every replication reuses the cell seed (degenerate-variance check).
  bool identical_replications = false;
};

// One (dgp, n, p0, tau, estimator) row. Metric fields are scaled by 1e3.
struct SimRow {
  std::string dgp;
  std::string fit_c;
  std::string fit_d;
  std::size_t n = 0;
  double p0 = 0.0;
  double tau = 0.0;
  std::string estimator;
  double imse = 0.0;
  double ibias2 = 0.0;
  double ivar = 0.0;
  std::size_t r = 0;
  std::size_t g = 0;
  std::uint64_t seed = 0;
  std::size_t failures = 0;
  bool ok = true;
};

struct SimReport {
  std::vector<SimRow> rows;
  std::vector<std::string> diagnostics;
};

inline constexpr double kReportScale = 1e3;
inline constexpr double kMaxCellFailureRate = 0.02;

// Evaluation grid: true F_X quantiles at G equally spaced levels on [lo, hi].
inline std::vector<double> evaluation_grid(const DgpConfig& dgp, std::size_t g, double lo = 0.05,
                                           double hi = 0.95) {
  if (g < 2) throw DomainError("evaluation grid needs at least two points");
  std::vector<double> out(g);
  for (std::size_t i = 0; i < g; ++i)
    out[i] = dgp.margin_x.quantile(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g - 1));
  return out;
}

namespace detail {

// Estimated quantile curves for one replication: [tau][grid].
inline std::vector<std::vector<double>> estimate_curves(const EstimatorSpec& est,
                                                        const Dataset& data,
                                                        std::span<const double> taus,
                                                        std::span<const double> grid,
                                                        const TwoPartOptions& opts) {
  std::vector<std::vector<double>> out(taus.size(), std::vector<double>(grid.size()));
  if (est.kind == EstimatorKind::proposed) {
    const auto fit = fit_two_part_indicator(data.x, data.z, data.y, est.fit_c, est.fit_d, opts);
    for (std::size_t t = 0; t < taus.size(); ++t)
      for (std::size_t g = 0; g < grid.size(); ++g)
        out[t][g] = predict_quantile(fit, taus[t], grid[g]);
  } else {
    const auto model = fit_zilqr(data.x, data.z, data.y);
    for (std::size_t t = 0; t < taus.size(); ++t)
      for (std::size_t g = 0; g < grid.size(); ++g) out[t][g] = model.predict(taus[t], grid[g]);
  }
  for (const auto& row : out)
    for (double v : row)
      if (!std::isfinite(v)) throw ConvergenceError("non-finite quantile estimate");
  return out;
}

}  // namespace detail

// Monte Carlo IMSE / IBIAS^2 / IVAR for every estimator and tau of one cell.
// Replication r draws its data from derive_seed(seed, r); results land in
// pre-allocated slots so the report does not depend on `jobs`.
inline SimReport run_cell(const SimCellConfig& cfg) {
  if (cfg.replications < 2) throw DomainError("run_cell: need at least two replications");
  if (cfg.estimators.empty()) throw DomainError("run_cell: no estimators requested");
  check_delta(cfg.options.delta);
  const auto grid = evaluation_grid(cfg.dgp, cfg.grid_size, cfg.grid_lo, cfg.grid_hi);
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t n_tau = cfg.taus.size();
  const std::size_t n_grid = grid.size();
  const std::size_t reps = cfg.replications;

  std::vector<std::vector<double>> truth(n_tau, std::vector<double>(n_grid));
  for (std::size_t t = 0; t < n_tau; ++t)
    for (std::size_t g = 0; g < n_grid; ++g) truth[t][g] = true_quantile(cfg.dgp, cfg.taus[t], grid[g]);

  // slots[e][r] holds the [tau][grid] curves or nothing if the fit failed.
  std::vector<std::vector<std::optional<std::vector<std::vector<double>>>>> slots(
      n_est, std::vector<std::optional<std::vector<std::vector<double>>>>(reps));
  std::vector<std::vector<std::string>> errors(n_est, std::vector<std::string>(reps));

  parallel_for(reps, cfg.jobs, [&](std::size_t r) {
    const std::uint64_t s = cfg.identical_replications ? cfg.seed : derive_seed(cfg.seed, r);
    const Dataset data = generate(cfg.dgp, cfg.n, s);
    for (std::size_t e = 0; e < n_est; ++e) {
      try {
        slots[e][r] = detail::estimate_curves(cfg.estimators[e], data, cfg.taus, grid, cfg.options);
      } catch (const Error& ex) {
        errors[e][r] = ex.what();
      }
    }
  });

  SimReport report;
  for (std::size_t e = 0; e < n_est; ++e) {
    std::size_t valid = 0;
    for (std::size_t r = 0; r < reps; ++r) valid += slots[e][r].has_value() ? 1 : 0;
    const std::size_t failures = reps - valid;
    const bool ok = valid >= 2 &&
                    static_cast<double>(failures) <= kMaxCellFailureRate * static_cast<double>(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      if (!errors[e][r].empty()) {
        std::ostringstream os;
        os << cfg.dgp.name << " n=" << cfg.n << " p0=" << cfg.dgp.p0 << " "
           << cfg.estimators[e].label() << " replication " << r << ": " << errors[e][r];
        report.diagnostics.push_back(os.str());
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << cfg.dgp.name << " n=" << cfg.n << " p0=" << cfg.dgp.p0 << " "
         << cfg.estimators[e].label() << ": " << failures << " of " << reps
         << " replications failed (limit 2%); cell marked failed";
      report.diagnostics.push_back(os.str());
    }
    for (std::size_t t = 0; t < n_tau; ++t) {
      SimRow row;
      row.dgp = cfg.dgp.name;
      row.fit_c = cfg.estimators[e].fit_c_name();
      row.fit_d = cfg.estimators[e].fit_d_name();
      row.n = cfg.n;
      row.p0 = cfg.dgp.p0;
      row.tau = cfg.taus[t];
      row.estimator = cfg.estimators[e].label();
      row.r = valid;
      row.g = n_grid;
      row.seed = cfg.seed;
      row.failures = failures;
      row.ok = ok;
      if (!ok) {
        row.imse = row.ibias2 = row.ivar = std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(row);
        continue;
      }
      const double rv = static_cast<double>(valid);
      double bias2 = 0.0, var = 0.0, mse = 0.0;
      for (std::size_t g = 0; g < n_grid; ++g) {
        double mean = 0.0;
        for (std::size_t r = 0; r < reps; ++r)
          if (slots[e][r]) mean += (*slots[e][r])[t][g];
        mean /= rv;
        double v = 0.0, m = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          if (!slots[e][r]) continue;
          const double q = (*slots[e][r])[t][g];
          v += (q - mean) * (q - mean);
          m += (q - truth[t][g]) * (q - truth[t][g]);
        }
        bias2 += (mean - truth[t][g]) * (mean - truth[t][g]);
        var += v / rv;
        mse += m / rv;
      }
      const double gd = static_cast<double>(n_grid);
      row.ibias2 = kReportScale * bias2 / gd;
      row.ivar = kReportScale * var / gd;
      row.imse = kReportScale * mse / gd;
      report.rows.push_back(row);
    }
  }
  return report;
}

// Misspecification study: every DGP in dgp_list fitted with every family pair
// (plus the ZILQR baseline), one report per (dgp, pair).
inline std::vector<SimReport> misspec_matrix(
    const std::vector<DgpConfig>& dgp_list,
    const std::vector<std::pair<CopulaFamily, CopulaFamily>>& fit_family_pairs, std::size_t n,
    std::size_t replications, std::uint64_t seed, std::span<const double> taus, unsigned jobs = 1,
    const TwoPartOptions& opts = {}) {
  std::vector<SimReport> out;
  for (const auto& dgp : dgp_list) {
    for (const auto& [c, d] : fit_family_pairs) {
      SimCellConfig cfg;
      cfg.dgp = dgp;
      cfg.n = n;
      cfg.taus.assign(taus.begin(), taus.end());
      cfg.estimators = {EstimatorSpec::proposed(c, d), EstimatorSpec::zilqr()};
      cfg.replications = replications;
      cfg.seed = seed;
      cfg.jobs = jobs;
      cfg.options = opts;
      out.push_back(run_cell(cfg));
    }
  }
  return out;
}

}  // namespace semicont

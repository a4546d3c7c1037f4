#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "semicont/parallel.hpp"
#include "semicont/random.hpp"
#include "semicont/stats.hpp"
#include "semicont/two_part.hpp"

namespace semicont {

// Pointwise band over an x-grid. tau is empty for the occurrence curve pi0(x).
struct BandResult {
  std::optional<double> tau;
  std::vector<double> x;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  std::size_t b = 0;
};

struct BootstrapConfig {
  CopulaFamily family_c = CopulaFamily::gaussian;
  CopulaFamily family_d = CopulaFamily::clayton;
  TwoPartOptions options;
  std::vector<double> taus{0.5, 0.7, 0.9};
  std::vector<double> x_grid;
  std::size_t replicates = 300;
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  // Every replicate reuses the same resample indices (degenerate check).
  bool identical_resamples = false;
};

// Refitted curves of every successful replicate: curves[k][b][g] where k = 0 is
// pi0 and k = 1 + t is the tau[t] quantile.
struct BootstrapReplicates {
  std::vector<double> x_grid;
  std::vector<double> taus;
  std::vector<std::vector<double>> point;  // [k][g]
  std::vector<std::vector<std::vector<double>>> curves;
  std::size_t requested = 0;
  std::size_t failures = 0;
};

inline constexpr double kMaxBootstrapFailureRate = 0.05;

namespace detail {

inline std::vector<std::vector<double>> two_part_curves(const TwoPartFit& fit,
                                                        std::span<const double> taus,
                                                        std::span<const double> grid) {
  std::vector<std::vector<double>> out(1 + taus.size(), std::vector<double>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) out[0][g] = pi0(fit.binary, grid[g]);
  for (std::size_t t = 0; t < taus.size(); ++t)
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[1 + t][g] = predict_quantile(fit, taus[t], grid[g]);
  return out;
}

}  // namespace detail

// Pairs bootstrap: resample n rows with replacement, refit the two-part model
// and record pi0 and the quantile curves on the grid. Replicate b uses
// derive_seed(seed, b).
inline BootstrapReplicates bootstrap_replicates(std::span<const double> x, std::span<const double> y,
                                                const BootstrapConfig& cfg) {
  if (cfg.replicates < 2) throw DomainError("bootstrap needs at least two replicates");
  if (cfg.x_grid.empty()) throw DomainError("bootstrap needs a nonempty x grid");
  if (x.size() != y.size()) throw DataError("bootstrap: x and y differ in length");
  const auto full = fit_two_part(x, y, cfg.family_c, cfg.family_d, cfg.options);

  BootstrapReplicates out;
  out.x_grid = cfg.x_grid;
  out.taus = cfg.taus;
  out.point = detail::two_part_curves(full, cfg.taus, cfg.x_grid);
  out.requested = cfg.replicates;

  const std::size_t n = x.size();
  std::vector<std::optional<std::vector<std::vector<double>>>> slots(cfg.replicates);
  parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t b) {
    Rng rng(cfg.identical_resamples ? derive_seed(cfg.seed, 0) : derive_seed(cfg.seed, b));
    std::vector<double> xb(n), yb(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.index(n));
      xb[i] = x[j];
      yb[i] = y[j];
    }
    try {
      const auto fit = fit_two_part(xb, yb, cfg.family_c, cfg.family_d, cfg.options);
      slots[b] = detail::two_part_curves(fit, cfg.taus, cfg.x_grid);
    } catch (const Error& e) {
      debug(std::string("bootstrap replicate failed: ") + e.what());
    }
  });

  out.curves.assign(1 + cfg.taus.size(), {});
  for (auto& slot : slots) {
    if (!slot) {
      ++out.failures;
      continue;
    }
    for (std::size_t k = 0; k < slot->size(); ++k) out.curves[k].push_back(std::move((*slot)[k]));
  }
  if (static_cast<double>(out.failures) >
      kMaxBootstrapFailureRate * static_cast<double>(cfg.replicates)) {
    std::ostringstream os;
    os << "bootstrap: " << out.failures << " of " << cfg.replicates
       << " replicates failed (limit 5%)";
    throw DataError(os.str());
  }
  return out;
}

// Percentile bands at the given level from a replicate set (inclusive
// linear-interpolation percentiles at (1 - level)/2 and 1 - (1 - level)/2).
inline std::vector<BandResult> bands_from_replicates(const BootstrapReplicates& reps, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw DomainError("band level must lie in [0, 1)");
  const double lo_p = (1.0 - level) / 2.0;
  const double hi_p = 1.0 - lo_p;
  std::vector<BandResult> out;
  for (std::size_t k = 0; k < reps.curves.size(); ++k) {
    BandResult band;
    if (k > 0) band.tau = reps.taus[k - 1];
    band.x = reps.x_grid;
    band.estimate = reps.point[k];
    band.level = level;
    band.b = reps.curves[k].size();
    for (std::size_t g = 0; g < reps.x_grid.size(); ++g) {
      std::vector<double> vals;
      vals.reserve(reps.curves[k].size());
      for (const auto& curve : reps.curves[k]) vals.push_back(curve[g]);
      std::sort(vals.begin(), vals.end());
      band.lower.push_back(stats::quantile_sorted(vals, lo_p));
      band.upper.push_back(stats::quantile_sorted(vals, hi_p));
    }
    out.push_back(std::move(band));
  }
  return out;
}

// Bands for pi0 (first entry) and each tau.
inline std::vector<BandResult> bootstrap_bands(std::span<const double> x, std::span<const double> y,
                                               const BootstrapConfig& cfg) {
  return bands_from_replicates(bootstrap_replicates(x, y, cfg), cfg.level);
}

}  // namespace semicont

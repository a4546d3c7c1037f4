// semicont-qr: generate, fit, predict, simstudy, bands, compare.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semicont.hpp"

namespace {

using namespace semicont;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw DomainError("empty list '" + s + "'");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw DomainError(what + ": not a number '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, what));
  return out;
}

std::vector<double> parse_taus(const std::string& s) {
  auto taus = parse_doubles(s, "--tau");
  for (double t : taus)
    if (!(t > 0.0 && t < 1.0)) throw DomainError("--tau values must lie in (0, 1)");
  return taus;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    const double v = parse_double(item, what);
    if (!(v >= 1.0) || v != std::floor(v)) throw DomainError(what + " must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// "a,b" Kumaraswamy shapes for the response margin.
KumaraswamyDist parse_margin(const std::string& s) {
  const auto ab = parse_doubles(s, "--margin-y");
  if (ab.size() != 2) throw DomainError("--margin-y expects two shapes 'a,b'");
  return {ab[0], ab[1]};
}

// Uses the given seed, or draws one from entropy and reports it.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << s << '\n';
  return s;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (file_) {
      file_->close();
      if (!*file_) throw DataError("write failed");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> equal_grid(std::span<const double> x, std::size_t g) {
  if (g < 2) throw DomainError("--grid must be at least 2");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  std::vector<double> out(g);
  for (std::size_t i = 0; i < g; ++i)
    out[i] = *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(g - 1);
  return out;
}

struct FitFlags {
  std::string copula_c = "gaussian";
  std::string copula_d = "clayton";
  double delta = kDefaultDelta;
  std::string bandwidth = "normal-reference";
  std::string margin = "smoothed";

  void add(CLI::App* cmd) {
    cmd->add_option("--copula-c", copula_c, "occurrence copula family");
    cmd->add_option("--copula-d", copula_d, "positive-part copula family");
    cmd->add_option("--delta", delta, "interpolation band exponent in (0, 0.5)");
    cmd->add_option("--bandwidth", bandwidth, "normal-reference|cross-validation");
    cmd->add_option("--margin", margin, "pseudo-observations: smoothed|empirical");
  }
  TwoPartOptions options() const {
    check_delta(delta);
    TwoPartOptions o;
    o.delta = delta;
    o.positive.bandwidth = parse_bandwidth_rule(bandwidth);
    o.positive.margin = parse_margin_estimate(margin);
    return o;
  }
  CopulaFamily fc() const { return parse_family(copula_c); }
  CopulaFamily fd() const { return parse_family(copula_d); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-part copula quantile regression for semicontinuous data"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "simulate a dataset (x,z,y)");
  std::string gen_dgp = "gc", gen_out, gen_scale = "native", gen_margin = "2,5";
  std::size_t gen_n = 100;
  double gen_p0 = 0.1;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--dgp", gen_dgp, "gc|gf|cf|ll1|ll2");
  gen->add_option("--n", gen_n, "sample size");
  gen->add_option("--p0", gen_p0, "marginal zero probability (copula DGPs)");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--param-scale", gen_scale, "native|kendall");
  gen->add_option("--margin-y", gen_margin, "Kumaraswamy shapes a,b of the response margin");
  gen->add_option("--out", gen_out, "output CSV (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit the two-part copula model");
  FitFlags fit_flags;
  std::string fit_in, fit_out;
  std::optional<std::uint64_t> fit_seed;
  fit->add_option("--in", fit_in, "input CSV")->required();
  fit_flags.add(fit);
  fit->add_option("--seed", fit_seed, "seed recorded in the fit file");
  fit->add_option("--out", fit_out, "output JSON (default stdout)");

  // predict
  auto* pred = app.add_subcommand("predict", "conditional quantiles from a fitted model");
  std::string pred_fit, pred_in, pred_out, pred_tau = "0.5,0.7,0.9";
  std::size_t pred_grid = 101;
  unsigned pred_jobs = 1;
  pred->add_option("--fit", pred_fit, "fit JSON")->required();
  pred->add_option("--in", pred_in, "the CSV the model was fitted on")->required();
  pred->add_option("--tau", pred_tau, "comma-separated quantile levels");
  pred->add_option("--grid", pred_grid, "number of x points across the data range");
  pred->add_option("--jobs", pred_jobs, "worker threads");
  pred->add_option("--out", pred_out, "output CSV (default stdout)");

  // simstudy
  auto* sim = app.add_subcommand("simstudy", "Monte Carlo IMSE / IBIAS^2 / IVAR tables");
  std::string sim_cells = "gc", sim_n = "100", sim_p0 = "0.1", sim_tau = "0.5,0.7,0.9";
  std::string sim_scale = "native", sim_margin = "2,5", sim_out, sim_json, sim_log;
  std::string sim_fit_c, sim_fit_d;
  std::size_t sim_r = 500, sim_g = 91;
  unsigned sim_jobs = 1;
  double sim_delta = kDefaultDelta;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--cells", sim_cells, "comma-separated DGPs");
  sim->add_option("--n", sim_n, "comma-separated sample sizes");
  sim->add_option("--p0", sim_p0, "comma-separated zero probabilities");
  sim->add_option("--tau", sim_tau, "comma-separated quantile levels");
  sim->add_option("--r", sim_r, "replications per cell");
  sim->add_option("--grid-size", sim_g, "evaluation grid points");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--jobs", sim_jobs, "worker threads");
  sim->add_option("--fit-c", sim_fit_c, "fitted occurrence family (default: the DGP's)");
  sim->add_option("--fit-d", sim_fit_d, "fitted positive-part family (default: the DGP's)");
  sim->add_option("--delta", sim_delta, "interpolation band exponent");
  sim->add_option("--param-scale", sim_scale, "native|kendall");
  sim->add_option("--margin-y", sim_margin, "Kumaraswamy shapes a,b of the response margin");
  sim->add_option("--out", sim_out, "output CSV (default stdout)");
  sim->add_option("--json", sim_json, "also write the report as JSON");
  sim->add_option("--log", sim_log, "diagnostics log (default <out>.log, else stderr)");

  // bands
  auto* bands = app.add_subcommand("bands", "bootstrap pointwise confidence bands");
  FitFlags band_flags;
  std::string band_in, band_out, band_tau = "0.5,0.7,0.9";
  std::size_t band_grid = 101, band_b = 300;
  double band_level = 0.95;
  unsigned band_jobs = 1;
  std::optional<std::uint64_t> band_seed;
  bands->add_option("--in", band_in, "input CSV")->required();
  band_flags.add(bands);
  bands->add_option("--tau", band_tau, "comma-separated quantile levels");
  bands->add_option("--grid", band_grid, "number of x points across the data range");
  bands->add_option("--b", band_b, "bootstrap replicates");
  bands->add_option("--level", band_level, "confidence level");
  bands->add_option("--seed", band_seed, "random seed");
  bands->add_option("--jobs", band_jobs, "worker threads");
  bands->add_option("--out", band_out, "output CSV (default stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "proposed vs ZILQR vs direct linear QR");
  FitFlags cmp_flags;
  std::string cmp_in, cmp_out, cmp_tau = "0.5,0.7,0.9";
  std::size_t cmp_grid = 101;
  unsigned cmp_jobs = 1;
  cmp->add_option("--in", cmp_in, "input CSV")->required();
  cmp_flags.add(cmp);
  cmp->add_option("--tau", cmp_tau, "comma-separated quantile levels");
  cmp->add_option("--grid", cmp_grid, "number of x points across the data range");
  cmp->add_option("--jobs", cmp_jobs, "worker threads");
  cmp->add_option("--out", cmp_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*gen) {
      if (gen_n < 1) throw DomainError("--n must be at least 1");
      const auto dgp = catalog_dgp(gen_dgp, gen_p0, parse_param_scale(gen_scale), parse_margin(gen_margin));
      const auto data = generate(dgp, gen_n, resolve_seed(gen_seed));
      Output out(gen_out);
      write_dataset(out.stream(), data);
      out.close();
    } else if (*fit) {
      const auto opts = fit_flags.options();
      const auto data = read_dataset_file(fit_in, true);
      const auto model = fit_two_part_indicator(data.x, data.z, data.y, fit_flags.fc(), fit_flags.fd(), opts);
      Output out(fit_out);
      out.stream() << fit_to_json(model, fit_seed).dump(2) << '\n';
      out.close();
    } else if (*pred) {
      const auto taus = parse_taus(pred_tau);
      const auto data = read_dataset_file(pred_in, true);
      const auto model = fit_from_json(read_json_file(pred_fit), data);
      const auto grid = equal_grid(data.x, pred_grid);
      std::vector<std::string> rows(grid.size());
      parallel_for(grid.size(), pred_jobs, [&](std::size_t g) {
        std::ostringstream os;
        for (double tau : taus) {
          QuantileRegion region;
          const double q = predict_quantile(model, tau, grid[g], &region);
          os << fmt_double(grid[g]) << ',' << fmt_double(tau) << ',' << fmt_double(q) << ','
             << to_string(region.tag) << ',' << fmt_double(region.pi0_at_x) << '\n';
        }
        rows[g] = os.str();
      });
      Output out(pred_out);
      out.stream() << "x,tau,quantile,region,pi0\n";
      for (const auto& r : rows) out.stream() << r;
      out.close();
    } else if (*sim) {
      if (sim_r < 2) throw DomainError("--r must be at least 2");
      check_delta(sim_delta);
      const auto cells = split_list(sim_cells);
      const auto ns = parse_sizes(sim_n, "--n");
      const auto p0s = parse_doubles(sim_p0, "--p0");
      const auto taus = parse_taus(sim_tau);
      const auto scale = parse_param_scale(sim_scale);
      const auto margin_y = parse_margin(sim_margin);
      const std::uint64_t seed = resolve_seed(sim_seed);
      if (sim_fit_c.empty() != sim_fit_d.empty())
        throw DomainError("--fit-c and --fit-d must be given together");
      for (const auto& c : cells) catalog_dgp(c, 0.1, scale, margin_y);
      for (double p : p0s)
        if (!(p > 0.0 && p < 1.0)) throw DomainError("--p0 values must lie in (0, 1)");

      SimReport all;
      for (const auto& cell : cells) {
        const bool copula_cell = catalog_dgp(cell, 0.1, scale, margin_y).kind == DgpKind::copula_pair;
        const std::vector<double> cell_p0 = copula_cell ? p0s : std::vector<double>{p0s.front()};
        for (std::size_t n : ns)
          for (double p0 : cell_p0) {
            SimCellConfig cfg;
            cfg.dgp = catalog_dgp(cell, p0, scale, margin_y);
            cfg.n = n;
            cfg.taus = taus;
            cfg.replications = sim_r;
            cfg.grid_size = sim_g;
            cfg.seed = seed;
            cfg.jobs = sim_jobs;
            cfg.options.delta = sim_delta;
            const auto proposed = sim_fit_c.empty()
                                      ? matching_proposed(cfg.dgp)
                                      : EstimatorSpec::proposed(parse_family(sim_fit_c), parse_family(sim_fit_d));
            cfg.estimators = {proposed, EstimatorSpec::zilqr()};
            auto rep = run_cell(cfg);
            for (auto& row : rep.rows) all.rows.push_back(std::move(row));
            for (auto& d : rep.diagnostics) all.diagnostics.push_back(std::move(d));
          }
      }
      Output out(sim_out);
      write_sim_report_csv(out.stream(), all.rows);
      out.close();
      if (!sim_json.empty()) {
        Output js(sim_json);
        js.stream() << sim_report_json(all.rows, all.diagnostics).dump(2) << '\n';
        js.close();
      }
      const std::string log_path = !sim_log.empty() ? sim_log : (sim_out.empty() ? "" : sim_out + ".log");
      if (!log_path.empty()) {
        Output log_out(log_path);
        for (const auto& d : all.diagnostics) log_out.stream() << d << '\n';
        log_out.close();
      } else {
        for (const auto& d : all.diagnostics) std::cerr << d << '\n';
      }
    } else if (*bands) {
      if (band_b < 2) throw DomainError("--b must be at least 2");
      if (!(band_level > 0.0 && band_level < 1.0)) throw DomainError("--level must lie in (0, 1)");
      const auto data = read_dataset_file(band_in, false);
      BootstrapConfig cfg;
      cfg.family_c = band_flags.fc();
      cfg.family_d = band_flags.fd();
      cfg.options = band_flags.options();
      cfg.taus = parse_taus(band_tau);
      cfg.x_grid = equal_grid(data.x, band_grid);
      cfg.replicates = band_b;
      cfg.level = band_level;
      cfg.seed = resolve_seed(band_seed);
      cfg.jobs = band_jobs;
      const auto result = bootstrap_replicates(data.x, data.y, cfg);
      if (result.failures > 0)
        warn(std::to_string(result.failures) + " bootstrap replicates failed and were dropped");
      Output out(band_out);
      write_bands_csv(out.stream(), bands_from_replicates(result, band_level));
      out.close();
    } else if (*cmp) {
      const auto taus = parse_taus(cmp_tau);
      const auto opts = cmp_flags.options();
      const auto data = read_dataset_file(cmp_in, false);
      const auto model = fit_two_part_indicator(data.x, data.z, data.y, cmp_flags.fc(), cmp_flags.fd(), opts);
      std::optional<ZilqrModel> zilqr;
      if (!model.zero_free) zilqr = fit_zilqr(data.x, data.z, data.y);
      const LinearQuantileSolver direct(data.x, data.y);
      std::vector<LinQuantFit> direct_fits;
      for (double tau : taus) direct_fits.push_back(direct.solve(tau));
      const auto grid = equal_grid(data.x, cmp_grid);

      std::vector<std::string> rows(grid.size());
      parallel_for(grid.size(), cmp_jobs, [&](std::size_t g) {
        std::ostringstream os;
        const double x = grid[g];
        for (std::size_t t = 0; t < taus.size(); ++t) {
          os << fmt_double(x) << ',' << fmt_double(taus[t]) << ','
             << fmt_double(predict_quantile(model, taus[t], x)) << ','
             << (zilqr ? fmt_double(zilqr->predict(taus[t], x)) : std::string()) << ','
             << fmt_double(direct_fits[t].predict(x)) << ',' << fmt_double(1.0 - pi0(model.binary, x))
             << ',' << (zilqr ? fmt_double(zilqr->logistic().prob_positive(x)) : std::string()) << '\n';
        }
        rows[g] = os.str();
      });
      Output out(cmp_out);
      out.stream() << "x,tau,proposed,zilqr,direct_qr,occurrence_proposed,occurrence_zilqr\n";
      for (const auto& r : rows) out.stream() << r;
      out.close();
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}

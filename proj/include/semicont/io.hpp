#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "semicont/bootstrap.hpp"
#include "semicont/diagnostics.hpp"
#include "semicont/dgp.hpp"
#include "semicont/simulation.hpp"
#include "semicont/two_part.hpp"

namespace semicont {

// Round-trip formatting for doubles written to CSV.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r' && ch != ' ' && ch != '\t') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, std::size_t line, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": column " + column + ": not a number '" + s + "'");
  return v;
}

}  // namespace detail

// Reads a dataset with header x,y (z derived as 1{y > 0}) or x,z,y.
// allow_negative permits negative responses on z = 1 rows (logistic/linear data).
inline Dataset read_dataset(std::istream& in, bool allow_negative = false) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw DataError("line 1: empty input (expected header x,y or x,z,y)");
  ++lineno;
  const auto header = detail::split_csv_line(line);
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") ix = static_cast<int>(c);
    else if (header[c] == "y") iy = static_cast<int>(c);
    else if (header[c] == "z") iz = static_cast<int>(c);
  }
  if (ix < 0 || iy < 0) throw DataError("line 1: header must contain columns x and y");
  const std::size_t width = header.size();

  Dataset data;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != width)
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(f.size()));
    const double x = detail::parse_number(f[ix], lineno, "x");
    const double y = detail::parse_number(f[iy], lineno, "y");
    int z = y > 0.0 ? 1 : 0;
    if (iz >= 0) {
      if (f[iz] == "0") z = 0;
      else if (f[iz] == "1") z = 1;
      else throw DataError("line " + std::to_string(lineno) + ": z must be 0 or 1, found '" + f[iz] + "'");
      if (z == 0 && y != 0.0)
        throw DataError("line " + std::to_string(lineno) + ": z = 0 requires y = 0");
    }
    if (y < 0.0 && !(allow_negative && iz >= 0 && z == 1))
      throw DataError("line " + std::to_string(lineno) + ": negative response y = " + f[iy]);
    data.x.push_back(x);
    data.z.push_back(z);
    data.y.push_back(y);
  }
  if (data.x.empty()) throw DataError("no data rows");
  return data;
}

inline Dataset read_dataset_file(const std::string& path, bool allow_negative = false) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_dataset(in, allow_negative);
}

inline void write_dataset(std::ostream& out, const Dataset& d) {
  out << "x,z,y\n";
  for (std::size_t i = 0; i < d.size(); ++i)
    out << fmt_double(d.x[i]) << ',' << d.z[i] << ',' << fmt_double(d.y[i]) << '\n';
}

// ---- fitted model ---------------------------------------------------------

inline nlohmann::ordered_json fit_to_json(const TwoPartFit& fit, std::optional<std::uint64_t> seed = {}) {
  nlohmann::ordered_json j;
  j["p0_hat"] = fit.binary.p0_hat;
  j["theta1"] = fit.binary.copula.theta();
  j["theta2"] = fit.positive.copula.theta();
  j["family_c"] = std::string(to_string(fit.binary.copula.family()));
  j["family_d"] = std::string(to_string(fit.positive.copula.family()));
  j["delta"] = fit.delta;
  j["n"] = fit.n;
  j["bandwidth_y"] = fit.positive.fy_pos.bandwidth();
  j["bandwidth_x"] = fit.positive.fx_pos.bandwidth();
  j["loglik_binary"] = fit.binary.loglik;
  j["loglik_positive"] = fit.positive.loglik;
  j["margin"] = std::string(to_string(fit.positive.margin));
  j["response_shift"] = fit.response_shift;
  j["zero_free"] = fit.zero_free;
  if (seed) j["seed"] = *seed;
  return j;
}

namespace detail {

template <class T>
T json_field(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("fit file: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("fit file: field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// Rebuilds a fitted model from its JSON summary and the data it was fitted on
// (the margins are nonparametric and are re-formed from the data).
inline TwoPartFit fit_from_json(const nlohmann::ordered_json& j, const Dataset& data) {
  const auto fc = parse_family(detail::json_field<std::string>(j, "family_c"));
  const auto fd = parse_family(detail::json_field<std::string>(j, "family_d"));
  const CopulaSpec c(fc, detail::json_field<double>(j, "theta1"));
  const CopulaSpec d(fd, detail::json_field<double>(j, "theta2"));
  const auto n = detail::json_field<std::size_t>(j, "n");
  if (n != data.size())
    throw DataError("fit file was estimated on " + std::to_string(n) + " rows, data has " +
                    std::to_string(data.size()));
  const double delta = detail::json_field<double>(j, "delta");
  check_delta(delta);
  const double shift = j.value("response_shift", 0.0);
  const bool zero_free = j.value("zero_free", false);
  const auto margin = parse_margin_estimate(j.value("margin", std::string("smoothed")));

  std::vector<double> x_pos, y_pos;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.z[i] == 1) {
      x_pos.push_back(data.x[i]);
      y_pos.push_back(data.y[i] + shift);
    }
  }
  BinaryFit binary{c, detail::json_field<double>(j, "p0_hat"), EmpiricalCdf(data.x, true),
                   detail::json_field<double>(j, "loglik_binary")};
  auto positive = assemble_positive(x_pos, y_pos, d, detail::json_field<double>(j, "bandwidth_y"),
                                    detail::json_field<double>(j, "bandwidth_x"), margin);
  return TwoPartFit{std::move(binary), std::move(positive), n, delta, shift, zero_free};
}

inline nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path + "': invalid JSON (" + e.what() + ")");
  }
}

// ---- simulation report ----------------------------------------------------

inline void write_sim_report_csv(std::ostream& out, const std::vector<SimRow>& rows) {
  out << "dgp,fit_c,fit_d,n,p0,tau,estimator,imse,ibias2,ivar,r,g,seed\n";
  for (const auto& r : rows)
    out << r.dgp << ',' << r.fit_c << ',' << r.fit_d << ',' << r.n << ',' << fmt_double(r.p0) << ','
        << fmt_double(r.tau) << ',' << r.estimator << ',' << fmt_double(r.imse) << ','
        << fmt_double(r.ibias2) << ',' << fmt_double(r.ivar) << ',' << r.r << ',' << r.g << ','
        << r.seed << '\n';
}

inline nlohmann::ordered_json sim_report_json(const std::vector<SimRow>& rows,
                                              const std::vector<std::string>& diagnostics) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["dgp"] = r.dgp;
    o["fit_c"] = r.fit_c;
    o["fit_d"] = r.fit_d;
    o["n"] = r.n;
    o["p0"] = std::isnan(r.p0) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.p0);
    o["tau"] = r.tau;
    o["estimator"] = r.estimator;
    for (const auto& [key, v] : {std::pair{"imse", r.imse}, {"ibias2", r.ibias2}, {"ivar", r.ivar}})
      o[key] = std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
    o["r"] = r.r;
    o["g"] = r.g;
    o["seed"] = r.seed;
    o["failures"] = r.failures;
    o["ok"] = r.ok;
    j["rows"].push_back(o);
  }
  j["diagnostics"] = diagnostics;
  return j;
}

// ---- bands ----------------------------------------------------------------

inline void write_bands_csv(std::ostream& out, const std::vector<BandResult>& bands) {
  out << "x,estimate,lower,upper,tau,level,b\n";
  for (const auto& band : bands)
    for (std::size_t g = 0; g < band.x.size(); ++g)
      out << fmt_double(band.x[g]) << ',' << fmt_double(band.estimate[g]) << ','
          << fmt_double(band.lower[g]) << ',' << fmt_double(band.upper[g]) << ','
          << (band.tau ? fmt_double(*band.tau) : std::string("pi0")) << ','
          << fmt_double(band.level) << ',' << band.b << '\n';
}

}  // namespace semicont

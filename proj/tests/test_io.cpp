#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "semicont/io.hpp"

using namespace semicont;

namespace {

std::string error_of(const std::string& text, bool allow_negative = false) {
  std::istringstream in(text);
  try {
    read_dataset(in, allow_negative);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ReadDataset, HeaderVariants) {
  std::istringstream a("x,y\n0.1,0\n0.2,1.5\n");
  const auto d = read_dataset(a);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.z[0], 0);
  EXPECT_EQ(d.z[1], 1);
  std::istringstream b("y,z,x\r\n0,0,0.3\r\n\r\n2.5,1,0.4\r\n");
  const auto e = read_dataset(b);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e.x[1], 0.4);
  EXPECT_EQ(e.y[1], 2.5);
}

TEST(ReadDataset, ErrorsNameTheLine) {
  EXPECT_NE(error_of("").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("a,b\n1,2\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("x,y\n0.1,0\n0.2,abc\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("x,y\n0.1,0\n0.2\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("x,y\n0.1,-1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("x,y\n0.1,inf\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("x,z,y\n0.1,2,1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("x,z,y\n0.1,0,1\n").find("z = 0 requires y = 0"), std::string::npos);
  EXPECT_NE(error_of("x,y\n").find("no data"), std::string::npos);
  EXPECT_EQ(error_of("x,z,y\n0.1,1,-1\n", true), "");
  EXPECT_NE(error_of("x,y\n0.1,-1\n", true).find("negative"), std::string::npos);
}

TEST(WriteDataset, RoundTripsExactly) {
  const auto d = generate(catalog_dgp("ll1"), 50, 3);
  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream in(out.str());
  const auto back = read_dataset(in, true);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.z, d.z);
}

TEST(FitJson, RoundTripGivesIdenticalPredictions) {
  const auto d = generate(catalog_dgp("cf", 0.2), 200, 4);
  for (auto margin : {MarginEstimate::smoothed, MarginEstimate::empirical}) {
    TwoPartOptions opts;
    opts.delta = 0.3;
    opts.positive.margin = margin;
    const auto fit = fit_two_part_indicator(d.x, d.z, d.y, CopulaFamily::clayton, CopulaFamily::frank, opts);
    const auto j = fit_to_json(fit, 17);
    EXPECT_EQ(j["seed"], 17);
    EXPECT_EQ(j["family_c"], "clayton");
    const auto text = j.dump(2);
    const auto back = fit_from_json(nlohmann::ordered_json::parse(text), d);
    EXPECT_EQ(back.binary.copula.theta(), fit.binary.copula.theta());
    EXPECT_EQ(back.positive.copula.theta(), fit.positive.copula.theta());
    EXPECT_EQ(back.positive.loglik, fit.positive.loglik);
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double x = 0.1; x < 0.5; x += 0.05)
        EXPECT_EQ(predict_quantile(back, tau, x), predict_quantile(fit, tau, x));
  }
}

TEST(FitJson, RejectsMismatchAndMissingFields) {
  const auto d = generate(catalog_dgp("gc", 0.2), 100, 5);
  const auto fit = fit_two_part(d.x, d.y, CopulaFamily::gaussian, CopulaFamily::clayton);
  auto j = fit_to_json(fit);
  EXPECT_FALSE(j.contains("seed"));
  const auto other = generate(catalog_dgp("gc", 0.2), 99, 5);
  EXPECT_THROW(fit_from_json(j, other), DataError);
  j.erase("theta1");
  EXPECT_THROW(fit_from_json(j, d), DataError);
  j = fit_to_json(fit);
  j["theta2"] = "big";
  EXPECT_THROW(fit_from_json(j, d), DataError);
}

TEST(Reports, CsvAndJsonShapes) {
  SimRow row;
  row.dgp = "gc";
  row.fit_c = "gaussian";
  row.fit_d = "clayton";
  row.n = 100;
  row.p0 = 0.1;
  row.tau = 0.5;
  row.estimator = "proposed";
  row.imse = 1.5;
  row.ibias2 = 0.5;
  row.ivar = 1.0;
  row.r = 500;
  row.g = 91;
  row.seed = 42;
  std::ostringstream csv;
  write_sim_report_csv(csv, {row});
  EXPECT_EQ(csv.str(),
            "dgp,fit_c,fit_d,n,p0,tau,estimator,imse,ibias2,ivar,r,g,seed\n"
            "gc,gaussian,clayton,100,0.10000000000000001,0.5,proposed,1.5,0.5,1,500,91,42\n");
  row.imse = std::numeric_limits<double>::quiet_NaN();
  const auto j = sim_report_json({row}, {"note"});
  EXPECT_TRUE(j["rows"][0]["imse"].is_null());
  EXPECT_EQ(j["diagnostics"][0], "note");

  BandResult band;
  band.x = {0.1};
  band.estimate = {0.2};
  band.lower = {0.1};
  band.upper = {0.3};
  band.b = 300;
  std::ostringstream bands;
  write_bands_csv(bands, {band});
  EXPECT_EQ(bands.str(), "x,estimate,lower,upper,tau,level,b\n0.10000000000000001,0.20000000000000001,0.10000000000000001,0.29999999999999999,pi0,0.94999999999999996,300\n");
}

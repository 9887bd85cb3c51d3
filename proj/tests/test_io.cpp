#include <charconv>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oica/io.hpp"

namespace {

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(oica::io::format_double(0.6), "0.6");
  EXPECT_EQ(oica::io::format_double(1.0), "1");
  EXPECT_EQ(oica::io::format_double(2.24928), "2.24928");
  oica::RandomStream rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
    const std::string s = oica::io::format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    ASSERT_EQ(back, v) << s;
  }
}

TEST(Csv, MomentsRowAtPointSix) {
  const std::vector<double> grid{0.0, 0.6, 1.0};
  const std::string csv = oica::io::moments_csv(grid);
  EXPECT_EQ(csv.substr(0, 11), "beta,m4,m6\n");
  const auto row = csv.find("\n0.6,");
  ASSERT_NE(row, std::string::npos) << csv;
  EXPECT_NEAR(std::stod(csv.substr(row + 5)), 2.24928, 1e-12);
  EXPECT_NE(csv.find("\n1,1,1\n"), std::string::npos) << csv;
}

TEST(Csv, PhaseTableLayoutWithNaN) {
  const std::vector<double> taus{0.03, 0.04};
  const std::vector<double> betas{0.6, 1.0};
  const auto table = oica::threshold_table(taus, betas);
  const std::string fixed = oica::io::phase_table_csv(table, 3);
  EXPECT_EQ(fixed, "tau,beta=0.6,beta=1\n0.03,0.480,0.125\n0.04,NaN,0.171\n");
  const std::string full = oica::io::phase_table_csv(table);
  EXPECT_NE(full.find("NaN"), std::string::npos);
  EXPECT_EQ(full.find("0.480,"), std::string::npos);
}

TEST(Csv, EnsembleHeader) {
  oica::EnsembleResult ens;
  ens.t = {0.0, 1.0};
  ens.q_mean = {0.3, 0.4};
  ens.q_std = {0.0, 0.1};
  ens.trials = {{{0.0, 1.0}, {0.3, 0.3}}, {{0.0, 1.0}, {0.3, 0.5}}};
  EXPECT_EQ(oica::io::ensemble_csv(ens),
            "t,q_mean,q_std,q_trial_0,q_trial_1\n0,0.3,0,0.3,0.3\n1,0.4,0.1,0.3,0.5\n");
}

TEST(Csv, CriticalCurveAndOde) {
  oica::CriticalRateCurve c{{0.0, 1.0}, {0.05, 0.16}};
  EXPECT_EQ(oica::io::critical_curve_csv(c), "beta,tau_bar\n0,0.05\n1,0.16\n");
  oica::OdeSolution sol;
  sol.t = {0.0, 0.5};
  sol.q = {0.25, 0.5};
  EXPECT_EQ(oica::io::ode_solution_csv(sol), "t,q\n0,0.25\n0.5,0.5\n");
}

}  // namespace

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oica/ode_dynamics.hpp"
#include "oracles.hpp"

namespace {

using oica::DriftParams;
using oica::SourceParams;

DriftParams params(double tau, double beta) {
  return DriftParams::from_source(tau, SourceParams(beta));
}

const std::vector<double> kBetas{0.0, 0.3, 0.6, 0.8, 1.0};
const std::vector<double> kTaus{0.02, 0.03, 0.04, 0.05, 0.06};

TEST(DriftParams, Validation) {
  EXPECT_THROW(DriftParams(-0.1, 1.8, 27.0 / 7.0), oica::InvalidArgument);
  EXPECT_THROW(DriftParams(0.03, 0.9, 1.0), oica::InvalidArgument);
  EXPECT_THROW(DriftParams(0.03, 2.0, 2.0), oica::InvalidArgument);  // 2 < 2^1.5
  EXPECT_NO_THROW(params(0.03, 0.6));
}

TEST(Drift, BoundaryValues) {
  for (const double tau : kTaus) {
    for (const double beta : kBetas) {
      const auto p = params(tau, beta);
      EXPECT_EQ(oica::drift(0.0, p), 0.0);
      EXPECT_NEAR(oica::drift(1.0, p), -tau * tau * p.m6, 1e-15);
      EXPECT_LT(oica::drift(1.0, p), 0.0);
    }
  }
}

TEST(Drift, HandEvaluatedMidpoint) {
  // g(0.5) = 0.3 - 0.03 * 0.5 * 11.357142857 at beta = 0.
  const auto p = params(0.03, 0.0);
  EXPECT_NEAR(oica::drift(0.5, p) / 0.03, 0.129643, 1e-6);
  EXPECT_NEAR(oica::stability_function(0.5, p),
              0.3 - 0.015 * (15.0 - 2.25 + 0.125 * (27.0 / 7.0 - 15.0)), 1e-12);
}

TEST(Drift, HornerMatchesLiteralTranscription) {
  for (const double tau : {0.0, 0.01, 0.03, 0.06, 0.2}) {
    for (int b = 0; b <= 20; ++b) {
      const auto p = params(tau, b / 20.0);
      for (int i = 0; i <= 100; ++i) {
        const double q = i / 100.0;
        EXPECT_NEAR(oica::drift(q, p), oica::test::drift_literal(q, tau, p.m4, p.m6), 1e-15);
      }
    }
  }
}

TEST(Drift, RejectsOutOfRange) {
  const auto p = params(0.03, 0.5);
  EXPECT_THROW(oica::drift(-1e-9, p), oica::InvalidArgument);
  EXPECT_THROW(oica::stability_function(1.0 + 1e-9, p), oica::InvalidArgument);
}

TEST(StabilityFunction, Examples) {
  EXPECT_LT(std::abs(oica::stability_function(0.081, params(0.02, 1.0))), 5e-3);
  EXPECT_NEAR(oica::stability_function(1.0, params(0.03, 0.0)), -0.03 * 27.0 / 7.0, 1e-12);
  EXPECT_NEAR(oica::stability_function(1.0, params(0.03, 0.0)), -0.1157143, 1e-7);
  EXPECT_EQ(oica::stability_function(0.0, params(0.03, 0.3)), 0.0);
}

TEST(FixedPoints, TableSpotValues) {
  EXPECT_NEAR(*oica::fixed_points(params(0.03, 0.6)).threshold, 0.480, 1e-3);
  EXPECT_FALSE(oica::fixed_points(params(0.04, 0.6)).threshold.has_value());
  EXPECT_NEAR(*oica::fixed_points(params(0.02, 0.0)).threshold, 0.142, 1e-3);
}

TEST(FixedPoints, MatchBisectionOracle) {
  for (const double tau : kTaus) {
    for (const double beta : kBetas) {
      const auto p = params(tau, beta);
      const auto fps = oica::fixed_points(p);
      const auto oracle = oica::test::bisection_roots(
          [&](double q) { return oica::test::drift_literal(q, tau, p.m4, p.m6); }, 1e-6, 1.0);
      ASSERT_EQ(fps.roots.size(), oracle.size()) << tau << ' ' << beta;
      for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(fps.roots[i], oracle[i], 1e-9);
    }
  }
}

TEST(FixedPoints, EvenCountUnstableThenStable) {
  for (int ti = 1; ti <= 100; ++ti) {
    const double tau = ti * 0.001;
    for (int b = 0; b <= 10; ++b) {
      const auto fps = oica::fixed_points(params(tau, b / 10.0));
      ASSERT_EQ(fps.crossing_count() % 2, 0u) << tau << ' ' << b;
      if (fps.roots.size() == 2) {
        EXPECT_EQ(fps.stabilities[0], oica::Stability::unstable);
        EXPECT_EQ(fps.stabilities[1], oica::Stability::stable);
        EXPECT_EQ(*fps.threshold, fps.roots[0]);
        EXPECT_EQ(*fps.informative_level, fps.roots[1]);
      }
    }
  }
}

TEST(FixedPoints, ThresholdNondecreasingInTau) {
  for (const double beta : kBetas) {
    double prev = 0.0;
    bool vanished = false;
    for (int ti = 1; ti <= 200; ++ti) {
      const auto thr = oica::fixed_points(params(ti * 0.0005, beta)).threshold;
      if (!thr) {
        vanished = true;
        continue;
      }
      EXPECT_FALSE(vanished) << "threshold reappeared at beta=" << beta;
      EXPECT_GE(*thr, prev);
      prev = *thr;
    }
  }
}

TEST(FixedPoints, GridSizeValidated) {
  oica::FixedPointOptions opts;
  opts.grid_size = 99;
  EXPECT_THROW(oica::fixed_points(params(0.03, 0.5), opts), oica::InvalidArgument);
}

TEST(FixedPoints, TangencyReportedAtCriticalRate) {
  // Bisect tau to the point where the two roots merge; the scan should then see a
  // touching extremum rather than a crossing.
  const double beta = 0.6;
  double lo = 0.03, hi = 0.04;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (oica::fixed_points(params(mid, beta)).threshold) lo = mid;
    else hi = mid;
  }
  const auto fps = oica::fixed_points(params(hi, beta));
  ASSERT_FALSE(fps.threshold.has_value());
  ASSERT_EQ(fps.roots.size(), 1u);
  EXPECT_EQ(fps.stabilities[0], oica::Stability::tangent);
  EXPECT_NEAR(fps.roots[0], 0.648, 0.01);
}

TEST(Integrate, BelowThresholdDecays) {
  const auto p = params(0.03, 0.6);
  const auto sol = oica::integrate(0.40, p, 2000.0, 0.01);
  EXPECT_LT(sol.q.back(), 1e-3);
  EXPECT_EQ(sol.terminal_class, oica::TerminalClass::uninformative);
}

TEST(Integrate, ConvergesToLargestRoot) {
  const auto p = params(0.03, 1.0);
  const auto oracle = oica::test::bisection_roots(
      [&](double q) { return oica::test::drift_literal(q, 0.03, p.m4, p.m6); }, 1e-6, 1.0);
  ASSERT_EQ(oracle.size(), 2u);
  // The approach to the stable level is slow (rate ~ tau |g'|), so give it time.
  const auto sol = oica::integrate(0.35, p, 2000.0, 0.01);
  EXPECT_NEAR(sol.q.back(), oracle[1], 1e-6);
  EXPECT_EQ(sol.terminal_class, oica::TerminalClass::informative);
}

TEST(Integrate, ShortHorizonValues) {
  // Frozen against an independent adaptive integrator (rtol 1e-10).
  const auto p = params(0.03, 1.0);
  const auto sol = oica::integrate(0.35, p, 20.0);
  EXPECT_NEAR(sol.q.back(), 0.5147751253514528, 1e-9);
  EXPECT_DOUBLE_EQ(sol.t.back(), 20.0);
  EXPECT_EQ(sol.t.size(), 20001u);
}

TEST(Integrate, HalvingStepChangesLittle) {
  const auto p = params(0.03, 0.8);
  const double a = oica::integrate(0.35, p, 50.0, 1e-3).q.back();
  const double b = oica::integrate(0.35, p, 50.0, 5e-4).q.back();
  EXPECT_LT(std::abs(a - b), 1e-8);
}

TEST(Integrate, FourthOrderConvergence) {
  // Large steps on a long horizon so the error sits well above round-off.
  const auto p = params(0.06, 1.0);
  const double t_end = 96.0;
  const double ref = oica::integrate(0.3, p, t_end, 0.5 / 16.0).q.back();
  std::vector<double> dts{4.0, 2.0, 1.0, 0.5};
  std::vector<double> errs;
  for (const double dt : dts) errs.push_back(std::abs(oica::integrate(0.3, p, t_end, dt).q.back() - ref));
  // Least-squares slope of log err vs log dt.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double n = static_cast<double>(dts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  EXPECT_NEAR(slope, 4.0, 0.5);
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double fitted = std::exp(intercept) * std::pow(dts[i], 4.0);
    const double ratio = errs[i] / fitted;
    EXPECT_GT(ratio, 0.25) << dts[i];
    EXPECT_LT(ratio, 4.0) << dts[i];
  }
}

TEST(Integrate, PreconditionsAndClamping) {
  const auto p = params(0.03, 0.5);
  EXPECT_THROW(oica::integrate(0.0, p, 1.0), oica::InvalidArgument);
  EXPECT_THROW(oica::integrate(0.5, p, 1.0, 0.0), oica::InvalidArgument);
  EXPECT_THROW(oica::integrate(0.5, p, -1.0), oica::InvalidArgument);
  const auto sol = oica::integrate(0.9999, params(0.06, 0.6), 100.0, 0.1);
  for (const double q : sol.q) {
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(DriftProfile, Examples) {
  const auto grid = oica::linspace(0.0, 1.0, 1000);
  const auto prof = oica::drift_profile(params(0.03, 1.0), grid);
  ASSERT_TRUE(prof.threshold.has_value());
  EXPECT_NEAR(*prof.threshold, 0.125, 1e-3);

  const std::vector<double> zero{0.0};
  const auto z = oica::drift_profile(params(0.03, 0.5), zero);
  ASSERT_EQ(z.q.size(), 1u);
  EXPECT_EQ(z.q[0], 0.0);
  EXPECT_EQ(z.g[0], 0.0);

  const auto mid = oica::drift_profile(params(0.03, 0.6), grid);
  EXPECT_NEAR(*mid.threshold, 0.480, 1e-3);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < 0.479) EXPECT_LT(mid.g[i], 0.0) << grid[i];
}

}  // namespace

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "oica/error.hpp"
#include "oica/ode_dynamics.hpp"
#include "oica/online_ica.hpp"
#include "oica/source_model.hpp"

namespace oica {

/// Initialization thresholds over a (tau, beta) grid; rows are tau, columns beta.
struct PhaseTable {
  std::vector<double> tau_grid;
  std::vector<double> beta_grid;
  std::vector<std::vector<std::optional<double>>> thresholds;

  [[nodiscard]] const std::optional<double>& at(std::size_t tau_index,
                                                std::size_t beta_index) const {
    return thresholds.at(tau_index).at(beta_index);
  }
};

inline std::optional<double> threshold_at(double tau, double beta) {
  return fixed_points(DriftParams::from_source(tau, SourceParams(beta))).threshold;
}

inline PhaseTable threshold_table(std::span<const double> tau_grid,
                                  std::span<const double> beta_grid) {
  detail::require(!tau_grid.empty() && !beta_grid.empty(), "grids must be nonempty");
  detail::require(std::is_sorted(tau_grid.begin(), tau_grid.end()) &&
                      std::is_sorted(beta_grid.begin(), beta_grid.end()),
                  "grids must be sorted");
  PhaseTable table;
  table.tau_grid.assign(tau_grid.begin(), tau_grid.end());
  table.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  table.thresholds.resize(tau_grid.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    table.thresholds[i].reserve(beta_grid.size());
    for (const double beta : beta_grid)
      table.thresholds[i].push_back(threshold_at(tau_grid[i], beta));
  }
  return table;
}

/// True when g has a zero crossing in (0, 1), i.e. an informative solution exists.
inline bool admits_threshold(double beta, double tau) {
  return threshold_at(tau, beta).has_value();
}

/// Bisection on admits_threshold; returns the largest tau found to admit a threshold.
inline double critical_tau(double beta, double tau_lo, double tau_hi, double tol = 1e-5) {
  detail::require(tau_lo < tau_hi && tau_lo >= 0.0, "need 0 <= tau_lo < tau_hi");
  detail::require(tol > 0.0, "tol must be positive");
  if (!admits_threshold(beta, tau_lo) || admits_threshold(beta, tau_hi))
    throw BracketError("critical_tau: bracket does not straddle the existence boundary");
  double lo = tau_lo;
  double hi = tau_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (admits_threshold(beta, mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

struct CriticalRateCurve {
  std::vector<double> beta_grid;
  std::vector<double> tau_bar;

  [[nodiscard]] std::size_t argmin() const {
    return static_cast<std::size_t>(std::min_element(tau_bar.begin(), tau_bar.end()) -
                                    tau_bar.begin());
  }
};

struct BracketSearch {
  double tau_lo = 1e-3;
  double tau_hi = 0.1;
  int max_expansions = 40;
};

inline CriticalRateCurve critical_tau_curve(std::span<const double> beta_grid, double tol = 1e-5,
                                            const BracketSearch& search = {}) {
  detail::require(!beta_grid.empty(), "beta grid must be nonempty");
  CriticalRateCurve curve;
  for (const double beta : beta_grid) {
    detail::require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    double lo = search.tau_lo;
    double hi = search.tau_hi;
    int expansions = 0;
    while (!admits_threshold(beta, lo)) {
      if (++expansions > search.max_expansions)
        throw BracketError("critical_tau_curve: no admitting tau found below the bracket");
      hi = lo;
      lo *= 0.5;
    }
    expansions = 0;
    while (admits_threshold(beta, hi)) {
      if (++expansions > search.max_expansions)
        throw BracketError("critical_tau_curve: tau_hi expansion limit reached");
      lo = hi;
      hi *= 2.0;
    }
    curve.beta_grid.push_back(beta);
    curve.tau_bar.push_back(critical_tau(beta, lo, hi, tol));
  }
  return curve;
}

enum class RunClass { informative, uninformative, threshold };
enum class ClassifyMode { ode, simulation };

struct SimulationSettings {
  std::size_t n = 4000;
  std::size_t trials = 20;
  double t_end = 400.0;
  std::uint64_t seed = 0;
  Engine engine = Engine::full;
  std::size_t record_every = 0;
  bool shared_feature = false;
  unsigned jobs = 1;
  int nonlinearity_sign = -1;

  [[nodiscard]] AlgoConfig algo(double tau, double q0) const {
    AlgoConfig cfg;
    cfg.tau = tau;
    cfg.n = n;
    cfg.q0 = q0;
    cfg.nonlinearity_sign = nonlinearity_sign;
    cfg.steps = static_cast<std::size_t>(std::llround(t_end * static_cast<double>(n)));
    cfg.seed = seed;
    return cfg;
  }

  [[nodiscard]] EnsembleOptions ensemble() const {
    EnsembleOptions opts;
    opts.trials = trials;
    opts.record_every = record_every;
    opts.engine = engine;
    opts.shared_feature = shared_feature;
    opts.jobs = jobs;
    return opts;
  }
};

/// Threshold comparison: within 1e-6 of the threshold counts as the boundary itself.
inline RunClass classify_ode(double beta, double tau, double q0) {
  detail::require(q0 > 0.0 && q0 < 1.0, "q0 must lie in (0, 1)");
  const auto thr = threshold_at(tau, beta);
  if (!thr) return RunClass::uninformative;
  if (std::abs(q0 - *thr) <= 1e-6) return RunClass::threshold;
  return q0 > *thr ? RunClass::informative : RunClass::uninformative;
}

struct SimulationClassification {
  RunClass run_class = RunClass::uninformative;
  std::optional<double> informative_level;
  double window_start = 0.0;
  double window_min_mean = 0.0;
  EnsembleResult ensemble;
};

// Informative iff the ensemble mean stays above informative_level - 0.05 over
// the final 10% of the horizon.
inline constexpr double kExceedanceMargin = 0.05;
inline constexpr double kExceedanceWindow = 0.10;

inline SimulationClassification classify_simulation(double beta, double tau, double q0,
                                                    const SimulationSettings& settings) {
  SimulationClassification out;
  const SourceParams source(beta);
  out.informative_level = fixed_points(DriftParams::from_source(tau, source)).informative_level;
  out.ensemble = run_ensemble(source, settings.algo(tau, q0), settings.ensemble());

  const auto& t = out.ensemble.t;
  out.window_start = (1.0 - kExceedanceWindow) * t.back();
  out.window_min_mean = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= out.window_start) out.window_min_mean = std::min(out.window_min_mean, out.ensemble.q_mean[i]);
  if (out.informative_level &&
      out.window_min_mean >= *out.informative_level - kExceedanceMargin)
    out.run_class = RunClass::informative;
  return out;
}

inline RunClass classify_run(double beta, double tau, double q0, ClassifyMode mode,
                             const SimulationSettings& settings = {}) {
  if (mode == ClassifyMode::ode) return classify_ode(beta, tau, q0);
  return classify_simulation(beta, tau, q0, settings).run_class;
}

struct ComparisonReport {
  std::vector<double> t;
  std::vector<double> q_mean;
  std::vector<double> q_std;
  std::vector<double> q_ode;
  double max_abs_deviation = 0.0;
  double mean_abs_deviation = 0.0;
};

/// Ensemble mean vs. the ODE solution (RK4, dt = 1e-3) interpolated onto the ensemble grid.
inline ComparisonReport compare_ode_vs_simulation(double beta, double tau, double q0,
                                                  const SimulationSettings& settings,
                                                  double ode_dt = 1e-3) {
  const SourceParams source(beta);
  const EnsembleResult ens = run_ensemble(source, settings.algo(tau, q0), settings.ensemble());
  const OdeSolution ode =
      integrate(q0, DriftParams::from_source(tau, source), std::max(ens.t.back(), ode_dt), ode_dt);

  ComparisonReport rep;
  rep.t = ens.t;
  rep.q_mean = ens.q_mean;
  rep.q_std = ens.q_std;
  rep.q_ode.reserve(ens.t.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < ens.t.size(); ++i) {
    const double ref = ode.at(ens.t[i]);
    rep.q_ode.push_back(ref);
    const double dev = std::abs(ens.q_mean[i] - ref);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
    sum += dev;
  }
  rep.mean_abs_deviation = sum / static_cast<double>(ens.t.size());
  return rep;
}

inline const char* to_string(RunClass c) noexcept {
  switch (c) {
    case RunClass::informative: return "informative";
    case RunClass::uninformative: return "uninformative";
    case RunClass::threshold: return "threshold";
  }
  return "unknown";
}

}  // namespace oica

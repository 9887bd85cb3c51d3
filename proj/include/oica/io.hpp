#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <system_error>

#include "oica/ode_dynamics.hpp"
#include "oica/online_ica.hpp"
#include "oica/phase_analysis.hpp"
#include "oica/source_model.hpp"

namespace oica::io {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// Fixed-point with the given number of decimals (table presentation).
inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return {buf, res.ptr};
}

inline std::string moments_csv(std::span<const double> beta_grid) {
  std::string out = "beta,m4,m6\n";
  for (const double beta : beta_grid) {
    const SourceMoments m = moments_analytic(SourceParams(beta));
    out += format_double(beta) + ',' + format_double(m.m4) + ',' + format_double(m.m6) + '\n';
  }
  return out;
}

inline std::string drift_profile_csv(const DriftProfile& profile) {
  std::string out = "q,g\n";
  for (std::size_t i = 0; i < profile.q.size(); ++i)
    out += format_double(profile.q[i]) + ',' + format_double(profile.g[i]) + '\n';
  return out;
}

inline std::string ode_solution_csv(const OdeSolution& sol) {
  std::string out = "t,q\n";
  for (std::size_t i = 0; i < sol.t.size(); ++i)
    out += format_double(sol.t[i]) + ',' + format_double(sol.q[i]) + '\n';
  return out;
}

/// Header t,q_mean,q_std,q_trial_0,...; one row per recorded time.
inline std::string ensemble_csv(const EnsembleResult& ens) {
  std::string out = "t,q_mean,q_std";
  for (std::size_t j = 0; j < ens.trials.size(); ++j) out += ",q_trial_" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < ens.t.size(); ++i) {
    out += format_double(ens.t[i]) + ',' + format_double(ens.q_mean[i]) + ',' +
           format_double(ens.q_std[i]);
    for (const auto& tr : ens.trials) out += ',' + format_double(tr.q[i]);
    out += '\n';
  }
  return out;
}

/// Rows tau, columns beta, "NaN" where no threshold exists. decimals < 0 keeps full precision.
inline std::string phase_table_csv(const PhaseTable& table, int decimals = -1) {
  std::string out = "tau";
  for (const double beta : table.beta_grid) out += ",beta=" + format_double(beta);
  out += '\n';
  for (std::size_t i = 0; i < table.tau_grid.size(); ++i) {
    out += format_double(table.tau_grid[i]);
    for (const auto& cell : table.thresholds[i]) {
      out += ',';
      if (!cell) out += "NaN";
      else out += decimals < 0 ? format_double(*cell) : format_fixed(*cell, decimals);
    }
    out += '\n';
  }
  return out;
}

inline std::string critical_curve_csv(const CriticalRateCurve& curve) {
  std::string out = "beta,tau_bar\n";
  for (std::size_t i = 0; i < curve.beta_grid.size(); ++i)
    out += format_double(curve.beta_grid[i]) + ',' + format_double(curve.tau_bar[i]) + '\n';
  return out;
}

inline std::string comparison_csv(const ComparisonReport& rep) {
  std::string out = "t,q_mean,q_std,q_ode\n";
  for (std::size_t i = 0; i < rep.t.size(); ++i)
    out += format_double(rep.t[i]) + ',' + format_double(rep.q_mean[i]) + ',' +
           format_double(rep.q_std[i]) + ',' + format_double(rep.q_ode[i]) + '\n';
  return out;
}

}  // namespace oica::io

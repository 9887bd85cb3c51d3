#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "oica/oica.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  unsigned jobs = 1;
};

struct MomentsArgs {
  std::string betas = "0:0.01:1";
};

struct DriftArgs {
  double tau = 0.03;
  std::string betas = "0,0.3,0.6,0.8,1";
  std::size_t q_points = 1000;
};

struct SimulateArgs {
  std::string betas = "0,0.3,0.6,0.8,1";
  double tau = 0.03;
  std::string q0 = "0.26,0.35";
  std::size_t n = 4000;
  std::size_t trials = 20;
  double t_end = 400.0;
  std::string engine = "reduced";
  std::size_t record_every = 0;
  bool shared_feature = false;
};

struct PhaseArgs {
  std::string taus = "0.02,0.03,0.04,0.05,0.06";
  std::string betas = "0,0.3,0.6,0.8,1";
  int decimals = -1;
};

struct CriticalArgs {
  std::string betas = "0:0.1:1";
  double tol = 1e-5;
};

struct CompareArgs {
  double beta = 1.0;
  double tau = 0.03;
  double q0 = 0.35;
  std::size_t n = 4000;
  std::size_t trials = 20;
  double t_end = 8.0;
  std::string engine = "full";
  double max_deviation = 0.05;
};

ordered_json number_or_null(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string key_number(double v) { return oica::io::format_double(v); }

oica::Engine parse_engine(const std::string& s) {
  if (s == "full") return oica::Engine::full;
  if (s == "reduced") return oica::Engine::reduced;
  throw oica::cli::UsageError("engine must be 'full' or 'reduced'");
}

std::uint64_t require_seed(const Common& c) {
  if (!c.seed) throw oica::cli::UsageError("--seed is required for stochastic commands");
  return *c.seed;
}

class Writer {
 public:
  explicit Writer(const Common& common) : dir_(common.out_dir), json_(common.format == "json") {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw oica::cli::IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  /// Writes a CSV table, or its column-oriented JSON form under --format json.
  void table(const std::string& stem, const std::string& csv) const {
    if (!json_) {
      text(stem + ".csv", csv);
      return;
    }
    ordered_json doc = ordered_json::object();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
      std::istringstream hs(line);
      std::string h;
      while (std::getline(hs, h, ',')) {
        header.push_back(h);
        doc[h] = ordered_json::array();
      }
    }
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string cell;
      for (std::size_t j = 0; std::getline(ls, cell, ',') && j < header.size(); ++j) {
        if (cell == "NaN") doc[header[j]].push_back(nullptr);
        else doc[header[j]].push_back(std::stod(cell));
      }
    }
    text(stem + ".json", doc.dump(2) + "\n");
  }

  void json(const std::string& name, const ordered_json& doc) const { text(name, doc.dump(2) + "\n"); }

  void text(const std::string& name, const std::string& content) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw oica::cli::IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw oica::cli::IoError("write failed for " + path.string());
  }

 private:
  fs::path dir_;
  bool json_;
};

ordered_json envelope(const std::string& command, const Common& c, ordered_json config) {
  ordered_json doc;
  doc["command"] = command;
  doc["version"] = OICA_VERSION;
  config["out_dir"] = c.out_dir;
  config["format"] = c.format;
  config["jobs"] = c.jobs;
  if (c.seed) config["seed"] = *c.seed;
  doc["config"] = std::move(config);
  return doc;
}

int run_moments(const Common& c, const MomentsArgs& a) {
  const auto grid = oica::cli::parse_grid(a.betas);
  for (const double b : grid)
    if (b < 0.0 || b > 1.0) throw oica::cli::UsageError("beta values must lie in [0, 1]");
  const Writer w(c);
  w.table("moments", oica::io::moments_csv(grid));
  const auto arg = oica::moment_argmax_on_grid(grid);
  const auto cont = oica::moment_argmax_continuous();
  auto doc = envelope("moments", c, {{"betas", a.betas}});
  doc["grid_argmax"] = {{"m4", arg.beta_m4}, {"m6", arg.beta_m6}};
  doc["continuous_argmax"] = {{"m4", cont.beta_m4}, {"m6", cont.beta_m6}};
  doc["continuous_max_m4"] = oica::moments_analytic(oica::SourceParams(cont.beta_m4)).m4;
  w.json("moments_summary.json", doc);
  return kExitOk;
}

int run_drift(const Common& c, const DriftArgs& a) {
  const auto betas = oica::cli::parse_grid(a.betas);
  if (a.q_points < 1) throw oica::cli::UsageError("--q-points must be at least 1");
  const auto qgrid = oica::linspace(0.0, 1.0, a.q_points);
  const Writer w(c);
  auto doc = envelope("drift", c, {{"tau", a.tau}, {"betas", a.betas}, {"q_points", a.q_points}});
  ordered_json markers = ordered_json::array();
  std::string marker_csv = "beta,threshold\n";
  for (const double beta : betas) {
    const auto p = oica::DriftParams::from_source(a.tau, oica::SourceParams(beta));
    const auto prof = oica::drift_profile(p, qgrid);
    w.table("drift_beta=" + key_number(beta), oica::io::drift_profile_csv(prof));
    markers.push_back({{"beta", beta}, {"threshold", number_or_null(prof.threshold)}});
    if (prof.threshold)
      marker_csv += key_number(beta) + ',' + key_number(*prof.threshold) + '\n';
  }
  w.table("drift_markers", marker_csv);
  doc["markers"] = markers;
  w.json("drift_summary.json", doc);
  return kExitOk;
}

int run_simulate(const Common& c, const SimulateArgs& a) {
  const std::uint64_t seed = require_seed(c);
  const auto betas = oica::cli::parse_grid(a.betas);
  const auto q0s = oica::cli::parse_grid(a.q0);
  if (a.trials < 1) throw oica::cli::UsageError("--trials must be at least 1");
  if (!(a.t_end > 0.0)) throw oica::cli::UsageError("--t-end must be positive");

  oica::SimulationSettings s;
  s.n = a.n;
  s.trials = a.trials;
  s.t_end = a.t_end;
  s.seed = seed;
  s.engine = parse_engine(a.engine);
  s.record_every = a.record_every;
  s.shared_feature = a.shared_feature;
  s.jobs = c.jobs;

  const Writer w(c);
  auto doc = envelope("simulate", c,
                      {{"betas", a.betas}, {"tau", a.tau}, {"q0", a.q0}, {"n", a.n},
                       {"trials", a.trials}, {"t_end", a.t_end}, {"engine", a.engine},
                       {"record_every", s.ensemble().resolved_record_every(a.n)},
                       {"shared_feature", a.shared_feature}});
  ordered_json runs = ordered_json::array();
  for (const double q0 : q0s) {
    for (const double beta : betas) {
      const auto res = oica::classify_simulation(beta, a.tau, q0, s);
      w.table("simulate_beta=" + key_number(beta) + "_q0=" + key_number(q0),
              oica::io::ensemble_csv(res.ensemble));
      runs.push_back({{"beta", beta},
                      {"q0", q0},
                      {"threshold", number_or_null(oica::threshold_at(a.tau, beta))},
                      {"informative_level", number_or_null(res.informative_level)},
                      {"final_q_mean", res.ensemble.q_mean.back()},
                      {"final_q_std", res.ensemble.q_std.back()},
                      {"window_min_mean", res.window_min_mean},
                      {"classification", oica::to_string(res.run_class)},
                      {"ode_classification", oica::to_string(oica::classify_ode(beta, a.tau, q0))}});
    }
  }
  doc["runs"] = runs;
  w.json("simulate_summary.json", doc);
  return kExitOk;
}

int run_phase(const Common& c, const PhaseArgs& a) {
  const auto taus = oica::cli::parse_grid(a.taus);
  const auto betas = oica::cli::parse_grid(a.betas);
  const auto table = oica::threshold_table(taus, betas);
  const Writer w(c);
  w.table("phase_table", oica::io::phase_table_csv(table, a.decimals));
  auto doc = envelope("phase", c, {{"taus", a.taus}, {"betas", a.betas}, {"decimals", a.decimals}});
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < betas.size(); ++j) row.push_back(number_or_null(table.at(i, j)));
    rows.push_back({{"tau", taus[i]}, {"thresholds", row}});
  }
  doc["beta_grid"] = betas;
  doc["rows"] = rows;
  w.json("phase_summary.json", doc);
  return kExitOk;
}

int run_critical(const Common& c, const CriticalArgs& a) {
  const auto betas = oica::cli::parse_grid(a.betas);
  for (const double b : betas)
    if (b < 0.0 || b > 1.0) throw oica::cli::UsageError("beta values must lie in [0, 1]");
  if (!(a.tol > 0.0)) throw oica::cli::UsageError("--tol must be positive");
  const auto curve = oica::critical_tau_curve(betas, a.tol);
  const Writer w(c);
  w.table("critical_tau", oica::io::critical_curve_csv(curve));
  auto doc = envelope("critical-tau", c, {{"betas", a.betas}, {"tol", a.tol}});
  doc["argmin_beta"] = curve.beta_grid[curve.argmin()];
  doc["min_tau_bar"] = curve.tau_bar[curve.argmin()];
  w.json("critical_tau_summary.json", doc);
  return kExitOk;
}

int run_compare(const Common& c, const CompareArgs& a) {
  oica::SimulationSettings s;
  s.n = a.n;
  s.trials = a.trials;
  s.t_end = a.t_end;
  s.seed = require_seed(c);
  s.engine = parse_engine(a.engine);
  s.jobs = c.jobs;
  if (a.trials < 1) throw oica::cli::UsageError("--trials must be at least 1");
  if (!(a.t_end > 0.0)) throw oica::cli::UsageError("--t-end must be positive");

  const auto rep = oica::compare_ode_vs_simulation(a.beta, a.tau, a.q0, s);
  const bool passed = rep.mean_abs_deviation < a.max_deviation;
  const Writer w(c);
  w.table("compare", oica::io::comparison_csv(rep));
  auto doc = envelope("compare", c,
                      {{"beta", a.beta}, {"tau", a.tau}, {"q0", a.q0}, {"n", a.n},
                       {"trials", a.trials}, {"t_end", a.t_end}, {"engine", a.engine},
                       {"max_deviation", a.max_deviation}});
  doc["mean_abs_deviation"] = rep.mean_abs_deviation;
  doc["max_abs_deviation"] = rep.max_abs_deviation;
  doc["final_q_std"] = rep.q_std.back();
  doc["passed"] = passed;
  doc["finite_size_regime"] = !passed;
  w.json("compare_report.json", doc);
  return passed ? kExitOk : kExitThreshold;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<std::string> subcommands{"moments", "drift", "simulate", "phase", "critical-tau",
                                          "compare"};
  CLI::App app{"Online ICA overlap dynamics: moments, drift, simulation and phase analysis", "oica"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", OICA_VERSION);

  Common common;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for stochastic commands");
  app.add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", common.format, "Data file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  app.add_option("--config", "Flat key=value config file; flags override it");

  MomentsArgs moments;
  auto* c_moments = app.add_subcommand("moments", "Fourth and sixth source moments over a beta grid");
  c_moments->fallthrough();
  c_moments->add_option("--betas", moments.betas, "Grid: a,b,c or lo:step:hi")->capture_default_str();

  DriftArgs drift;
  auto* c_drift = app.add_subcommand("drift", "Stability profile g(q) per beta with threshold markers");
  c_drift->fallthrough();
  c_drift->add_option("--tau", drift.tau)->capture_default_str();
  c_drift->add_option("--betas", drift.betas)->capture_default_str();
  c_drift->add_option("--q-points", drift.q_points, "Intervals on [0, 1]")->capture_default_str();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo ensembles and convergence classification");
  c_sim->fallthrough();
  c_sim->add_option("--betas", sim.betas)->capture_default_str();
  c_sim->add_option("--tau", sim.tau)->capture_default_str();
  c_sim->add_option("--q0", sim.q0, "Initial overlaps (grid syntax)")->capture_default_str();
  c_sim->add_option("--n", sim.n)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40))->capture_default_str();
  c_sim->add_option("--trials", sim.trials)->capture_default_str();
  c_sim->add_option("--t-end", sim.t_end, "Horizon in rescaled time k/n")->capture_default_str();
  c_sim->add_option("--engine", sim.engine, "full | reduced")->capture_default_str();
  c_sim->add_option("--record-every", sim.record_every, "Steps between samples (0: n/100)");
  c_sim->add_flag("--shared-feature", sim.shared_feature, "One u for all trials");

  PhaseArgs phase;
  auto* c_phase = app.add_subcommand("phase", "Threshold table over (tau, beta)");
  c_phase->fallthrough();
  c_phase->add_option("--taus", phase.taus)->capture_default_str();
  c_phase->add_option("--betas", phase.betas)->capture_default_str();
  c_phase->add_option("--decimals", phase.decimals, "Fixed decimals in the CSV (-1: full precision)")
      ->capture_default_str();

  CriticalArgs crit;
  auto* c_crit = app.add_subcommand("critical-tau", "Critical learning rate per beta");
  c_crit->fallthrough();
  c_crit->add_option("--betas", crit.betas)->capture_default_str();
  c_crit->add_option("--tol", crit.tol)->capture_default_str();

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Ensemble mean vs. ODE solution");
  c_cmp->fallthrough();
  c_cmp->add_option("--beta", cmp.beta)->capture_default_str();
  c_cmp->add_option("--tau", cmp.tau)->capture_default_str();
  c_cmp->add_option("--q0", cmp.q0)->capture_default_str();
  c_cmp->add_option("--n", cmp.n)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40))->capture_default_str();
  c_cmp->add_option("--trials", cmp.trials)->capture_default_str();
  c_cmp->add_option("--t-end", cmp.t_end)->capture_default_str();
  c_cmp->add_option("--engine", cmp.engine, "full | reduced")->capture_default_str();
  c_cmp->add_option("--max-deviation", cmp.max_deviation, "Mean |deviation| accepted")->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = oica::cli::expand_config(std::move(args), subcommands);
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const oica::cli::UsageError& e) {
    std::cerr << "oica: " << e.what() << '\n';
    return kExitUsage;
  } catch (const oica::cli::IoError& e) {
    std::cerr << "oica: " << e.what() << '\n';
    return kExitIo;
  }
  if (*seed_opt) common.seed = seed_value;

  try {
    if (*c_moments) return run_moments(common, moments);
    if (*c_drift) return run_drift(common, drift);
    if (*c_sim) return run_simulate(common, sim);
    if (*c_phase) return run_phase(common, phase);
    if (*c_crit) return run_critical(common, crit);
    if (*c_cmp) return run_compare(common, cmp);
  } catch (const oica::cli::UsageError& e) {
    std::cerr << "oica: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const oica::InvalidArgument& e) {
    std::cerr << "oica: invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const oica::BracketError& e) {
    std::cerr << "oica: " << e.what() << '\n';
    return kExitUsage;
  } catch (const oica::cli::IoError& e) {
    std::cerr << "oica: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "oica: error: " << e.what() << '\n';
    return kExitThreshold;
  }
  return kExitUsage;
}

// Runs one full-dimensional trial and prints the simulated squared overlap next
// to the ODE prediction.

#include <cstdio>

#include "oica/oica.hpp"

int main() {
  const oica::SourceParams source(1.0);
  oica::AlgoConfig cfg;
  cfg.n = 2000;
  cfg.tau = 0.03;
  cfg.q0 = 0.35;
  cfg.steps = 10 * cfg.n;
  cfg.seed = 42;

  const oica::RandomStream rng(cfg.seed);
  oica::RandomStream feature_rng = rng.fork(0);
  const auto u = oica::generate_feature(cfg.n, feature_rng);
  const auto traj = oica::run_trial(u, source, cfg, cfg.n / 2, rng);
  const auto ode = oica::integrate(cfg.q0, oica::DriftParams::from_source(cfg.tau, source), 10.0);

  std::printf("%6s  %10s  %10s\n", "t", "q_sim", "q_ode");
  for (std::size_t i = 0; i < traj.t.size(); ++i)
    std::printf("%6.2f  %10.6f  %10.6f\n", traj.t[i], traj.q[i], ode.at(traj.t[i]));
  return 0;
}

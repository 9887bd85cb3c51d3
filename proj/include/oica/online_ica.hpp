#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <boost/random/chi_squared_distribution.hpp>

#include "oica/data_stream.hpp"
#include "oica/error.hpp"
#include "oica/random_stream.hpp"
#include "oica/source_model.hpp"

namespace oica {

struct AlgoConfig {
  double tau = 0.03;
  std::size_t n = 4000;
  double q0 = 0.26;
  int nonlinearity_sign = -1;  // f(x) = s x^3; -1 matches the sub-Gaussian sources here
  std::size_t steps = 0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(tau >= 0.0 && std::isfinite(tau), "tau must be finite and >= 0");
    detail::require(n >= 2, "n must be at least 2");
    detail::require(q0 > 0.0 && q0 < 1.0, "q0 must lie in (0, 1)");
    detail::require(nonlinearity_sign == 1 || nonlinearity_sign == -1,
                    "nonlinearity_sign must be +1 or -1");
  }

  [[nodiscard]] double nonlinearity(double x) const noexcept {
    return static_cast<double>(nonlinearity_sign) * x * x * x;
  }
};

/// Element-wise prior regularizer hook; only the zero prior is provided.
struct ZeroPrior {
  constexpr double operator()(double) const noexcept { return 0.0; }
};

struct EstimateState {
  std::vector<double> x;
  std::size_t k = 0;
};

struct Trajectory {
  std::vector<double> t;  // k / n
  std::vector<double> q;  // (u'x / n)^2
};

/// (u'x / n)^2, clipped at 1 against round-off.
inline double squared_overlap(const FeatureVector& u, std::span<const double> x) {
  const double overlap = detail::dot(u.entries(), x) / static_cast<double>(u.dimension());
  return std::min(1.0, overlap * overlap);
}

/// x0 = sqrt(q0) u + sqrt(n (1 - q0)) w with w a random unit vector orthogonal to u.
inline EstimateState init_estimate(const FeatureVector& u, double q0, RandomStream& rng) {
  detail::require(q0 > 0.0 && q0 < 1.0, "q0 must lie in (0, 1)");
  const std::size_t n = u.dimension();
  const auto ue = u.entries();
  const double nd = static_cast<double>(n);
  std::vector<double> w(n);
  double norm = 0.0;
  while (norm < 1e-8) {
    for (auto& wi : w) wi = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      const double coef = detail::dot(ue, w) / nd;
      for (std::size_t i = 0; i < n; ++i) w[i] -= coef * ue[i];
    }
    norm = std::sqrt(detail::dot(w, w));
  }
  const double a = std::sqrt(q0);
  const double b = std::sqrt(nd * (1.0 - q0)) / norm;
  EstimateState state;
  state.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.x[i] = a * ue[i] + b * w[i];
  return state;
}

/**
 * One projected stochastic-gradient update, in place:
 *
 *   x~ = x + tau / sqrt(n) * f(y'x / sqrt(n)) * y - tau / n * prior(x)
 *   x  = sqrt(n) * x~ / ||x~||
 *
 * A zero increment leaves x untouched.
 */
template <class Prior = ZeroPrior>
void step_in_place(EstimateState& state, std::span<const double> y, const AlgoConfig& config,
                   const Prior& prior = {}) {
  const std::size_t n = state.x.size();
  detail::require(y.size() == n, "observation dimension does not match the estimate");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double inner = detail::dot(y, state.x) / sqrt_n;
  const double alpha = config.tau / sqrt_n * config.nonlinearity(inner);
  constexpr bool zero_prior = std::is_same_v<Prior, ZeroPrior>;

  ++state.k;
  if (alpha == 0.0 && (zero_prior || config.tau == 0.0)) return;

  const double prior_rate = config.tau / static_cast<double>(n);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double xi = state.x[i] + alpha * y[i];
    if constexpr (!zero_prior) xi -= prior_rate * prior(state.x[i]);
    state.x[i] = xi;
    norm2 += xi * xi;
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw DegenerateState("estimate norm degenerated during update at step " +
                          std::to_string(state.k));
  const double scale = sqrt_n / std::sqrt(norm2);
  for (auto& xi : state.x) xi *= scale;
}

template <class Prior = ZeroPrior>
EstimateState step(EstimateState state, const Observation& y, const AlgoConfig& config,
                   const Prior& prior = {}) {
  step_in_place(state, y.values, config, prior);
  return state;
}

namespace detail {

inline void record_point(Trajectory& traj, std::size_t k, std::size_t n, double q) {
  traj.t.push_back(static_cast<double>(k) / static_cast<double>(n));
  traj.q.push_back(q);
}

inline bool should_record(std::size_t k, std::size_t steps, std::size_t every) {
  return k % every == 0 || k == steps;
}

}  // namespace detail

/// Full n-dimensional simulation. The stream forks 1 (init) and 2 (observations).
inline Trajectory run_trial(const FeatureVector& u, const SourceParams& source,
                            const AlgoConfig& config, std::size_t record_every,
                            const RandomStream& rng) {
  config.validate();
  detail::require(record_every >= 1, "record_every must be at least 1");
  detail::require(u.dimension() == config.n, "feature dimension does not match config.n");

  RandomStream init_rng = rng.fork(1);
  RandomStream obs_rng = rng.fork(2);
  EstimateState state = init_estimate(u, config.q0, init_rng);

  Trajectory traj;
  const std::size_t points = config.steps / record_every + 2;
  traj.t.reserve(points);
  traj.q.reserve(points);
  detail::record_point(traj, 0, config.n, squared_overlap(u, state.x));

  Observation obs;
  obs.values.reserve(config.n);
  for (std::size_t k = 1; k <= config.steps; ++k) {
    sample_observation_into(u, source, obs_rng, obs);
    step_in_place(state, obs.values, config);
    if (detail::should_record(k, config.steps, record_every))
      detail::record_point(traj, k, config.n, squared_overlap(u, state.x));
  }
  return traj;
}

inline Trajectory run_trial(const FeatureVector& u, const SourceParams& source,
                            const AlgoConfig& config, std::size_t record_every) {
  return run_trial(u, source, config, record_every, RandomStream(config.seed));
}

/**
 * Overlap-exact reduced simulation of the same algorithm.
 *
 * The noise is isotropic on the complement of u, so the pair
 * (Q, R) = (u'x / n, |x_perp| / sqrt(n)) is a Markov chain on its own: one
 * step needs only the source draw c, the noise component xi ~ N(0, 1) along
 * the current x_perp, and the squared norm of the remaining noise,
 * chi^2 with n - 2 degrees of freedom. The law of the q trajectory equals the
 * full simulation's for every n; per-step cost is O(1) instead of O(n).
 */
inline Trajectory run_trial_reduced(const SourceParams& source, const AlgoConfig& config,
                                    std::size_t record_every, const RandomStream& rng) {
  config.validate();
  detail::require(record_every >= 1, "record_every must be at least 1");

  RandomStream obs_rng = rng.fork(2);
  const std::size_t n = config.n;
  const double rate = config.tau / static_cast<double>(n);
  const bool has_rest = n > 2;
  boost::random::chi_squared_distribution<double> rest_norm2(has_rest ? double(n - 2) : 1.0);

  double overlap = std::sqrt(config.q0);
  double perp = std::sqrt(1.0 - config.q0);

  Trajectory traj;
  const std::size_t points = config.steps / record_every + 2;
  traj.t.reserve(points);
  traj.q.reserve(points);
  detail::record_point(traj, 0, n, config.q0);

  for (std::size_t k = 1; k <= config.steps; ++k) {
    const double c = sample_source(source, obs_rng);
    const double xi = obs_rng.normal();
    const double rest = has_rest ? std::sqrt(rest_norm2(obs_rng)) : 0.0;
    const double z = overlap * c + perp * xi;
    const double a = rate * config.nonlinearity(z);
    if (a != 0.0) {
      const double pu = overlap + a * c;
      const double pw = perp + a * xi;
      const double pr = a * rest;
      const double norm = std::sqrt(pu * pu + pw * pw + pr * pr);
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw DegenerateState("estimate norm degenerated during update at step " +
                              std::to_string(k));
      overlap = pu / norm;
      perp = std::hypot(pw, pr) / norm;
    }
    if (detail::should_record(k, config.steps, record_every))
      detail::record_point(traj, k, n, std::min(1.0, overlap * overlap));
  }
  return traj;
}

enum class Engine { full, reduced };

struct EnsembleOptions {
  std::size_t trials = 20;
  std::size_t record_every = 0;  // 0 selects max(1, n / 100)
  Engine engine = Engine::full;
  bool shared_feature = false;  // one u for all trials instead of a fresh u per trial
  unsigned jobs = 1;

  [[nodiscard]] std::size_t resolved_record_every(std::size_t n) const noexcept {
    return record_every != 0 ? record_every : std::max<std::size_t>(1, n / 100);
  }
};

/// Pointwise running mean and population variance; merge() is Chan's combination.
class PointwiseStats {
 public:
  explicit PointwiseStats(std::size_t points) : mean_(points, 0.0), m2_(points, 0.0) {}

  void push(std::span<const double> values) {
    detail::require(values.size() == mean_.size(), "trajectory length mismatch");
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double delta = values[i] - mean_[i];
      mean_[i] += delta * inv;
      m2_[i] += delta * (values[i] - mean_[i]);
    }
  }

  void merge(const PointwiseStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double total = na + nb;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = other.mean_[i] - mean_[i];
      mean_[i] += delta * nb / total;
      m2_[i] += other.m2_[i] + delta * delta * na * nb / total;
    }
    count_ += other.count_;
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] const std::vector<double>& mean() const noexcept { return mean_; }

  [[nodiscard]] std::vector<double> stddev() const {
    std::vector<double> out(m2_.size(), 0.0);
    if (count_ == 0) return out;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::sqrt(std::max(0.0, m2_[i] / static_cast<double>(count_)));
    return out;
  }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct EnsembleResult {
  std::vector<Trajectory> trials;
  std::vector<double> t;
  std::vector<double> q_mean;
  std::vector<double> q_std;
};

namespace detail {

/// Runs body(i) for i in [0, count) on up to jobs threads; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

constexpr std::uint64_t kSharedFeatureStream = 0x5eed'f00d'cafe'0001ULL;

}  // namespace detail

/**
 * Independent trials on per-trial substreams of config.seed.
 *
 * Trial i uses RandomStream(seed).fork(i): fork 0 of that draws u (unless a
 * shared u is requested), forks 1 and 2 drive the trial itself. Results do not
 * depend on jobs.
 */
inline EnsembleResult run_ensemble(const SourceParams& source, const AlgoConfig& config,
                                   const EnsembleOptions& options) {
  config.validate();
  detail::require(options.trials >= 1, "trials must be at least 1");
  const std::size_t every = options.resolved_record_every(config.n);
  const RandomStream master(config.seed);

  std::vector<Trajectory> trials(options.trials);
  if (options.engine == Engine::full) {
    std::vector<double> shared_entries;
    if (options.shared_feature) {
      RandomStream feature_rng = master.fork(detail::kSharedFeatureStream);
      const FeatureVector u = generate_feature(config.n, feature_rng);
      shared_entries.assign(u.entries().begin(), u.entries().end());
    }
    detail::parallel_for(options.trials, options.jobs, [&](std::size_t i) {
      const RandomStream trial_rng = master.fork(i);
      RandomStream feature_rng = trial_rng.fork(0);
      const FeatureVector u = options.shared_feature ? FeatureVector(shared_entries)
                                                     : generate_feature(config.n, feature_rng);
      trials[i] = run_trial(u, source, config, every, trial_rng);
    });
  } else {
    detail::parallel_for(options.trials, options.jobs, [&](std::size_t i) {
      trials[i] = run_trial_reduced(source, config, every, master.fork(i));
    });
  }

  // Reduce in trial order so the summary is bit-identical for any jobs.
  PointwiseStats stats(trials.front().q.size());
  for (const auto& tr : trials) stats.push(tr.q);

  EnsembleResult out;
  out.t = trials.front().t;
  out.q_mean = stats.mean();
  out.q_std = stats.stddev();
  out.trials = std::move(trials);
  return out;
}

}  // namespace oica

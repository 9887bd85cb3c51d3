#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "oica/error.hpp"
#include "oica/random_stream.hpp"
#include "oica/source_model.hpp"

namespace oica {

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace detail

/// Hidden direction u with ||u|| = sqrt(n).
class FeatureVector {
 public:
  explicit FeatureVector(std::vector<double> entries) : entries_(std::move(entries)) {
    detail::require(entries_.size() >= 2, "feature dimension must be at least 2");
    const double n = static_cast<double>(entries_.size());
    const double norm2 = detail::dot(entries_, entries_);
    detail::require(std::abs(norm2 - n) <= 1e-9 * n, "feature vector must have norm sqrt(n)");
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return entries_.size(); }
  [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return entries_[i]; }

 private:
  std::vector<double> entries_;
};

struct Observation {
  std::vector<double> values;
  // Kept only so tests can check u'y / sqrt(n) == c; the learner never reads it.
  double latent_source = 0.0;
};

/// i.i.d. +-1 entries, so the norm is exactly sqrt(n).
inline FeatureVector generate_feature(std::size_t n, RandomStream& rng) {
  detail::require(n >= 2, "feature dimension must be at least 2");
  std::vector<double> u(n);
  for (auto& ui : u) ui = rng.rademacher();
  return FeatureVector(std::move(u));
}

/// Draws a ~ N(0, I - uu'/n) into out as g - (u'g / n) u with g standard normal.
inline void sample_noise(const FeatureVector& u, RandomStream& rng, std::span<double> out) {
  const auto entries = u.entries();
  double ug = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = rng.normal();
    ug += entries[i] * out[i];
  }
  const double coef = ug / static_cast<double>(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= coef * entries[i];
}

/// y = u c / sqrt(n) + a, written into a reusable observation buffer.
inline void sample_observation_into(const FeatureVector& u, const SourceParams& source,
                                    RandomStream& rng, Observation& obs) {
  const std::size_t n = u.dimension();
  obs.values.resize(n);
  const double c = sample_source(source, rng);
  sample_noise(u, rng, obs.values);
  const double scale = c / std::sqrt(static_cast<double>(n));
  const auto entries = u.entries();
  for (std::size_t i = 0; i < n; ++i) obs.values[i] += scale * entries[i];
  obs.latent_source = c;
}

inline Observation sample_observation(const FeatureVector& u, const SourceParams& source,
                                      RandomStream& rng) {
  Observation obs;
  sample_observation_into(u, source, rng, obs);
  return obs;
}

/// Orthonormal probe set: u / sqrt(n) followed by extra directions orthogonal to u.
inline std::vector<std::vector<double>> noise_probe_directions(const FeatureVector& u,
                                                               std::size_t count,
                                                               RandomStream& rng) {
  const std::size_t n = u.dimension();
  detail::require(count >= 1 && count <= n, "probe count must be in [1, n]");
  std::vector<std::vector<double>> probes;
  probes.reserve(count);
  std::vector<double> first(u.entries().begin(), u.entries().end());
  const double inv = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : first) v *= inv;
  probes.push_back(std::move(first));
  while (probes.size() < count) {
    std::vector<double> v(n);
    for (auto& vi : v) vi = rng.normal();
    // Two Gram-Schmidt passes keep the set orthonormal to round-off.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& p : probes) {
        const double proj = detail::dot(v, p);
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * p[i];
      }
    }
    const double norm = std::sqrt(detail::dot(v, v));
    if (norm < 1e-8) continue;
    for (auto& vi : v) vi /= norm;
    probes.push_back(std::move(v));
  }
  return probes;
}

/// Empirical second-moment matrix of the noise projected onto the probes.
inline std::vector<std::vector<double>> projected_noise_covariance(
    const FeatureVector& u, const std::vector<std::vector<double>>& probes, std::size_t draws,
    RandomStream& rng) {
  detail::require(draws >= 1, "draws must be at least 1");
  const std::size_t m = probes.size();
  std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
  std::vector<double> a(u.dimension());
  std::vector<double> proj(m);
  for (std::size_t d = 0; d < draws; ++d) {
    sample_noise(u, rng, a);
    for (std::size_t j = 0; j < m; ++j) proj[j] = detail::dot(probes[j], a);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < m; ++l) cov[j][l] += proj[j] * proj[l];
  }
  for (auto& row : cov)
    for (auto& v : row) v /= static_cast<double>(draws);
  return cov;
}

/// Max |empirical - (I - uu'/n)| over a probe subspace of up to 20 directions including u.
inline double noise_covariance_check(const FeatureVector& u, std::size_t draws, RandomStream& rng) {
  detail::require(draws >= 100, "noise covariance check needs at least 100 draws");
  const std::size_t count = std::min<std::size_t>(20, u.dimension());
  RandomStream probe_rng = rng.fork(0);
  const auto probes = noise_probe_directions(u, count, probe_rng);
  const auto cov = projected_noise_covariance(u, probes, draws, rng);
  double worst = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t l = 0; l < count; ++l) {
      // Probe 0 is u / sqrt(n): analytic variance 0. The rest span u-perp: identity.
      const double analytic = (j == l && j != 0) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(cov[j][l] - analytic));
    }
  }
  return worst;
}

}  // namespace oica

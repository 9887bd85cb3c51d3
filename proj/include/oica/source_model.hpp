#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "oica/error.hpp"
#include "oica/random_stream.hpp"

namespace oica {

/// Weighting between the Rademacher and the uniform component of the source.
class SourceParams {
 public:
  explicit SourceParams(double beta) : beta_(beta) {
    detail::require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    uniform_weight_ = std::sqrt(1.0 - beta * beta);
  }

  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] double rademacher_weight() const noexcept { return beta_; }
  [[nodiscard]] double uniform_weight() const noexcept { return uniform_weight_; }

 private:
  double beta_;
  double uniform_weight_;
};

struct SourceMoments {
  double m4;
  double m6;
};

/// c = beta * a1 + sqrt(1 - beta^2) * a2, a1 ~ Rademacher, a2 ~ U(-sqrt3, sqrt3).
inline double sample_source(const SourceParams& params, RandomStream& rng) {
  constexpr double half_width = std::numbers::sqrt3;
  const double a1 = rng.rademacher();
  const double a2 = rng.uniform(-half_width, half_width);
  return params.rademacher_weight() * a1 + params.uniform_weight() * a2;
}

// Closed forms in s = beta^2, with integer numerators so both endpoints are exact:
//   m4 = (9 + 12 s - 16 s^2) / 5
//   m6 = (27 + 24 s - 24 s^2 - 20 s^3) / 7
// This m6 is the closed form the threshold tables are built on. It is not the
// sixth moment of the sampled mixture; see moments_exact.
inline SourceMoments moments_analytic(const SourceParams& params) {
  const double s = params.beta() * params.beta();
  const double m4 = (9.0 + s * (12.0 - s * 16.0)) / 5.0;
  const double m6 = (27.0 + s * (24.0 - s * (24.0 + s * 20.0))) / 7.0;
  return {m4, m6};
}

/// Moments of the sampled mixture itself. m4 agrees with moments_analytic; the
/// sixth moment is 27/7 + 108/7 s - 192/7 s^2 + 64/7 s^3.
inline SourceMoments moments_exact(const SourceParams& params) {
  const double s = params.beta() * params.beta();
  const double m4 = (9.0 + s * (12.0 - s * 16.0)) / 5.0;
  const double m6 = (27.0 + s * (108.0 - s * (192.0 - s * 64.0))) / 7.0;
  return {m4, m6};
}

inline SourceMoments moments_empirical(const SourceParams& params, std::size_t sample_count,
                                       RandomStream& rng) {
  detail::require(sample_count >= 1, "sample_count must be at least 1");
  double sum4 = 0.0;
  double sum6 = 0.0;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double c = sample_source(params, rng);
    const double c2 = c * c;
    const double c4 = c2 * c2;
    sum4 += c4;
    sum6 += c4 * c2;
  }
  const auto count = static_cast<double>(sample_count);
  return {sum4 / count, sum6 / count};
}

struct MomentArgmax {
  double beta_m4;
  double beta_m6;
};

/// Grid points maximizing m4 and m6; ties go to the smaller beta.
inline MomentArgmax moment_argmax_on_grid(std::span<const double> grid) {
  detail::require(!grid.empty(), "beta grid must be nonempty");
  double best4 = 0.0;
  double best6 = 0.0;
  MomentArgmax arg{};
  bool first = true;
  for (const double beta : grid) {
    const SourceMoments m = moments_analytic(SourceParams(beta));
    if (first || m.m4 > best4 || (m.m4 == best4 && beta < arg.beta_m4)) {
      best4 = m.m4;
      arg.beta_m4 = beta;
    }
    if (first || m.m6 > best6 || (m.m6 == best6 && beta < arg.beta_m6)) {
      best6 = m.m6;
      arg.beta_m6 = beta;
    }
    first = false;
  }
  return arg;
}

/// Exact maximizers over [0, 1]: dm4/ds = 0 at s = 3/8, dm6/ds = 0 at 5s^2 + 4s - 2 = 0.
inline MomentArgmax moment_argmax_continuous() {
  const double s4 = 3.0 / 8.0;
  const double s6 = (std::sqrt(56.0) - 4.0) / 10.0;
  return {std::sqrt(s4), std::sqrt(s6)};
}

}  // namespace oica

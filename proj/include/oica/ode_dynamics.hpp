#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oica/error.hpp"
#include "oica/source_model.hpp"

namespace oica {

/// Parameters entering the overlap drift: learning rate and source moments.
struct DriftParams {
  double tau;
  double m4;
  double m6;

  DriftParams(double tau_, double m4_, double m6_) : tau(tau_), m4(m4_), m6(m6_) {
    detail::require(tau >= 0.0 && std::isfinite(tau), "tau must be finite and >= 0");
    detail::require(m4 >= 1.0 - 1e-12, "m4 must be >= 1 for a unit-variance source");
    // Lyapunov: E|c|^6 ^ (1/6) >= E|c|^4 ^ (1/4).
    detail::require(m6 >= std::pow(m4, 1.5) * (1.0 - 1e-12), "m6 must be >= m4^(3/2)");
  }

  static DriftParams from_source(double tau, const SourceParams& source) {
    const SourceMoments m = moments_analytic(source);
    return {tau, m.m4, m.m6};
  }
};

namespace detail {

inline void require_unit_interval(double q) {
  require(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]");
}

// g(q) = q (c1 + q (c2 + q (c3 + q c4))), expanded from
// -2 q^2 (1-q) k - tau q [15 q^2 (1-q) k + q^3 (m6-15) + 15], k = m4 - 3.
inline double stability_unchecked(double q, const DriftParams& p) noexcept {
  const double k = p.m4 - 3.0;
  const double c1 = -15.0 * p.tau;
  const double c2 = -2.0 * k;
  const double c3 = 2.0 * k - 15.0 * p.tau * k;
  const double c4 = -p.tau * (p.m6 - 15.0 - 15.0 * k);
  return q * (c1 + q * (c2 + q * (c3 + q * c4)));
}

}  // namespace detail

/// g(q) = (1/tau) dq/dt.
inline double stability_function(double q, const DriftParams& p) {
  detail::require_unit_interval(q);
  return detail::stability_unchecked(q, p);
}

/// dq/dt of the limiting overlap dynamics.
inline double drift(double q, const DriftParams& p) {
  return p.tau * stability_function(q, p);
}

enum class Stability { stable, unstable, tangent };

/// Roots of g in (0, 1), ascending.
struct FixedPointSet {
  std::vector<double> roots;
  std::vector<Stability> stabilities;
  std::optional<double> threshold;          // smallest sign-change root
  std::optional<double> informative_level;  // largest stable root

  [[nodiscard]] std::size_t crossing_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(stabilities.begin(), stabilities.end(),
                      [](Stability s) { return s != Stability::tangent; }));
  }
};

struct FixedPointOptions {
  std::size_t grid_size = 4000;
  double lower = 1e-6;
  double root_width = 1e-10;
  // |g| at a grid-local extremum below this counts as a double root.
  double tangent_tolerance = 1e-9;
};

/// Scans g on a uniform grid over (lower, 1), bisects every sign change.
inline FixedPointSet fixed_points(const DriftParams& p, const FixedPointOptions& opts = {}) {
  detail::require(opts.grid_size >= 100, "grid_size must be at least 100");
  const std::size_t m = opts.grid_size;
  const double lo = opts.lower;
  const double h = (1.0 - lo) / static_cast<double>(m - 1);
  auto node = [&](std::size_t i) { return i + 1 == m ? 1.0 : lo + h * static_cast<double>(i); };

  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = detail::stability_unchecked(node(i), p);

  // Root of g on [a, b] given the direction of the sign change.
  auto bisect = [&](double a, double b, bool rising) {
    while (b - a > opts.root_width) {
      const double mid = 0.5 * (a + b);
      const double gm = detail::stability_unchecked(mid, p);
      if (gm == 0.0) return mid;
      if ((gm < 0.0) == rising) a = mid;
      else b = mid;
    }
    return 0.5 * (a + b);
  };

  std::vector<std::pair<double, Stability>> found;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double ga = g[i];
    const double gb = g[i + 1];
    if (ga == 0.0) {
      if (i == 0) continue;
      const double gl = g[i - 1];
      if ((gl < 0.0) != (gb < 0.0) && gl != 0.0 && gb != 0.0)
        found.emplace_back(node(i), gl < 0.0 ? Stability::unstable : Stability::stable);
      continue;
    }
    if (gb == 0.0 || (ga < 0.0) == (gb < 0.0)) continue;
    const bool rising = ga < 0.0;
    // Negative below, positive above repels: unstable.
    found.emplace_back(bisect(node(i), node(i + 1), rising),
                       rising ? Stability::unstable : Stability::stable);
  }

  // Double roots: g touches zero at a grid-local extremum without changing sign.
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const bool local_max = g[i] < 0.0 && g[i] >= g[i - 1] && g[i] >= g[i + 1];
    const bool local_min = g[i] > 0.0 && g[i] <= g[i - 1] && g[i] <= g[i + 1];
    if (!local_max && !local_min) continue;
    if (std::abs(g[i]) > 1e3 * opts.tangent_tolerance) continue;
    const double sign = local_max ? 1.0 : -1.0;
    double a = node(i - 1);
    double b = node(i + 1);
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = sign * detail::stability_unchecked(x1, p);
    double f2 = sign * detail::stability_unchecked(x2, p);
    while (b - a > opts.root_width) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = sign * detail::stability_unchecked(x2, p);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = sign * detail::stability_unchecked(x1, p);
      }
    }
    const double qe = 0.5 * (a + b);
    const double ge = detail::stability_unchecked(qe, p);
    if (std::abs(ge) <= opts.tangent_tolerance) {
      found.emplace_back(qe, Stability::tangent);
    } else if (sign * ge > 0.0) {
      // A narrow bump between two grid nodes: two crossings the scan missed.
      const bool bump_up = local_max;
      found.emplace_back(bisect(node(i - 1), qe, bump_up),
                         bump_up ? Stability::unstable : Stability::stable);
      found.emplace_back(bisect(qe, node(i + 1), !bump_up),
                         bump_up ? Stability::stable : Stability::unstable);
    }
  }

  std::sort(found.begin(), found.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  FixedPointSet out;
  for (const auto& [q, s] : found) {
    out.roots.push_back(q);
    out.stabilities.push_back(s);
    if (s == Stability::tangent) continue;
    if (!out.threshold) out.threshold = q;
    if (s == Stability::stable) out.informative_level = q;
  }
  return out;
}

/// One classical Runge-Kutta step of y' = f(t, y).
template <class Y, class F>
Y rk4_step(F&& f, double t, const Y& y, double h) {
  const Y k1 = f(t, y);
  const Y k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Y k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Y k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

enum class TerminalClass { informative, uninformative };

struct OdeSolution {
  std::vector<double> t;
  std::vector<double> q;
  TerminalClass terminal_class = TerminalClass::uninformative;

  /// Linear interpolation of q at time s (clamped to the solved interval).
  [[nodiscard]] double at(double s) const {
    if (s <= t.front()) return q.front();
    if (s >= t.back()) return q.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const auto j = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[j - 1]) / (t[j] - t[j - 1]);
    return q[j - 1] + w * (q[j] - q[j - 1]);
  }
};

/**
 * Fixed-step RK4 on [0, t_end] for the overlap ODE.
 *
 * The state is clamped to [0, 1] after each step; the drift points inward at
 * both ends so this only removes round-off. A final partial step lands on
 * t_end exactly. Every record_stride-th step is stored, plus the endpoint.
 */
inline OdeSolution integrate(double q0, const DriftParams& p, double t_end, double dt = 1e-3,
                             std::size_t record_stride = 1) {
  detail::require(q0 > 0.0 && q0 < 1.0, "q0 must lie in (0, 1)");
  detail::require(dt > 0.0, "dt must be positive");
  detail::require(t_end > 0.0, "t_end must be positive");
  detail::require(record_stride >= 1, "record_stride must be at least 1");

  auto rhs = [&p](double, double q) { return p.tau * detail::stability_unchecked(q, p); };

  const auto full_steps = static_cast<std::size_t>(std::floor(t_end / dt * (1.0 + 1e-12)));
  OdeSolution sol;
  sol.t.reserve(full_steps / record_stride + 2);
  sol.q.reserve(full_steps / record_stride + 2);
  sol.t.push_back(0.0);
  sol.q.push_back(q0);

  double q = q0;
  double t = 0.0;
  for (std::size_t i = 1; i <= full_steps; ++i) {
    q = std::clamp(rk4_step(rhs, t, q, dt), 0.0, 1.0);
    t = static_cast<double>(i) * dt;
    if (!std::isfinite(q)) throw NonFiniteState("ODE state became non-finite");
    if (i % record_stride == 0) {
      sol.t.push_back(t);
      sol.q.push_back(q);
    }
  }
  const double rest = t_end - t;
  if (rest > 1e-12 * t_end) {
    q = std::clamp(rk4_step(rhs, t, q, rest), 0.0, 1.0);
    if (!std::isfinite(q)) throw NonFiniteState("ODE state became non-finite");
  }
  t = t_end;
  if (sol.t.back() < t) {
    sol.t.push_back(t);
    sol.q.push_back(q);
  } else {
    sol.q.back() = q;
  }

  const FixedPointSet fps = fixed_points(p);
  if (fps.informative_level && std::abs(q - *fps.informative_level) <= 1e-3)
    sol.terminal_class = TerminalClass::informative;
  return sol;
}

struct DriftProfile {
  std::vector<double> q;
  std::vector<double> g;
  std::optional<double> threshold;  // dashed-line marker, absent when g has no zero crossing
};

inline DriftProfile drift_profile(const DriftParams& p, std::span<const double> grid) {
  DriftProfile out;
  out.q.reserve(grid.size());
  out.g.reserve(grid.size());
  for (const double q : grid) {
    out.q.push_back(q);
    out.g.push_back(stability_function(q, p));
  }
  out.threshold = fixed_points(p).threshold;
  return out;
}

/// intervals + 1 evenly spaced points on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t intervals) {
  std::vector<double> v(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
  v.back() = hi;
  return v;
}

}  // namespace oica

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/magnitude.hpp"
#include "smq/tick.hpp"

namespace smq {

inline constexpr TimeMs kMsPerDay = 86'400'000;

struct LikelihoodParams {
  double n_d_days = 100.0;         // look-back length
  double k = 1.0;                  // magnitude threshold
  TimeMs spacing_ms = 1'800'000;   // magnitude grid step (2 * delta_t_a)

  /// Number of grid steps in the look-back window.
  std::int64_t n_rho() const {
    if (!(n_d_days > 0.0) || spacing_ms <= 0)
      throw Error(Errc::config, "likelihood look-back and grid spacing must be positive");
    const double span_ms = n_d_days * static_cast<double>(kMsPerDay);
    const double steps = span_ms / static_cast<double>(spacing_ms);
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, rounded))
      throw Error(Errc::config, "look-back of " + format_double(n_d_days) +
                                    " days is not a whole number of grid steps");
    return static_cast<std::int64_t>(rounded);
  }

  void validate() const {
    (void)n_rho();
    if (!(k >= 0.0)) throw Error(Errc::config, "magnitude threshold k must be >= 0");
  }
};

struct MagnitudePeak {
  TimeMs time = 0;
  double magnitude = 0.0;

  bool operator==(const MagnitudePeak&) const = default;
};

struct LikelihoodPoint {
  TimeMs time = 0;
  double l = 0.0;

  bool operator==(const LikelihoodPoint&) const = default;
};

struct LikelihoodCurve {
  double k = 0.0;
  std::vector<LikelihoodPoint> points;
};

namespace detail {

/// Final magnitudes sorted by time; preliminary estimates are ignored.
inline std::vector<SmqPoint> final_points(std::span<const SmqPoint> smq) {
  std::vector<SmqPoint> out;
  out.reserve(smq.size());
  for (const auto& p : smq)
    if (p.status == SmqStatus::final_value) out.push_back(p);
  std::stable_sort(out.begin(), out.end(), [](const SmqPoint& a, const SmqPoint& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].time == out[i - 1].time)
      throw Error(Errc::data, "duplicate final magnitude at t=" + std::to_string(out[i].time));
  return out;
}

inline std::optional<double> magnitude_at(std::span<const SmqPoint> sorted, TimeMs t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t,
                                   [](const SmqPoint& p, TimeMs v) { return p.time < v; });
  if (it == sorted.end() || it->time != t) return std::nullopt;
  return it->magnitude;
}

}  // namespace detail

/// Fraction of the n_rho + 1 grid times t, t - step, ..., t - n_rho*step whose
/// magnitude is >= k. A grid time with no magnitude counts as no exceedance.
inline double likelihood(std::span<const SmqPoint> smq, TimeMs t, const LikelihoodParams& params) {
  params.validate();
  const auto grid = detail::final_points(smq);
  const auto n_rho = params.n_rho();
  if (grid.empty()) throw Error(Errc::insufficient_history, "no final magnitudes available");
  if (t - n_rho * params.spacing_ms < grid.front().time) {
    throw Error(Errc::insufficient_history, "look-back from t=" + std::to_string(t) +
                                                " needs history before the earliest available time " +
                                                std::to_string(grid.front().time));
  }
  std::int64_t count = 0;
  for (std::int64_t i = 0; i <= n_rho; ++i) {
    const auto s = detail::magnitude_at(grid, t - i * params.spacing_ms);
    if (s && *s >= params.k) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n_rho + 1);
}

/// likelihood at every final magnitude time that has a full look-back, for
/// each k. Uses prefix counts over the dense grid.
inline std::vector<LikelihoodCurve> likelihood_series(std::span<const SmqPoint> smq, double n_d_days,
                                                      TimeMs spacing_ms, std::span<const double> ks) {
  LikelihoodParams base{n_d_days, 0.0, spacing_ms};
  const auto n_rho = base.n_rho();
  for (double k : ks) LikelihoodParams{n_d_days, k, spacing_ms}.validate();

  const auto grid = detail::final_points(smq);
  std::vector<LikelihoodCurve> curves;
  for (double k : ks) curves.push_back({k, {}});
  if (grid.empty()) return curves;

  const TimeMs origin = grid.front().time;
  std::vector<std::size_t> index(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const TimeMs d = grid[i].time - origin;
    if (d % spacing_ms != 0)
      throw Error(Errc::data, "magnitude at t=" + std::to_string(grid[i].time) + " is off the grid");
    index[i] = static_cast<std::size_t>(d / spacing_ms);
  }
  const std::size_t dense = index.back() + 1;
  std::vector<std::int64_t> prefix(dense + 1);
  for (std::size_t c = 0; c < ks.size(); ++c) {
    std::fill(prefix.begin(), prefix.end(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i].magnitude >= ks[c]) prefix[index[i] + 1] = 1;
    for (std::size_t j = 1; j <= dense; ++j) prefix[j] += prefix[j - 1];
    auto& out = curves[c].points;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (static_cast<std::int64_t>(index[i]) < n_rho) continue;
      const auto hi = index[i] + 1;
      const auto lo = index[i] - static_cast<std::size_t>(n_rho);
      const auto count = prefix[hi] - prefix[lo];
      out.push_back({grid[i].time, static_cast<double>(count) / static_cast<double>(n_rho + 1)});
    }
  }
  return curves;
}

/// True when every curve is pointwise non-increasing in k.
inline bool curves_nested(std::span<const LikelihoodCurve> curves) {
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = 0; b < curves.size(); ++b) {
      if (!(curves[a].k <= curves[b].k) || curves[a].points.size() != curves[b].points.size()) continue;
      for (std::size_t i = 0; i < curves[a].points.size(); ++i)
        if (curves[a].points[i].l < curves[b].points[i].l) return false;
    }
  }
  return true;
}

/// Strict local maxima against both grid neighbours; a point missing either
/// neighbour never qualifies.
inline std::vector<MagnitudePeak> detect_peaks(std::span<const SmqPoint> smq, TimeMs spacing_ms) {
  if (spacing_ms <= 0) throw Error(Errc::config, "grid spacing must be positive");
  const auto grid = detail::final_points(smq);
  std::vector<MagnitudePeak> peaks;
  for (const auto& p : grid) {
    const auto before = detail::magnitude_at(grid, p.time - spacing_ms);
    const auto after = detail::magnitude_at(grid, p.time + spacing_ms);
    if (before && after && p.magnitude > *before && p.magnitude > *after)
      peaks.push_back({p.time, p.magnitude});
  }
  return peaks;
}

/// max |x(tau) - x(t)| over ticks with t < tau <= t + horizon, where x(t) is
/// the last log price at or before t.
inline double max_forward_move(std::span<const LogPricePoint> prices, TimeMs t, TimeMs horizon_ms) {
  if (prices.empty() || prices.front().time > t || prices.back().time < t + horizon_ms) {
    throw Error(Errc::insufficient_history,
                "price data does not cover (" + std::to_string(t) + ", " + std::to_string(t + horizon_ms) + "]");
  }
  auto it = std::upper_bound(prices.begin(), prices.end(), t,
                             [](TimeMs v, const LogPricePoint& p) { return v < p.time; });
  const double x0 = std::prev(it)->x;
  double best = 0.0;
  for (; it != prices.end() && it->time <= t + horizon_ms; ++it) best = std::max(best, std::abs(it->x - x0));
  return best;
}

}  // namespace smq

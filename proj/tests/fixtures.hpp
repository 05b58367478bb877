#pragma once

// Shared synthetic data for the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <vector>

#include "smq/smq.hpp"

namespace smq::fixtures {

inline constexpr TimeMs kStart = 1136073600000;  // 2006-01-01

/// Wide random walk whose two large jumps seed every default threshold.
inline SyntheticSpec calibration_spec(std::uint64_t seed = 11, double days = 10.0) {
  SyntheticSpec s;
  s.seed = seed;
  s.duration_s = days * 86400.0;
  s.mean_interval_s = 3.0;
  s.volatility = 4e-5;
  s.jumps = {{86400.0, 0.1}, {2 * 86400.0, -0.1}};
  s.start_ms = kStart;
  return s;
}

inline std::vector<LogPricePoint> prices_of(const SyntheticSpec& s) { return mid_log(generate_ticks(s)); }

inline const CalibrationSet& default_calibration() {
  static const CalibrationSet set = [] {
    const auto pts = prices_of(calibration_spec());
    const auto thr = threshold_grid();
    return calibrate_from_prices(pts, thr, {pts.front().time, pts.back().time});
  }();
  return set;
}

/// Quiet walk with one jump of `size` at `offset_s`.
inline SyntheticSpec jump_spec(double size, double offset_s = 43200.0, std::uint64_t seed = 5,
                               double days = 1.0) {
  SyntheticSpec s;
  s.seed = seed;
  s.duration_s = days * 86400.0;
  s.mean_interval_s = 3.0;
  s.volatility = 4e-5;
  s.jumps = {{offset_s, size}};
  s.start_ms = kStart;
  return s;
}

/// Constant price apart from a +6% step at 60 s, which seeds every threshold
/// upward with omega 0, and a test jump of `size` at `offset_s`.
inline SyntheticSpec flat_jump_spec(double size, double offset_s = 86400.0, double days = 2.0) {
  SyntheticSpec s;
  s.duration_s = days * 86400.0;
  s.mean_interval_s = 3.0;
  s.volatility = 0.0;
  s.jumps = {{60.0, 0.06}, {offset_s, size}};
  s.start_ms = kStart;
  return s;
}

/// Random walk on a 2^-16 lattice: sums and differences are exact in double.
inline std::vector<LogPricePoint> dyadic_walk(std::size_t n, std::uint64_t seed, int max_step = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> step(-max_step, max_step);
  std::vector<LogPricePoint> out;
  out.reserve(n);
  long long level = 0;
  TimeMs t = kStart;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({t, static_cast<double>(level) / 65536.0});
    level += step(rng);
    t += 1000;
  }
  return out;
}

inline AvgOvershootSeries constant_series(TimeMs from, TimeMs to, double value, TimeMs step = 1000) {
  AvgOvershootSeries s;
  for (TimeMs t = from; t <= to; t += step) s.points.push_back({t, value});
  s.covered_until = s.points.back().time;
  return s;
}

}  // namespace smq::fixtures

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smq/dc.hpp"
#include "smq/error.hpp"
#include "smq/parallel.hpp"
#include "smq/quantile.hpp"
#include "smq/tick.hpp"

namespace smq {

struct AvgOvershootPoint {
  TimeMs time = 0;
  double w_bar = 0.0;  // mean quantile overshoot, [0, 100]

  bool operator==(const AvgOvershootPoint&) const = default;
};

/// Tick-by-tick average quantile overshoot. `covered_until` is the time of the
/// last tick that went into the series: the value is known up to that instant.
struct AvgOvershootSeries {
  std::vector<AvgOvershootPoint> points;
  TimeMs covered_until = 0;

  bool empty() const noexcept { return points.empty(); }
  bool operator==(const AvgOvershootSeries&) const = default;
};

// Quantiles are summed in blocks of this many thresholds, then the block sums
// are added in order. Every builder below uses this order, so the serial,
// parallel and trace-based paths agree bit for bit.
inline constexpr std::size_t kLambdaBlock = 10;

namespace detail {

inline std::size_t block_count(std::size_t n_lambda) { return (n_lambda + kLambdaBlock - 1) / kLambdaBlock; }

}  // namespace detail

/// Averages per-threshold quantile overshoots at every tick of `points`.
///
/// `traces[i]` is the output of run_dc over the same `points` for the i-th
/// calibration threshold, so its overshoots cover a suffix of the ticks. A
/// threshold that has not seeded yet contributes the quantile of omega = 0.
inline AvgOvershootSeries build_avg_overshoot(std::span<const LogPricePoint> points,
                                              std::span<const DcTrace> traces,
                                              const CalibrationSet& calibration) {
  if (traces.size() != calibration.n_lambda()) {
    throw Error(Errc::calibration, "missing calibration table: " + std::to_string(traces.size()) +
                                       " overshoot streams but " +
                                       std::to_string(calibration.n_lambda()) + " tables");
  }
  const std::size_t n = points.size();
  const std::size_t L = traces.size();
  std::vector<std::size_t> offset(L);
  std::vector<double> q0(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto& os = traces[i].overshoots;
    if (os.size() > n) throw Error(Errc::contract, "overshoot stream longer than tick stream");
    offset[i] = n - os.size();
    if (!os.empty() && os.front().time != points[offset[i]].time)
      throw Error(Errc::contract, "overshoot stream is not aligned with the tick stream");
    q0[i] = calibration.tables[i].quantile_of(0.0);
  }

  AvgOvershootSeries series;
  series.points.resize(n);
  if (n > 0) series.covered_until = points.back().time;
  const std::size_t blocks = detail::block_count(L);
  for (std::size_t j = 0; j < n; ++j) {
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double acc = 0.0;
      const std::size_t end = std::min(L, (b + 1) * kLambdaBlock);
      for (std::size_t i = b * kLambdaBlock; i < end; ++i) {
        acc += j >= offset[i] ? calibration.tables[i].quantile_of(traces[i].overshoots[j - offset[i]].omega)
                              : q0[i];
      }
      total += acc;
    }
    series.points[j] = {points[j].time, L ? total / static_cast<double>(L) : 0.0};
  }
  return series;
}

/// Fused single-pass version of run_dc + build_avg_overshoot: the runners
/// are stepped tile by tile and never store their traces. With threads > 1
/// threshold blocks of a tile are processed concurrently; the result is
/// identical to the serial one.
inline AvgOvershootSeries compute_avg_overshoot(std::span<const LogPricePoint> points,
                                                std::span<const Threshold> thresholds,
                                                const CalibrationSet& calibration, unsigned threads = 1) {
  require_shape(calibration, thresholds);
  const std::size_t n = points.size();
  const std::size_t L = thresholds.size();
  const std::size_t blocks = detail::block_count(L);
  constexpr std::size_t kTile = 1 << 16;

  std::vector<DcRunner> runners;
  runners.reserve(L);
  for (const auto& t : thresholds) runners.emplace_back(t);
  std::vector<std::size_t> hints(L, 0);
  std::vector<double> q0(L);
  for (std::size_t i = 0; i < L; ++i) q0[i] = calibration.tables[i].quantile_of(0.0);

  AvgOvershootSeries series;
  series.points.resize(n);
  if (n > 0) series.covered_until = points.back().time;
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(std::min(kTile, std::max<std::size_t>(n, 1))));

  for (std::size_t start = 0; start < n; start += kTile) {
    const std::size_t len = std::min(kTile, n - start);
    const auto tile = points.subspan(start, len);
    parallel_for(blocks, threads, [&](std::size_t b) {
      auto& acc = partial[b];
      std::fill_n(acc.begin(), len, 0.0);
      const std::size_t end = std::min(L, (b + 1) * kLambdaBlock);
      for (std::size_t i = b * kLambdaBlock; i < end; ++i) {
        auto& runner = runners[i];
        const auto& table = calibration.tables[i];
        auto& hint = hints[i];
        for (std::size_t j = 0; j < len; ++j) {
          const auto r = runner.step(tile[j]);
          acc[j] += r.overshoot ? table.quantile_of(r.overshoot->omega, hint) : q0[i];
        }
      }
    });
    for (std::size_t j = 0; j < len; ++j) {
      double total = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) total += partial[b][j];
      series.points[start + j] = {tile[j].time, L ? total / static_cast<double>(L) : 0.0};
    }
  }
  return series;
}

inline void append_w_bar_csv(std::string& out, const AvgOvershootPoint& p) {
  append_int(out, p.time);
  out.push_back(',');
  append_double(out, p.w_bar);
  out.push_back('\n');
}

}  // namespace smq

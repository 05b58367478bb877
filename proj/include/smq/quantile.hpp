#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smq/dc.hpp"
#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/parallel.hpp"
#include "smq/tick.hpp"

namespace smq {

/// Inclusive range of epoch milliseconds.
struct TimeWindow {
  TimeMs start_ms = 0;
  TimeMs end_ms = 0;

  bool contains(TimeMs t) const noexcept { return t >= start_ms && t <= end_ms; }
  bool operator==(const TimeWindow&) const = default;
};

/// Empirical distribution of overshoots for one threshold, answering
/// "what percentile is this omega" on a [0, 100] scale.
///
/// Up to `kExactLimit` samples are kept verbatim and the right-continuous
/// empirical CDF is used. Larger populations are reduced to `kSketchPoints`
/// equi-probable grid values and the CDF is linearly interpolated between them.
class QuantileTable {
 public:
  static constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 20;
  static constexpr std::size_t kSketchPoints = 4096;

  QuantileTable() = default;

  static QuantileTable from_samples(double lambda, std::vector<double> samples, TimeWindow window) {
    if (samples.size() < 2) {
      throw Error(Errc::calibration, "threshold " + format_double(lambda) + " has " +
                                         std::to_string(samples.size()) +
                                         " overshoot samples in the calibration window (need >= 2)");
    }
    std::sort(samples.begin(), samples.end());
    QuantileTable t;
    t.lambda_ = lambda;
    t.window_ = window;
    t.sample_count_ = samples.size();
    if (samples.size() <= kExactLimit) {
      t.values_ = std::move(samples);
    } else {
      t.values_.resize(kSketchPoints);
      const double last = static_cast<double>(samples.size() - 1);
      for (std::size_t j = 0; j < kSketchPoints; ++j) {
        const double p = static_cast<double>(j) / static_cast<double>(kSketchPoints - 1);
        t.values_[j] = samples[static_cast<std::size_t>(std::llround(p * last))];
      }
    }
    return t;
  }

  /// Rebuilds a table from its stored representation (used by the file loader).
  static QuantileTable from_stored(double lambda, std::vector<double> values,
                                   std::uint64_t sample_count, TimeWindow window) {
    const bool exact = values.size() == sample_count;
    const bool sketch = sample_count > kExactLimit && values.size() == kSketchPoints;
    if (sample_count < 2 || !(exact || sketch))
      throw Error(Errc::format, "inconsistent quantile table for threshold " + format_double(lambda));
    if (!std::is_sorted(values.begin(), values.end()))
      throw Error(Errc::format, "unsorted quantile table for threshold " + format_double(lambda));
    QuantileTable t;
    t.lambda_ = lambda;
    t.values_ = std::move(values);
    t.sample_count_ = sample_count;
    t.window_ = window;
    return t;
  }

  double lambda() const noexcept { return lambda_; }
  TimeWindow window() const noexcept { return window_; }
  std::uint64_t sample_count() const noexcept { return sample_count_; }
  std::span<const double> values() const noexcept { return values_; }
  bool is_sketch() const noexcept { return values_.size() != sample_count_; }

  double quantile_of(double omega) const {
    if (is_sketch()) return sketch_quantile(omega);
    const auto rank = std::upper_bound(values_.begin(), values_.end(), omega) - values_.begin();
    return 100.0 * static_cast<double>(rank) / static_cast<double>(sample_count_);
  }

  /// Same result as quantile_of, searching outward from `hint` (the rank of
  /// the previous query). Consecutive overshoots of one runner are close, so
  /// this touches only a few cache lines per tick.
  double quantile_of(double omega, std::size_t& hint) const {
    if (is_sketch()) return sketch_quantile(omega);
    const std::size_t n = values_.size();
    const double* v = values_.data();
    std::size_t lo = 0;
    std::size_t hi = n;
    if (hint > n) hint = n;
    if (hint < n && v[hint] <= omega) {
      lo = hint + 1;
      hi = lo;
      std::size_t step = 1;
      while (hi < n && v[hi] <= omega) {
        lo = hi + 1;
        hi = std::min(n, lo + step);
        step *= 2;
      }
    } else {
      hi = hint;
      lo = hint;
      std::size_t step = 1;
      while (lo > 0 && v[lo - 1] > omega) {
        hi = lo - 1;
        lo = hi >= step ? hi - step : 0;
        step *= 2;
      }
    }
    hint = static_cast<std::size_t>(std::upper_bound(v + lo, v + hi, omega) - v);
    return 100.0 * static_cast<double>(hint) / static_cast<double>(sample_count_);
  }

  bool operator==(const QuantileTable&) const = default;

 private:
  double sketch_quantile(double omega) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), omega);
    if (it == values_.begin()) return 0.0;
    if (it == values_.end()) return 100.0;
    const auto j = static_cast<std::size_t>(it - values_.begin()) - 1;
    const double g0 = values_[j];
    const double g1 = values_[j + 1];
    const double step = 1.0 / static_cast<double>(kSketchPoints - 1);
    const double frac = (omega - g0) / (g1 - g0);
    return 100.0 * (static_cast<double>(j) + frac) * step;
  }

  double lambda_ = 0.0;
  std::vector<double> values_;
  std::uint64_t sample_count_ = 0;
  TimeWindow window_{};
};

inline double to_quantile(const QuantileTable& table, double omega) { return table.quantile_of(omega); }

/// One table per threshold, all built from the same window.
struct CalibrationSet {
  TimeWindow window{};
  std::vector<QuantileTable> tables;

  std::size_t n_lambda() const noexcept { return tables.size(); }
  bool operator==(const CalibrationSet&) const = default;
};

/// Throws a shape error unless `set` has exactly the given thresholds.
inline void require_shape(const CalibrationSet& set, std::span<const Threshold> thresholds) {
  if (set.tables.size() != thresholds.size()) {
    throw Error(Errc::shape, "calibration has " + std::to_string(set.tables.size()) +
                                 " thresholds, run expects " + std::to_string(thresholds.size()));
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double a = set.tables[i].lambda();
    const double b = thresholds[i].value();
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) {
      throw Error(Errc::shape, "calibration threshold #" + std::to_string(i + 1) + " is " +
                                   format_double(a) + ", run expects " + format_double(b));
    }
  }
}

inline CalibrationSet calibrate(std::span<const Threshold> thresholds,
                                std::span<const std::vector<OvershootPoint>> overshoots,
                                TimeWindow window) {
  if (thresholds.size() != overshoots.size())
    throw Error(Errc::contract, "calibrate: one overshoot sequence per threshold required");
  if (window.end_ms < window.start_ms) throw Error(Errc::config, "calibration window is empty");
  CalibrationSet set;
  set.window = window;
  set.tables.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    std::vector<double> samples;
    for (const auto& o : overshoots[i])
      if (window.contains(o.time)) samples.push_back(o.omega);
    set.tables.push_back(QuantileTable::from_samples(thresholds[i].value(), std::move(samples), window));
  }
  return set;
}

/// Runs every threshold's runner over `points` and calibrates on the in-window
/// overshoots without materializing full traces. Runners are data-parallel.
inline CalibrationSet calibrate_from_prices(std::span<const LogPricePoint> points,
                                            std::span<const Threshold> thresholds,
                                            TimeWindow window, unsigned threads = 1) {
  if (window.end_ms < window.start_ms) throw Error(Errc::config, "calibration window is empty");
  std::vector<std::vector<double>> samples(thresholds.size());
  auto work = [&](std::size_t i) {
    DcRunner runner(thresholds[i]);
    auto& out = samples[i];
    for (const auto& p : points) {
      auto r = runner.step(p);
      if (r.overshoot && window.contains(p.time)) out.push_back(r.overshoot->omega);
      if (p.time > window.end_ms) break;
    }
  };
  parallel_for(thresholds.size(), threads, work);
  CalibrationSet set;
  set.window = window;
  set.tables.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    set.tables.push_back(QuantileTable::from_samples(thresholds[i].value(), std::move(samples[i]), window));
  return set;
}

}  // namespace smq

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smq/avg_overshoot.hpp"
#include "smq/dc.hpp"
#include "smq/error.hpp"
#include "smq/parallel.hpp"
#include "smq/spectrum.hpp"

namespace smq {

/// How the sum over the n_a + 1 inner windows is normalized. `n_a` is the
/// default; `n_a_plus_one` gives the plain mean.
enum class InnerDivisor { n_a, n_a_plus_one };

struct SmqParams {
  std::int64_t delta_t_s = 7200;   // window length
  std::int64_t delta_t_a_s = 900;  // inner-window spacing
  std::int64_t delta_t_f_s = 7;    // sampling step inside a window
  std::size_t n_lambda = 100;
  double lambda_step = 0.0005;
  std::size_t n_f_raw = 1028;  // grid points per window before the head drop
  std::size_t discarded = 4;   // leading grid points dropped
  InnerDivisor divisor = InnerDivisor::n_a;

  int n_a() const noexcept { return static_cast<int>(delta_t_s / delta_t_a_s); }
  std::size_t fft_length() const noexcept { return n_f_raw - discarded; }
  std::size_t spectral_length() const noexcept { return fft_length() / 2 + 1; }
  std::vector<Threshold> thresholds() const { return threshold_grid(n_lambda, lambda_step); }

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(Errc::config, m); };
    if (delta_t_s <= 0 || delta_t_a_s <= 0 || delta_t_f_s <= 0) fail("SMQ time steps must be positive");
    if (delta_t_s % delta_t_a_s != 0) fail("delta_t must be an integer multiple of delta_t_a");
    if (delta_t_s % 2 != 0) fail("delta_t must be an even number of seconds");
    if (n_lambda == 0) fail("n_lambda must be positive");
    if (!(lambda_step > 0.0)) fail("lambda step must be positive");
    if (n_f_raw <= discarded) fail("n_f_raw must exceed the discarded head");
    const auto n = fft_length();
    if (n < 2 || !std::has_single_bit(n)) fail("n_f_raw - discarded must be a power of two");
    if (static_cast<std::int64_t>(n_f_raw - 1) * delta_t_f_s > delta_t_s)
      fail("n_f_raw sampling points do not fit in the window");
  }

  bool operator==(const SmqParams&) const = default;
};

enum class SmqStatus { final_value, preliminary };

constexpr const char* to_string(SmqStatus s) noexcept {
  return s == SmqStatus::final_value ? "final" : "preliminary";
}

struct SmqPoint {
  TimeMs time = 0;
  double magnitude = 0.0;
  SmqStatus status = SmqStatus::final_value;
  int n_a_used = 0;

  bool operator==(const SmqPoint&) const = default;
};

/// Demeaned samples of the average overshoot around one anchor.
struct WindowVector {
  TimeMs anchor = 0;
  std::vector<double> values;
};

inline bool window_available(const AvgOvershootSeries& series, TimeMs anchor, const SmqParams& p) {
  const TimeMs half = p.delta_t_s * 500;
  return !series.points.empty() && series.points.front().time <= anchor - half &&
         series.covered_until >= anchor + half;
}

/// Samples the series on the step grid covering [t - dt/2, t + dt/2] with
/// previous-point interpolation, drops the leading `discarded` samples and
/// subtracts the mean of the rest.
inline WindowVector sample_window(const AvgOvershootSeries& series, TimeMs anchor, const SmqParams& p) {
  if (!window_available(series, anchor, p)) {
    throw Error(Errc::window_unavailable, "series does not cover the window around t=" + std::to_string(anchor));
  }
  const TimeMs start = anchor - p.delta_t_s * 500;
  const TimeMs step = p.delta_t_f_s * 1000;
  const auto& pts = series.points;
  auto it = std::upper_bound(pts.begin(), pts.end(), start,
                             [](TimeMs t, const AvgOvershootPoint& q) { return t < q.time; });
  std::size_t idx = static_cast<std::size_t>(it - pts.begin()) - 1;

  WindowVector w;
  w.anchor = anchor;
  w.values.reserve(p.fft_length());
  for (std::size_t j = 0; j < p.n_f_raw; ++j) {
    const TimeMs g = start + static_cast<TimeMs>(j) * step;
    while (idx + 1 < pts.size() && pts[idx + 1].time <= g) ++idx;
    if (j >= p.discarded) w.values.push_back(pts[idx].w_bar);
  }
  // Shift by the first sample so flat stretches demean to exact zeros.
  const double ref = w.values.front();
  double mean = 0.0;
  for (double& v : w.values) {
    v -= ref;
    mean += v;
  }
  mean /= static_cast<double>(w.values.size());
  for (double& v : w.values) v -= mean;
  return w;
}

/// 50 * sum_{k=0}^{m-1} 1/(k+1): the largest magnitude the scale can reach.
inline double upper_bound(std::size_t spectral_length) {
  double h = 0.0;
  for (std::size_t k = spectral_length; k > 0; --k) h += 1.0 / static_cast<double>(k);
  return 50.0 * h;
}

inline double upper_bound(const SmqParams& p) { return upper_bound(p.spectral_length()); }

/// Inner-window anchor i (0..n_a) for magnitude anchor t.
inline TimeMs inner_anchor(TimeMs t, int i, const SmqParams& p) {
  return t + static_cast<TimeMs>(i) * p.delta_t_a_s * 1000 - p.delta_t_s * 500;
}

inline double window_f(const AvgOvershootSeries& series, TimeMs anchor, const SmqParams& p) {
  return f_operator(sample_window(series, anchor, p).values);
}

struct SmqBreakdown {
  SmqPoint point;
  std::vector<double> inner;  // F at each inner anchor, i = 0..n_a
};

namespace detail {

inline double combine_final(std::span<const double> inner, const SmqParams& p) {
  double sum = 0.0;
  for (double f : inner) sum += f;
  const double div = p.divisor == InnerDivisor::n_a ? p.n_a() : p.n_a() + 1;
  return sum / div;
}

// Reduced estimates keep the `m + 1` windows centred on the anchor and
// average them.
inline double combine_preliminary(std::span<const double> inner, int m, const SmqParams& p) {
  const int mid = p.n_a() / 2;
  double sum = 0.0;
  for (int i = mid - m / 2; i <= mid + m / 2; ++i) sum += inner[static_cast<std::size_t>(i)];
  return sum / (m + 1);
}

inline void check_preliminary_level(int m, const SmqParams& p) {
  if (m < 0 || m % 2 != 0 || m >= p.n_a())
    throw Error(Errc::config, "preliminary n_a must be even and in [0, " + std::to_string(p.n_a()) + ")");
}

}  // namespace detail

inline SmqBreakdown smq_breakdown(const AvgOvershootSeries& series, TimeMs t, const SmqParams& p) {
  SmqBreakdown out;
  out.inner.reserve(static_cast<std::size_t>(p.n_a()) + 1);
  for (int i = 0; i <= p.n_a(); ++i) out.inner.push_back(window_f(series, inner_anchor(t, i, p), p));
  out.point = {t, detail::combine_final(out.inner, p), SmqStatus::final_value, p.n_a()};
  return out;
}

inline SmqPoint smq_at(const AvgOvershootSeries& series, TimeMs t, const SmqParams& p) {
  return smq_breakdown(series, t, p).point;
}

/// Estimate from the centred m + 1 inner windows (m in {0, 2, 4, 6} for the
/// default 8 windows), available dt/2 + (m/2) * dt_a after t.
inline SmqPoint smq_preliminary(const AvgOvershootSeries& series, TimeMs t, int m, const SmqParams& p) {
  detail::check_preliminary_level(m, p);
  std::vector<double> inner(static_cast<std::size_t>(p.n_a()) + 1, 0.0);
  const int mid = p.n_a() / 2;
  for (int i = mid - m / 2; i <= mid + m / 2; ++i)
    inner[static_cast<std::size_t>(i)] = window_f(series, inner_anchor(t, i, p), p);
  return {t, detail::combine_preliminary(inner, m, p), SmqStatus::preliminary, m};
}

struct SmqSeriesOptions {
  TimeMs spacing_ms = 1800 * 1000;  // 2 * delta_t_a
  bool preliminary = false;
  std::vector<int> preliminary_levels{0, 2, 4, 6};
  unsigned threads = 1;
};

struct SmqSeriesResult {
  std::vector<SmqPoint> points;  // by time; final before preliminary at equal times
  std::vector<TimeMs> skipped;   // grid anchors with no magnitude at all
};

/// Maps smq_at (and optionally smq_preliminary) over the grid of multiples of
/// `spacing_ms` that the series can support. Inner windows shared by
/// neighbouring anchors are evaluated once.
inline SmqSeriesResult smq_series(const AvgOvershootSeries& series, const SmqParams& p,
                                  const SmqSeriesOptions& opt = {}) {
  p.validate();
  if (opt.spacing_ms <= 0) throw Error(Errc::config, "anchor spacing must be positive");
  for (int m : opt.preliminary_levels) detail::check_preliminary_level(m, p);
  SmqSeriesResult result;
  if (series.points.empty()) return result;

  const TimeMs dt = p.delta_t_s * 1000;
  const TimeMs first_needed = series.points.front().time + dt;
  const TimeMs last_final = series.covered_until - dt;
  const TimeMs last_any = opt.preliminary && !opt.preliminary_levels.empty()
                              ? series.covered_until - dt / 2 -
                                    static_cast<TimeMs>(*std::min_element(opt.preliminary_levels.begin(),
                                                                          opt.preliminary_levels.end()) /
                                                        2) * p.delta_t_a_s * 1000
                              : last_final;
  auto ceil_to = [&](TimeMs v) {
    TimeMs q = v / opt.spacing_ms;
    if (q * opt.spacing_ms < v) ++q;
    return q * opt.spacing_ms;
  };
  auto floor_to = [&](TimeMs v) {
    TimeMs q = v / opt.spacing_ms;
    if (q * opt.spacing_ms > v) --q;
    return q * opt.spacing_ms;
  };
  const TimeMs lo = ceil_to(first_needed);
  const TimeMs hi = floor_to(std::max(last_final, last_any));
  if (hi < lo) return result;

  std::vector<TimeMs> anchors;
  for (TimeMs t = lo; t <= hi; t += opt.spacing_ms) anchors.push_back(t);

  // Every distinct inner window, evaluated once.
  std::vector<TimeMs> inner;
  for (TimeMs t : anchors)
    for (int i = 0; i <= p.n_a(); ++i) inner.push_back(inner_anchor(t, i, p));
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> f(inner.size(), nan);
  parallel_for(inner.size(), opt.threads, [&](std::size_t k) {
    if (window_available(series, inner[k], p)) f[k] = window_f(series, inner[k], p);
  });
  auto lookup = [&](TimeMs a) {
    const auto it = std::lower_bound(inner.begin(), inner.end(), a);
    return f[static_cast<std::size_t>(it - inner.begin())];
  };

  std::vector<int> levels = opt.preliminary_levels;
  std::sort(levels.begin(), levels.end());
  std::vector<double> values(static_cast<std::size_t>(p.n_a()) + 1);
  for (TimeMs t : anchors) {
    for (int i = 0; i <= p.n_a(); ++i) values[static_cast<std::size_t>(i)] = lookup(inner_anchor(t, i, p));
    bool any = false;
    if (std::none_of(values.begin(), values.end(), [](double v) { return std::isnan(v); })) {
      result.points.push_back({t, detail::combine_final(values, p), SmqStatus::final_value, p.n_a()});
      any = true;
    }
    if (opt.preliminary) {
      const int mid = p.n_a() / 2;
      for (int m : levels) {
        bool ok = true;
        for (int i = mid - m / 2; i <= mid + m / 2; ++i) ok = ok && !std::isnan(values[static_cast<std::size_t>(i)]);
        if (!ok) continue;
        result.points.push_back({t, detail::combine_preliminary(values, m, p), SmqStatus::preliminary, m});
        any = true;
      }
    }
    if (!any) result.skipped.push_back(t);
  }
  return result;
}

}  // namespace smq

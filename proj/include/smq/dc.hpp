#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/tick.hpp"

namespace smq {

/// Directional-change threshold in log-return units (0.0005 is 0.05%).
class Threshold {
 public:
  explicit Threshold(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw Error(Errc::config, "threshold must be positive, got " + format_double(lambda));
  }
  double value() const noexcept { return lambda_; }
  bool operator==(const Threshold&) const = default;

 private:
  double lambda_;
};

/// lambda_i = i * step for i = 1..count.
inline std::vector<Threshold> threshold_grid(std::size_t count = 100, double step = 0.0005) {
  std::vector<Threshold> out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) out.emplace_back(static_cast<double>(i) * step);
  return out;
}

enum class Trend : std::int8_t { unset = 0, up = 1, down = -1 };

constexpr const char* to_string(Trend t) noexcept {
  switch (t) {
    case Trend::up: return "up";
    case Trend::down: return "down";
    default: return "unset";
  }
}

struct DcRunnerState {
  Trend mode = Trend::unset;
  bool started = false;
  double origin_x = 0.0;  // first observed price, reference for seeding
  double extreme_x = 0.0;
  TimeMs extreme_time = 0;
  double dcc_x = 0.0;     // price at the last confirmation (or seeding tick)
  TimeMs dcc_time = 0;
  TimeMs last_time = 0;
};

struct DcEvent {
  TimeMs time = 0;
  Trend new_mode = Trend::unset;
  double confirm_x = 0.0;
  double extreme_x = 0.0;

  bool operator==(const DcEvent&) const = default;
};

/// Overshoot in multiples of lambda; never below -1.
struct OvershootPoint {
  TimeMs time = 0;
  double omega = 0.0;

  bool operator==(const OvershootPoint&) const = default;
};

struct DcStepResult {
  std::optional<DcEvent> event;
  std::optional<OvershootPoint> overshoot;  // empty while unseeded
};

/// Advances one runner by one tick.
///
/// While unset the runner waits for the first move of at least lambda from the
/// first observed price; that move fixes the trend without an event. Afterwards
/// a reversal of at least lambda from the running extreme confirms a
/// directional change, resets the reference to the confirming price and
/// reports omega = 0 for the new trend.
inline DcStepResult dc_step(DcRunnerState& s, const LogPricePoint& p, Threshold threshold) {
  const double lambda = threshold.value();
  if (s.started && p.time < s.last_time) {
    throw Error(Errc::sequencing, "time regression in directional-change runner at t=" +
                                      std::to_string(p.time));
  }
  s.last_time = p.time;

  DcStepResult out;
  if (!s.started) {
    s.started = true;
    s.origin_x = p.x;
    return out;
  }

  switch (s.mode) {
    case Trend::unset: {
      const double move = p.x - s.origin_x;
      if (move >= lambda || -move >= lambda) {
        s.mode = move > 0 ? Trend::up : Trend::down;
        s.extreme_x = p.x;
        s.extreme_time = p.time;
        s.dcc_x = p.x;
        s.dcc_time = p.time;
        out.overshoot = OvershootPoint{p.time, 0.0};
      }
      return out;
    }
    case Trend::up: {
      if (p.x > s.extreme_x) {
        s.extreme_x = p.x;
        s.extreme_time = p.time;
      }
      if (s.extreme_x - p.x >= lambda) {
        out.event = DcEvent{p.time, Trend::down, p.x, s.extreme_x};
        s.mode = Trend::down;
        s.extreme_x = p.x;
        s.extreme_time = p.time;
        s.dcc_x = p.x;
        s.dcc_time = p.time;
        out.overshoot = OvershootPoint{p.time, 0.0};
      } else {
        out.overshoot = OvershootPoint{p.time, (p.x - s.dcc_x) / lambda};
      }
      return out;
    }
    case Trend::down: {
      if (p.x < s.extreme_x) {
        s.extreme_x = p.x;
        s.extreme_time = p.time;
      }
      if (p.x - s.extreme_x >= lambda) {
        out.event = DcEvent{p.time, Trend::up, p.x, s.extreme_x};
        s.mode = Trend::up;
        s.extreme_x = p.x;
        s.extreme_time = p.time;
        s.dcc_x = p.x;
        s.dcc_time = p.time;
        out.overshoot = OvershootPoint{p.time, 0.0};
      } else {
        out.overshoot = OvershootPoint{p.time, (s.dcc_x - p.x) / lambda};
      }
      return out;
    }
  }
  return out;
}

class DcRunner {
 public:
  explicit DcRunner(Threshold threshold) : threshold_(threshold) {}

  DcStepResult step(const LogPricePoint& p) { return dc_step(state_, p, threshold_); }
  bool seeded() const noexcept { return state_.mode != Trend::unset; }
  const DcRunnerState& state() const noexcept { return state_; }
  Threshold threshold() const noexcept { return threshold_; }

 private:
  Threshold threshold_;
  DcRunnerState state_;
};

struct DcTrace {
  std::vector<DcEvent> events;
  std::vector<OvershootPoint> overshoots;  // one per tick from the seeding tick on

  bool operator==(const DcTrace&) const = default;
};

inline DcTrace run_dc(std::span<const LogPricePoint> points, Threshold threshold) {
  DcTrace trace;
  trace.overshoots.reserve(points.size());
  DcRunner runner(threshold);
  for (const auto& p : points) {
    auto r = runner.step(p);
    if (r.event) trace.events.push_back(*r.event);
    if (r.overshoot) trace.overshoots.push_back(*r.overshoot);
  }
  return trace;
}

// Debug CSV dumps.
inline void append_event_csv(std::string& out, Threshold lambda, const DcEvent& e) {
  append_int(out, e.time);
  out.push_back(',');
  append_double(out, lambda.value());
  out.push_back(',');
  out += to_string(e.new_mode);
  out.push_back(',');
  append_double(out, e.confirm_x);
  out.push_back(',');
  append_double(out, e.extreme_x);
  out.push_back('\n');
}

inline void append_overshoot_csv(std::string& out, Threshold lambda, const OvershootPoint& o) {
  append_int(out, o.time);
  out.push_back(',');
  append_double(out, lambda.value());
  out.push_back(',');
  append_double(out, o.omega);
  out.push_back('\n');
}

}  // namespace smq

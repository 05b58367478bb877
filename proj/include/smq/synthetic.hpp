#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/tick.hpp"

namespace smq {

struct Jump {
  double offset_s = 0.0;  // seconds from the start of the series
  double size = 0.0;      // signed log-return

  bool operator==(const Jump&) const = default;
};

/// Parameters of a random-walk tick series with exponential arrival gaps.
struct SyntheticSpec {
  std::uint64_t seed = 1;
  double duration_s = 86400.0;
  double mean_interval_s = 5.0;
  double volatility = 0.0;  // log-price scale per sqrt(second)
  std::vector<Jump> jumps;
  double base_price = 1.0;
  double spread = 0.0;  // full bid/ask spread in log units
  TimeMs start_ms = 1136073600000;  // 2006-01-01T00:00:00Z

  bool operator==(const SyntheticSpec&) const = default;
};

inline void validate(const SyntheticSpec& spec) {
  if (!(spec.duration_s > 0.0)) throw Error(Errc::config, "synthetic duration must be > 0");
  if (!(spec.mean_interval_s > 0.0))
    throw Error(Errc::config, "synthetic mean tick interval must be > 0");
  if (!(spec.volatility >= 0.0)) throw Error(Errc::config, "synthetic volatility must be >= 0");
  if (!(spec.base_price > 0.0)) throw Error(Errc::config, "synthetic base price must be > 0");
  if (!(spec.spread >= 0.0)) throw Error(Errc::config, "synthetic spread must be >= 0");
}

/// Pure function of `spec`: the same spec always yields the same ticks.
/// Each jump is applied once, at the first tick whose offset is >= the jump offset.
inline std::vector<Tick> generate_ticks(const SyntheticSpec& spec) {
  validate(spec);
  std::vector<Jump> jumps = spec.jumps;
  std::stable_sort(jumps.begin(), jumps.end(),
                   [](const Jump& a, const Jump& b) { return a.offset_s < b.offset_s; });

  std::mt19937_64 rng(spec.seed);
  std::exponential_distribution<double> gap(1.0 / spec.mean_interval_s);
  std::normal_distribution<double> noise(0.0, 1.0);

  const double half_spread = spec.spread / 2.0;
  const double bid_factor = std::exp(-half_spread);
  const double ask_factor = std::exp(half_spread);

  std::vector<Tick> out;
  out.reserve(static_cast<std::size_t>(spec.duration_s / spec.mean_interval_s * 1.1) + 16);
  std::size_t next_jump = 0;
  double t = 0.0;
  double x = 0.0;
  for (;;) {
    while (next_jump < jumps.size() && jumps[next_jump].offset_s <= t) x += jumps[next_jump++].size;
    const double mid = spec.base_price * std::exp(x);
    out.push_back({spec.start_ms + std::llround(t * 1000.0), mid * bid_factor, mid * ask_factor});

    const double dt = gap(rng);
    const double z = noise(rng);
    t += dt;
    if (t >= spec.duration_s) break;
    x += spec.volatility * std::sqrt(dt) * z;
  }
  return out;
}

/// "offset:size" in seconds and log-return units.
inline Jump parse_jump(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::config, "jump must be OFFSET:SIZE");
  auto offset = parse_number<double>(trim(text.substr(0, colon)));
  auto size = parse_number<double>(trim(text.substr(colon + 1)));
  if (!offset || !size || *offset < 0.0)
    throw Error(Errc::config, "invalid jump '" + std::string(text) + "'");
  return {*offset, *size};
}

/// Flat `key = value` file; `#` starts a comment. `jump` may repeat.
inline SyntheticSpec parse_synthetic_spec(std::istream& in) {
  SyntheticSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::config, "synthetic spec line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    auto need_double = [&]() {
      auto v = parse_number<double>(value);
      if (!v) throw Error(Errc::config, "synthetic spec line " + std::to_string(line_no) + ": bad number");
      return *v;
    };
    if (key == "seed") {
      auto v = parse_number<std::uint64_t>(value);
      if (!v) throw Error(Errc::config, "synthetic spec: bad seed");
      spec.seed = *v;
    } else if (key == "duration") {
      spec.duration_s = need_double();
    } else if (key == "interval") {
      spec.mean_interval_s = need_double();
    } else if (key == "volatility") {
      spec.volatility = need_double();
    } else if (key == "base") {
      spec.base_price = need_double();
    } else if (key == "spread") {
      spec.spread = need_double();
    } else if (key == "start_ms") {
      auto v = parse_number<std::int64_t>(value);
      if (!v) throw Error(Errc::config, "synthetic spec: bad start_ms");
      spec.start_ms = *v;
    } else if (key == "jump") {
      spec.jumps.push_back(parse_jump(value));
    } else {
      throw Error(Errc::config, "synthetic spec: unknown key '" + std::string(key) + "'");
    }
  }
  validate(spec);
  return spec;
}

}  // namespace smq

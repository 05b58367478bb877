#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smq/error.hpp"
#include "smq/format.hpp"

namespace smq {

/// Milliseconds since the Unix epoch (UTC).
using TimeMs = std::int64_t;

/// One bid/ask quote. Within a stream, times are non-decreasing.
struct Tick {
  TimeMs time = 0;
  double bid = 0.0;
  double ask = 0.0;

  bool operator==(const Tick&) const = default;
};

inline bool is_valid(const Tick& t) noexcept {
  return std::isfinite(t.bid) && std::isfinite(t.ask) && t.bid > 0.0 && t.ask > 0.0 &&
         t.ask >= t.bid;
}

struct LogPricePoint {
  TimeMs time = 0;
  double x = 0.0;  // ln(mid)

  bool operator==(const LogPricePoint&) const = default;
};

inline LogPricePoint mid_log(const Tick& tick) noexcept {
  return {tick.time, std::log((tick.bid + tick.ask) / 2.0)};
}

inline std::vector<LogPricePoint> mid_log(std::span<const Tick> ticks) {
  std::vector<LogPricePoint> out;
  out.reserve(ticks.size());
  for (const auto& t : ticks) out.push_back(mid_log(t));
  return out;
}

struct TickParseResult {
  std::vector<Tick> ticks;
  std::size_t skipped = 0;  // malformed lines
};

namespace detail {

inline bool parse_tick_line(std::string_view line, Tick& out) {
  const auto c1 = line.find(',');
  if (c1 == std::string_view::npos) return false;
  const auto c2 = line.find(',', c1 + 1);
  if (c2 == std::string_view::npos) return false;
  if (line.find(',', c2 + 1) != std::string_view::npos) return false;
  auto time = parse_number<std::int64_t>(trim(line.substr(0, c1)));
  auto bid = parse_number<double>(trim(line.substr(c1 + 1, c2 - c1 - 1)));
  auto ask = parse_number<double>(trim(line.substr(c2 + 1)));
  if (!time || !bid || !ask) return false;
  out = Tick{*time, *bid, *ask};
  return is_valid(out);
}

}  // namespace detail

/// Reads `time_ms,bid,ask` records. Blank lines are ignored; lines that do not
/// parse or violate the quote invariants are skipped and counted. A timestamp
/// earlier than the previous accepted tick rejects the whole stream.
inline TickParseResult parse_ticks(std::istream& in) {
  TickParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (trim(view).empty()) continue;
    Tick tick;
    if (!detail::parse_tick_line(view, tick)) {
      ++result.skipped;
      continue;
    }
    if (!result.ticks.empty() && tick.time < result.ticks.back().time) {
      throw Error(Errc::sequencing, "non-monotone timestamp at line " + std::to_string(line_no));
    }
    result.ticks.push_back(tick);
  }
  if (in.bad()) throw Error(Errc::io, "read failure after line " + std::to_string(line_no));
  return result;
}

inline TickParseResult read_tick_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open tick file '" + path + "'");
  return parse_ticks(in);
}

inline std::string serialize_ticks(std::span<const Tick> ticks) {
  std::string out;
  out.reserve(ticks.size() * 32);
  for (const auto& t : ticks) {
    append_int(out, t.time);
    out.push_back(',');
    append_double(out, t.bid);
    out.push_back(',');
    append_double(out, t.ask);
    out.push_back('\n');
  }
  return out;
}

}  // namespace smq

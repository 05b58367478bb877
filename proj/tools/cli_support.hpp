#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/magnitude.hpp"
#include "smq/quantile.hpp"

namespace smq::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kInsufficientHistory = 4 };

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::config: return kUsage;
    case Errc::insufficient_history:
    case Errc::window_unavailable: return kInsufficientHistory;
    default: return kData;
  }
}

/// "30m", "12h", "7200s", "1d", "500ms"; a bare number is seconds.
inline TimeMs parse_duration_ms(std::string_view text) {
  text = trim(text);
  struct Unit {
    std::string_view suffix;
    double ms;
  };
  // "ms" is tried before "s".
  static constexpr Unit units[] = {{"ms", 1.0}, {"s", 1e3}, {"m", 60e3}, {"h", 3600e3}, {"d", 86400e3}};
  double scale = 1e3;
  std::string_view number = text;
  for (const auto& u : units) {
    if (text.size() > u.suffix.size() && text.ends_with(u.suffix)) {
      const auto head = text.substr(0, text.size() - u.suffix.size());
      scale = u.ms;
      number = head;
      break;
    }
  }
  const auto value = parse_number<double>(number);
  if (!value || !(*value > 0.0)) throw Error(Errc::config, "invalid duration '" + std::string(text) + "'");
  const double ms = *value * scale;
  if (ms != static_cast<double>(static_cast<TimeMs>(ms)))
    throw Error(Errc::config, "duration '" + std::string(text) + "' is not a whole number of milliseconds");
  return static_cast<TimeMs>(ms);
}

/// START..END in epoch milliseconds, inclusive.
inline TimeWindow parse_window(std::string_view text) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) throw Error(Errc::config, "window must be START..END");
  const auto a = parse_number<std::int64_t>(trim(text.substr(0, sep)));
  const auto b = parse_number<std::int64_t>(trim(text.substr(sep + 2)));
  if (!a || !b) throw Error(Errc::config, "window bounds must be epoch milliseconds");
  if (*b < *a) throw Error(Errc::config, "window end precedes window start");
  return {*a, *b};
}

inline std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto c = text.find(',');
    const auto item = trim(text.substr(0, c));
    const auto v = parse_number<double>(item);
    if (!v) throw Error(Errc::config, "invalid number '" + std::string(item) + "' in list");
    out.push_back(*v);
    if (c == std::string_view::npos) break;
    text = text.substr(c + 1);
  }
  if (out.empty()) throw Error(Errc::config, "empty number list");
  return out;
}

inline nlohmann::json to_json(const SmqParams& p) {
  return {{"delta_t_s", p.delta_t_s},
          {"delta_t_a_s", p.delta_t_a_s},
          {"delta_t_f_s", p.delta_t_f_s},
          {"n_lambda", p.n_lambda},
          {"lambda_step", p.lambda_step},
          {"n_f_raw", p.n_f_raw},
          {"discarded", p.discarded},
          {"n_f_spec", p.spectral_length()},
          {"n_a", p.n_a()},
          {"eq3_divisor", p.divisor == InnerDivisor::n_a ? "na" : "na1"}};
}

inline std::string header_line(const nlohmann::json& j) { return "# " + j.dump() + "\n"; }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io, "write failure on '" + path + "'");
}

}  // namespace smq::cli

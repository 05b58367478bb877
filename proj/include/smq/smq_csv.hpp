#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smq/error.hpp"
#include "smq/format.hpp"
#include "smq/likelihood.hpp"
#include "smq/magnitude.hpp"

namespace smq {

// time_ms,magnitude,status,n_a_used
inline void append_smq_csv(std::string& out, const SmqPoint& p) {
  append_int(out, p.time);
  out.push_back(',');
  append_double(out, p.magnitude);
  out.push_back(',');
  out += to_string(p.status);
  out.push_back(',');
  append_int(out, p.n_a_used);
  out.push_back('\n');
}

/// Reads an SMQ CSV as written by append_smq_csv; `#` lines are comments.
inline std::vector<SmqPoint> parse_smq_csv(std::istream& in) {
  std::vector<SmqPoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    std::string_view fields[4];
    std::size_t n = 0;
    while (n < 4) {
      const auto c = v.find(',');
      fields[n++] = trim(v.substr(0, c));
      if (c == std::string_view::npos) {
        v = {};
        break;
      }
      v = v.substr(c + 1);
    }
    auto bad = [&]() { return Error(Errc::data, "malformed SMQ record at line " + std::to_string(line_no)); };
    if (n != 4 || !v.empty()) throw bad();
    auto t = parse_number<std::int64_t>(fields[0]);
    auto m = parse_number<double>(fields[1]);
    auto na = parse_number<int>(fields[3]);
    if (!t || !m || !na) throw bad();
    SmqStatus status;
    if (fields[2] == "final") status = SmqStatus::final_value;
    else if (fields[2] == "preliminary") status = SmqStatus::preliminary;
    else throw bad();
    out.push_back({*t, *m, status, *na});
  }
  return out;
}

// time_ms,k,l
inline void append_likelihood_csv(std::string& out, double k, const LikelihoodPoint& p) {
  append_int(out, p.time);
  out.push_back(',');
  append_double(out, k);
  out.push_back(',');
  append_double(out, p.l);
  out.push_back('\n');
}

// time_ms,magnitude,max_move_12h (third column empty when unknown)
inline void append_peak_csv(std::string& out, const MagnitudePeak& p, std::optional<double> max_move) {
  append_int(out, p.time);
  out.push_back(',');
  append_double(out, p.magnitude);
  out.push_back(',');
  if (max_move) append_double(out, *max_move);
  out.push_back('\n');
}

}  // namespace smq

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smq {

enum class Errc {
  io,
  data,
  sequencing,
  config,
  calibration,
  shape,
  format,
  checksum,
  window_unavailable,
  insufficient_history,
  contract,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io: return "io";
    case Errc::data: return "data";
    case Errc::sequencing: return "sequencing";
    case Errc::config: return "config";
    case Errc::calibration: return "calibration";
    case Errc::shape: return "shape";
    case Errc::format: return "format";
    case Errc::checksum: return "checksum";
    case Errc::window_unavailable: return "window-unavailable";
    case Errc::insufficient_history: return "insufficient-history";
    case Errc::contract: return "contract";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace smq

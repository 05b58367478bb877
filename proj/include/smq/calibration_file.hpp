#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "smq/error.hpp"
#include "smq/quantile.hpp"

namespace smq {

// Layout, all integers and doubles little-endian:
//   "SMQC"            4 bytes
//   version           u32
//   n_lambda          u32
//   window start/end  i64, i64
//   per threshold     f64 lambda, u64 sample_count, u64 stored_count
//   per threshold     stored_count x f64, ascending
//   crc32             u32 over every preceding byte
inline constexpr char kCalibrationMagic[4] = {'S', 'M', 'Q', 'C'};
inline constexpr std::uint32_t kCalibrationVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  template <class U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(le<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::format, "calibration data is truncated");
  }
  template <class U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc_of(std::span<const std::uint8_t> b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < b.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(b.size() - off, 1u << 30));
    crc = crc32(crc, b.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<std::uint8_t> save_calibration(const CalibrationSet& set) {
  detail::ByteWriter w;
  w.raw(kCalibrationMagic, 4);
  w.u32(kCalibrationVersion);
  w.u32(static_cast<std::uint32_t>(set.tables.size()));
  w.i64(set.window.start_ms);
  w.i64(set.window.end_ms);
  for (const auto& t : set.tables) {
    w.f64(t.lambda());
    w.u64(t.sample_count());
    w.u64(t.values().size());
  }
  for (const auto& t : set.tables)
    for (double v : t.values()) w.f64(v);
  const auto crc = detail::crc_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

inline CalibrationSet load_calibration(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kFixedHeader = 4 + 4 + 4 + 8 + 8;
  if (bytes.size() < kFixedHeader + 4) throw Error(Errc::format, "calibration data is truncated");
  if (std::memcmp(bytes.data(), kCalibrationMagic, 4) != 0)
    throw Error(Errc::format, "not a calibration file (bad magic)");

  detail::ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  const auto version = r.u32();
  if (version != kCalibrationVersion) {
    throw Error(Errc::format, "calibration format version " + std::to_string(version) +
                                  " is not supported (expected " + std::to_string(kCalibrationVersion) + ")");
  }
  const auto n_lambda = r.u32();
  CalibrationSet set;
  set.window.start_ms = r.i64();
  set.window.end_ms = r.i64();

  struct Entry {
    double lambda;
    std::uint64_t sample_count;
    std::uint64_t stored;
  };
  if (r.remaining() / 24 < n_lambda) throw Error(Errc::format, "calibration data is truncated");
  std::vector<Entry> entries(n_lambda);
  std::uint64_t total_values = 0;
  for (auto& e : entries) {
    e.lambda = r.f64();
    e.sample_count = r.u64();
    e.stored = r.u64();
    if (e.stored > bytes.size() / 8) throw Error(Errc::format, "calibration data is truncated");
    total_values += e.stored;
  }
  const std::uint64_t expected = kFixedHeader + 24ull * n_lambda + 8ull * total_values + 4;
  if (bytes.size() < expected) throw Error(Errc::format, "calibration data is truncated");
  if (bytes.size() > expected) throw Error(Errc::format, "trailing bytes after calibration data");

  const auto body = bytes.first(bytes.size() - 4);
  detail::ByteReader tail(bytes.last(4));
  if (detail::crc_of(body) != tail.u32()) throw Error(Errc::checksum, "calibration checksum mismatch");

  set.tables.reserve(n_lambda);
  for (const auto& e : entries) {
    std::vector<double> values(e.stored);
    for (auto& v : values) v = r.f64();
    set.tables.push_back(QuantileTable::from_stored(e.lambda, std::move(values), e.sample_count, set.window));
  }
  return set;
}

inline void write_calibration_file(const std::string& path, const CalibrationSet& set) {
  const auto bytes = save_calibration(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write calibration file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failure on '" + path + "'");
}

inline CalibrationSet read_calibration_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open calibration file '" + path + "' (run `calibrate` first)");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_calibration(bytes);
}

}  // namespace smq

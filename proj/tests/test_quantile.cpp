#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "smq/calibration_file.hpp"
#include "smq/quantile.hpp"

using namespace smq;

namespace {

constexpr TimeWindow kAll{0, 1LL << 62};

QuantileTable table_of(std::vector<double> v, double lambda = 0.001) {
  return QuantileTable::from_samples(lambda, std::move(v), kAll);
}

std::vector<OvershootPoint> overshoots_of(std::initializer_list<double> xs) {
  std::vector<OvershootPoint> out;
  TimeMs t = 10;
  for (double x : xs) out.push_back({t++, x});
  return out;
}

}  // namespace

TEST(Calibrate, SortsSamples) {
  const std::vector<Threshold> thr{Threshold(0.001)};
  const std::vector<std::vector<OvershootPoint>> os{overshoots_of({0.5, -0.2, 1.3})};
  const auto set = calibrate(thr, os, kAll);
  ASSERT_EQ(set.n_lambda(), 1u);
  EXPECT_EQ(set.tables[0].sample_count(), 3u);
  const auto v = set.tables[0].values();
  EXPECT_EQ(std::vector<double>(v.begin(), v.end()), (std::vector<double>{-0.2, 0.5, 1.3}));
}

TEST(Calibrate, EmptyWindowNamesThreshold) {
  const std::vector<Threshold> thr{Threshold(0.001), Threshold(0.0025)};
  const std::vector<std::vector<OvershootPoint>> os{overshoots_of({0.1, 0.2}), overshoots_of({})};
  try {
    calibrate(thr, os, kAll);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::calibration);
    EXPECT_NE(std::string(e.what()).find("0.0025"), std::string::npos) << e.what();
  }
  EXPECT_THROW(calibrate(thr, os, TimeWindow{0, 5}), Error);
}

TEST(Calibrate, OnlyInWindowSamplesCount) {
  const std::vector<Threshold> thr{Threshold(0.001)};
  const std::vector<std::vector<OvershootPoint>> os{overshoots_of({1, 2, 3, 4, 5, 6})};
  const auto set = calibrate(thr, os, TimeWindow{11, 13});
  EXPECT_EQ(set.tables[0].sample_count(), 3u);
  EXPECT_EQ(set.tables[0].values()[0], 2.0);
}

TEST(ToQuantile, Examples) {
  const auto t = table_of({1, 2, 3, 4});
  EXPECT_EQ(to_quantile(t, 2.0), 50.0);
  EXPECT_EQ(to_quantile(t, 0.0), 0.0);
  EXPECT_EQ(to_quantile(t, 9.0), 100.0);
  EXPECT_EQ(to_quantile(t, 2.5), 50.0);
  EXPECT_EQ(to_quantile(t, 4.0), 100.0);
}

TEST(ToQuantile, MonotoneInRangeAndAffineInvariant) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.3, 1.2);
  std::vector<double> s(3000);
  for (auto& v : s) v = g(rng);
  const auto t = table_of(s);
  std::vector<double> mapped = s;
  for (auto& v : mapped) v = 3.5 * v - 2.0;
  const auto tm = table_of(mapped);

  std::vector<double> queries(2000);
  for (auto& q : queries) q = g(rng) * 1.5;
  std::sort(queries.begin(), queries.end());
  double prev = -1.0;
  for (double q : queries) {
    const double v = to_quantile(t, q);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
    EXPECT_GE(v, prev);
    prev = v;
    EXPECT_EQ(v, to_quantile(tm, 3.5 * q - 2.0));
  }
}

TEST(ToQuantile, HintedLookupMatchesPlain) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s(5000);
  for (auto& v : s) v = std::round(g(rng) * 20) / 20;  // plenty of ties
  const auto t = table_of(s);
  std::size_t hint = 0;
  double walk = 0.0;
  for (int i = 0; i < 20000; ++i) {
    walk = i % 997 == 0 ? g(rng) * 4 : walk + g(rng) * 0.05;
    if (i % 1500 == 0) hint = static_cast<std::size_t>(rng() % 6000);  // stale or out-of-range hints
    EXPECT_EQ(t.quantile_of(walk, hint), t.quantile_of(walk));
  }
}

TEST(ToQuantile, UniformOnOwnSamples) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(20000);
  for (auto& v : s) v = e(rng) - 1.0;
  const auto t = table_of(s);
  std::array<int, 10> buckets{};
  for (double v : s) {
    const double q = to_quantile(t, v);
    buckets[std::min(9, static_cast<int>(std::ceil(q / 10.0)) - 1)]++;
  }
  for (int b : buckets) EXPECT_NEAR(b / 20000.0, 0.10, 0.015);
}

TEST(ToQuantile, SketchStaysWithinQuarterTenthPercentile) {
  const std::size_t n = (std::size_t{1} << 20) + 4321;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& v : s) v = g(rng);
  auto sorted = s;
  std::sort(sorted.begin(), sorted.end());
  const auto t = table_of(s);
  ASSERT_TRUE(t.is_sketch());
  EXPECT_EQ(t.values().size(), QuantileTable::kSketchPoints);
  EXPECT_EQ(t.sample_count(), n);
  std::size_t hint = 0;
  for (int i = 0; i < 5000; ++i) {
    const double q = g(rng) * 1.3;
    const double exact =
        100.0 * static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), q) - sorted.begin()) / n;
    EXPECT_NEAR(t.quantile_of(q), exact, 0.025);
    EXPECT_EQ(t.quantile_of(q, hint), t.quantile_of(q));
  }
  EXPECT_EQ(t.quantile_of(-1e9), 0.0);
  EXPECT_EQ(t.quantile_of(1e9), 100.0);
}

TEST(CalibrateFromPrices, MatchesTraceRoute) {
  const auto pts = fixtures::prices_of(fixtures::calibration_spec(3, 4.0));
  const auto thr = threshold_grid(100);
  const TimeWindow w{pts[pts.size() / 4].time, pts[pts.size() * 3 / 4].time};
  std::vector<std::vector<OvershootPoint>> os;
  for (const auto& t : thr) os.push_back(run_dc(pts, t).overshoots);
  const auto a = calibrate(thr, os, w);
  const auto b = calibrate_from_prices(pts, thr, w);
  const auto c = calibrate_from_prices(pts, thr, w, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, c);
  // Per-threshold counts equal an independent recount of in-window overshoots.
  for (std::size_t i = 0; i < thr.size(); ++i) {
    const auto count = std::count_if(os[i].begin(), os[i].end(), [&](const auto& o) { return w.contains(o.time); });
    EXPECT_EQ(b.tables[i].sample_count(), static_cast<std::uint64_t>(count));
  }
}

TEST(CalibrationFile, RoundTripExactAndSketch) {
  CalibrationSet set;
  set.window = {1000, 2000};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> big((std::size_t{1} << 20) + 1);
  for (auto& v : big) v = g(rng);
  set.tables.push_back(QuantileTable::from_samples(0.0005, {0.5, -0.25, 3.0}, set.window));
  set.tables.push_back(QuantileTable::from_samples(0.001, big, set.window));
  const auto bytes = save_calibration(set);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SMQC");
  EXPECT_EQ(load_calibration(bytes), set);
}

TEST(CalibrationFile, RoundTripDefaultCalibration) {
  const auto& set = fixtures::default_calibration();
  EXPECT_EQ(load_calibration(save_calibration(set)), set);
}

namespace {

CalibrationSet small_set(std::size_t n_lambda) {
  CalibrationSet set;
  set.window = {0, 10};
  for (const auto& t : threshold_grid(n_lambda))
    set.tables.push_back(QuantileTable::from_samples(t.value(), {0.0, 1.0, t.value()}, set.window));
  return set;
}

Errc load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    load_calibration(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::contract;  // no error
}

}  // namespace

TEST(CalibrationFile, CorruptedByteFailsChecksum) {
  auto bytes = save_calibration(small_set(5));
  bytes[bytes.size() - 20] ^= 0x10;
  EXPECT_EQ(load_error(bytes), Errc::checksum);
}

TEST(CalibrationFile, TruncationAndVersionAndMagic) {
  const auto good = save_calibration(small_set(5));
  auto truncated = good;
  truncated.resize(good.size() - 9);
  EXPECT_EQ(load_error(truncated), Errc::format);
  EXPECT_EQ(load_error({good.begin(), good.begin() + 10}), Errc::format);

  auto version = good;
  version[4] = 9;
  EXPECT_EQ(load_error(version), Errc::format);

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(load_error(magic), Errc::format);
}

TEST(CalibrationFile, ShapeMismatch) {
  const auto set = load_calibration(save_calibration(small_set(100)));
  EXPECT_NO_THROW(require_shape(set, threshold_grid(100)));
  try {
    require_shape(set, threshold_grid(50));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::shape);
  }
  EXPECT_THROW(require_shape(set, threshold_grid(100, 0.001)), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "oracles/brute_force_dc.hpp"
#include "smq/dc.hpp"

using namespace smq;

namespace {

std::vector<LogPricePoint> path(std::initializer_list<double> xs) {
  std::vector<LogPricePoint> out;
  TimeMs t = 1000;
  for (double x : xs) out.push_back({t++, x});
  return out;
}

// Power of two, so multiples of it are exact.
constexpr double kLam = 1.0 / 1024.0;

}  // namespace

TEST(DcStep, SeedThenReversal) {
  const auto pts = path({0.0, 0.0020, 0.0010});
  DcRunner r(Threshold(0.001));
  EXPECT_FALSE(r.step(pts[0]).overshoot.has_value());
  const auto s2 = r.step(pts[1]);
  EXPECT_FALSE(s2.event.has_value());
  ASSERT_TRUE(s2.overshoot.has_value());
  EXPECT_EQ(r.state().mode, Trend::up);
  const auto s3 = r.step(pts[2]);
  ASSERT_TRUE(s3.event.has_value());
  EXPECT_EQ(*s3.event, (DcEvent{pts[2].time, Trend::down, 0.0010, 0.0020}));
  ASSERT_TRUE(s3.overshoot.has_value());
  EXPECT_EQ(s3.overshoot->omega, 0.0);
}

TEST(DcStep, OvershootAfterDownChange) {
  DcRunnerState s;
  s.started = true;
  s.mode = Trend::down;
  s.dcc_x = 0.0010;
  s.extreme_x = 0.0010;
  s.last_time = 10;
  const auto r = dc_step(s, {11, 0.0002}, Threshold(0.001));
  EXPECT_FALSE(r.event.has_value());
  ASSERT_TRUE(r.overshoot.has_value());
  EXPECT_NEAR(r.overshoot->omega, 0.8, 1e-12);
}

TEST(DcStep, ExactThresholdMoveTriggers) {
  const auto trace = run_dc(path({0.0, kLam, 0.0}), Threshold(kLam));
  ASSERT_EQ(trace.events.size(), 1u);
  EXPECT_EQ(trace.events[0].new_mode, Trend::down);
}

TEST(DcStep, TimeRegressionIsSequencingError) {
  DcRunner r(Threshold(0.001));
  (void)r.step({100, 0.0});
  try {
    (void)r.step({99, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::sequencing);
  }
}

TEST(Threshold, MustBePositive) {
  EXPECT_THROW(Threshold(0.0), Error);
  EXPECT_THROW(Threshold(-1e-3), Error);
  const auto grid = threshold_grid();
  ASSERT_EQ(grid.size(), 100u);
  EXPECT_DOUBLE_EQ(grid.front().value(), 0.0005);
  EXPECT_DOUBLE_EQ(grid.back().value(), 0.05);
}

TEST(RunDc, ConstantStreamNeverSeeds) {
  std::vector<LogPricePoint> pts(500, {0, 0.3});
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].time = static_cast<TimeMs>(i);
  const auto trace = run_dc(pts, Threshold(0.0005));
  EXPECT_TRUE(trace.events.empty());
  EXPECT_TRUE(trace.overshoots.empty());
}

TEST(RunDc, EmptyAndSingle) {
  EXPECT_TRUE(run_dc({}, Threshold(0.01)).overshoots.empty());
  const auto one = path({0.5});
  EXPECT_TRUE(run_dc(one, Threshold(0.01)).overshoots.empty());
  EXPECT_TRUE(oracle::brute_force_dc(one, 0.01).overshoots.empty());
}

TEST(RunDc, ZigZagReachesOneBeforeEachChange) {
  std::vector<double> xs;
  const int pattern[] = {0, 1, 2, 1, 0};
  for (int rep = 0; rep < 6; ++rep)
    for (int k = rep == 0 ? 0 : 1; k < 5; ++k) xs.push_back(pattern[k] * kLam);
  std::vector<LogPricePoint> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back({static_cast<TimeMs>(i), xs[i]});

  const auto trace = run_dc(pts, Threshold(kLam));
  EXPECT_EQ(trace, oracle::brute_force_dc(pts, kLam));
  // Seeds at index 1 (up); a reversal every two ticks afterwards.
  ASSERT_EQ(trace.events.size(), (xs.size() - 2) / 2);
  for (std::size_t e = 0; e < trace.events.size(); ++e) {
    const std::size_t idx = 3 + 2 * e;
    EXPECT_EQ(trace.events[e].time, static_cast<TimeMs>(idx));
    EXPECT_EQ(trace.events[e].new_mode, e % 2 == 0 ? Trend::down : Trend::up);
    // The tick just before the change sits one lambda past the reference.
    EXPECT_EQ(trace.overshoots[idx - 2].omega, 1.0);
    EXPECT_EQ(trace.overshoots[idx - 1].omega, 0.0);
  }
}

TEST(RunDc, MonotoneRiseSeedsOnceAndNeverReverses) {
  std::vector<LogPricePoint> pts;
  for (int i = 0; i <= 100; ++i) pts.push_back({i, i * (10 * kLam / 100)});
  const auto trace = run_dc(pts, Threshold(kLam));
  EXPECT_TRUE(trace.events.empty());
  EXPECT_EQ(trace, oracle::brute_force_dc(pts, kLam));
  ASSERT_FALSE(trace.overshoots.empty());
  for (std::size_t i = 1; i < trace.overshoots.size(); ++i)
    EXPECT_LE(trace.overshoots[i - 1].omega, trace.overshoots[i].omega);
  EXPECT_NEAR(trace.overshoots.back().omega, 9.0, 0.11);  // seeding tick depends on rounding
}

TEST(RunDc, MatchesBruteForceOnRandomPaths) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    SyntheticSpec s;
    s.seed = seed;
    s.duration_s = 3000;
    s.mean_interval_s = 1;
    s.volatility = 3e-4;
    const auto pts = fixtures::prices_of(s);
    for (double lam : {0.0005, 0.001, 0.0033, 0.01}) {
      EXPECT_EQ(run_dc(pts, Threshold(lam)), oracle::brute_force_dc(pts, lam)) << seed << " " << lam;
    }
  }
}

TEST(RunDcProperties, AlternationAndThresholdConsistency) {
  SyntheticSpec s;
  s.seed = 21;
  s.duration_s = 20000;
  s.mean_interval_s = 1;
  s.volatility = 2e-4;
  const auto pts = fixtures::prices_of(s);
  for (const auto& thr : threshold_grid(20, 0.0005)) {
    const double lam = thr.value();
    const auto trace = run_dc(pts, thr);
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const auto& e = trace.events[i];
      EXPECT_GE(std::abs(e.confirm_x - e.extreme_x), lam);
      if (i > 0) {
        EXPECT_NE(e.new_mode, trace.events[i - 1].new_mode);
      }
    }
    for (const auto& o : trace.overshoots) EXPECT_GE(o.omega, -1.0);
  }
}

TEST(RunDcProperties, NoEarlierReversalBetweenEvents) {
  const auto pts = fixtures::dyadic_walk(5000, 8);
  const double lam = 64.0 / 65536.0;
  const auto trace = run_dc(pts, Threshold(lam));
  ASSERT_GT(trace.events.size(), 3u);
  // Between consecutive events no tick satisfied the reversal condition.
  std::size_t k = 0;
  for (std::size_t e = 0; e + 1 < trace.events.size(); ++e) {
    while (pts[k].time != trace.events[e].time) ++k;
    const bool was_down = trace.events[e].new_mode == Trend::down;
    double ext = pts[k].x;
    std::size_t m = k + 1;
    for (; pts[m].time != trace.events[e + 1].time; ++m) {
      ext = was_down ? std::min(ext, pts[m].x) : std::max(ext, pts[m].x);
      EXPECT_LT(was_down ? pts[m].x - ext : ext - pts[m].x, lam);
    }
  }
}

TEST(RunDcProperties, PreResetOvershootIsAtLeastOneBelowSectionMax) {
  // At a confirmation the excess has fallen by at least lambda from its
  // section maximum: pre-reset omega <= max omega - 1.
  const auto pts = fixtures::dyadic_walk(8000, 12);
  for (double lam : {32.0 / 65536.0, 128.0 / 65536.0}) {
    DcRunner r{Threshold(lam)};
    double section_max = 0.0;
    bool seeded = false;
    for (const auto& p : pts) {
      const double ref = r.state().dcc_x;
      const bool up = r.state().mode == Trend::up;
      const auto step = r.step(p);
      if (!step.overshoot) continue;
      if (!seeded) {
        seeded = true;
        section_max = 0.0;
        continue;
      }
      if (step.event) {
        const double pre = up ? (p.x - ref) / lam : (ref - p.x) / lam;
        EXPECT_LE(pre, section_max - 1.0 + 1e-12);
        section_max = 0.0;
      } else {
        section_max = std::max(section_max, step.overshoot->omega);
      }
    }
  }
}

TEST(RunDcProperties, InvariantUnderPriceScaling) {
  const auto pts = fixtures::dyadic_walk(4000, 5);
  auto shifted = pts;
  for (auto& p : shifted) p.x += 0.5;  // multiply prices by e^0.5, exact on the lattice
  for (double lam : {16.0 / 65536.0, 100.0 / 65536.0, 0.003}) {
    const auto a = run_dc(pts, Threshold(lam));
    const auto b = run_dc(shifted, Threshold(lam));
    ASSERT_EQ(a.events.size(), b.events.size());
    ASSERT_EQ(a.overshoots, b.overshoots);
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      EXPECT_EQ(a.events[i].time, b.events[i].time);
      EXPECT_EQ(a.events[i].new_mode, b.events[i].new_mode);
      EXPECT_EQ(a.events[i].confirm_x + 0.5, b.events[i].confirm_x);
    }
  }
}

TEST(RunDcProperties, EventCountNonIncreasingInLambda) {
  SyntheticSpec s;
  s.seed = 4;
  s.duration_s = 30000;
  s.mean_interval_s = 1;
  s.volatility = 2e-4;
  const auto pts = fixtures::prices_of(s);
  // Nested grid: every coarse threshold is a multiple of the fine one.
  std::size_t previous = SIZE_MAX;
  for (int i = 1; i <= 64; i *= 2) {
    const auto n = run_dc(pts, Threshold(i * 0.0005)).events.size();
    EXPECT_LE(n, previous) << "lambda=" << i * 0.0005;
    previous = n;
  }
}

TEST(DcCsv, DumpFormats) {
  std::string ev, os;
  append_event_csv(ev, Threshold(0.001), DcEvent{5, Trend::down, 0.001, 0.002});
  append_overshoot_csv(os, Threshold(0.001), OvershootPoint{5, 0.25});
  EXPECT_EQ(ev, "5,0.001,down,0.001,0.002\n");
  EXPECT_EQ(os, "5,0.001,0.25\n");
}

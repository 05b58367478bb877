// smq_cli: calibrate quantile tables, compute market-quake magnitudes,
// likelihood curves and peaks, and generate synthetic tick data.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "smq/smq.hpp"

namespace {

using namespace smq;
using namespace smq::cli;

struct Common {
  bool verbose = false;
  bool params_json = false;
  unsigned threads = 1;
};

struct ParamFlags {
  SmqParams params;
  void add(CLI::App& app) {
    app.add_option("--delta-t", params.delta_t_s, "Window length, seconds");
    app.add_option("--delta-t-a", params.delta_t_a_s, "Inner window spacing, seconds");
    app.add_option("--delta-t-f", params.delta_t_f_s, "Sampling step, seconds");
    app.add_option("--n-lambda", params.n_lambda, "Number of thresholds");
    app.add_option("--lambda-step", params.lambda_step, "Threshold spacing (log-return)");
    app.add_option("--n-f-raw", params.n_f_raw, "Grid points per window before the head drop");
    app.add_option("--discard", params.discarded, "Leading grid points dropped");
  }
};

void log(const Common& c, const std::string& msg) {
  if (c.verbose) std::cerr << msg << '\n';
}

std::vector<LogPricePoint> load_prices(const std::string& path, const Common& c) {
  auto parsed = read_tick_file(path);
  log(c, "read " + std::to_string(parsed.ticks.size()) + " ticks from " + path + ", skipped " +
             std::to_string(parsed.skipped) + " malformed lines");
  if (parsed.skipped > 0 && !c.verbose)
    std::cerr << "warning: skipped " << parsed.skipped << " malformed lines in " << path << '\n';
  return mid_log(parsed.ticks);
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string input, window, out, dump_overshoots, dump_events;
  ParamFlags flags;
};

int cmd_calibrate(const CalibrateArgs& a, const Common& c) {
  const auto& p = a.flags.params;
  p.validate();
  const auto window = parse_window(a.window);
  const auto prices = load_prices(a.input, c);
  const bool any_in_window = std::any_of(prices.begin(), prices.end(),
                                         [&](const LogPricePoint& x) { return window.contains(x.time); });
  if (!any_in_window) throw Error(Errc::data, "calibration window " + a.window + " contains no ticks");

  const auto thresholds = p.thresholds();
  const auto set = calibrate_from_prices(prices, thresholds, window, c.threads);
  write_calibration_file(a.out, set);

  if (!a.dump_overshoots.empty() || !a.dump_events.empty()) {
    std::string os_csv, ev_csv;
    for (const auto& t : thresholds) {
      const auto trace = run_dc(prices, t);
      for (const auto& e : trace.events) append_event_csv(ev_csv, t, e);
      for (const auto& o : trace.overshoots)
        if (window.contains(o.time)) append_overshoot_csv(os_csv, t, o);
    }
    if (!a.dump_overshoots.empty()) write_file(a.dump_overshoots, os_csv);
    if (!a.dump_events.empty()) write_file(a.dump_events, ev_csv);
  }

  std::string report;
  if (c.params_json) report += header_line({{"command", "calibrate"}, {"window", a.window}, {"params", to_json(p)}});
  for (const auto& t : set.tables) {
    append_double(report, t.lambda());
    report.push_back(',');
    append_int(report, static_cast<std::int64_t>(t.sample_count()));
    report.push_back('\n');
  }
  std::cout << report;
  return kOk;
}

// ---------------------------------------------------------------- smq

struct SmqArgs {
  std::string input, calib, out, grid = "30m", divisor = "na", dump_wbar;
  bool preliminary = false;
  ParamFlags flags;
};

int cmd_smq(SmqArgs a, const Common& c) {
  auto& p = a.flags.params;
  if (a.divisor == "na") p.divisor = InnerDivisor::n_a;
  else if (a.divisor == "na1") p.divisor = InnerDivisor::n_a_plus_one;
  else throw Error(Errc::config, "--eq3-divisor must be na or na1");
  p.validate();
  const auto spacing = parse_duration_ms(a.grid);
  if (spacing % (p.delta_t_a_s * 1000) != 0)
    throw Error(Errc::config, "--grid must be a multiple of delta_t_a");

  std::ifstream probe(a.calib, std::ios::binary);
  if (!probe) throw Error(Errc::io, "calibration file '" + a.calib + "' not found; run `smq_cli calibrate` first");
  probe.close();
  const auto calibration = read_calibration_file(a.calib);
  const auto thresholds = p.thresholds();
  require_shape(calibration, thresholds);

  const auto prices = load_prices(a.input, c);
  const auto series = compute_avg_overshoot(prices, thresholds, calibration, c.threads);
  if (!a.dump_wbar.empty()) {
    std::string w;
    for (const auto& pt : series.points) append_w_bar_csv(w, pt);
    write_file(a.dump_wbar, w);
  }

  SmqSeriesOptions opt;
  opt.spacing_ms = spacing;
  opt.preliminary = a.preliminary;
  opt.threads = c.threads;
  const auto result = smq_series(series, p, opt);
  for (TimeMs t : result.skipped) log(c, "gap: no magnitude at anchor " + std::to_string(t));

  std::string out;
  if (c.params_json)
    out += header_line({{"command", "smq"}, {"grid_ms", spacing}, {"preliminary", a.preliminary}, {"params", to_json(p)}});
  for (const auto& pt : result.points) append_smq_csv(out, pt);
  write_file(a.out, out);
  log(c, "wrote " + std::to_string(result.points.size()) + " magnitudes to " + a.out);
  return kOk;
}

std::vector<SmqPoint> load_smq(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open SMQ file '" + path + "'");
  return parse_smq_csv(in);
}

// ---------------------------------------------------------------- likelihood

struct LikelihoodArgs {
  std::string smq, out, k_list = "1,2,3,4,5,6", grid = "30m";
  double nd = 100.0;
  bool check_nesting = false;
};

int cmd_likelihood(const LikelihoodArgs& a, const Common& c) {
  const auto ks = parse_number_list(a.k_list);
  const auto spacing = parse_duration_ms(a.grid);
  const auto smq = load_smq(a.smq);
  const auto curves = likelihood_series(smq, a.nd, spacing, ks);
  if (curves.empty() || curves.front().points.empty()) {
    throw Error(Errc::insufficient_history,
                "no magnitude has " + format_double(a.nd) + " days of history in '" + a.smq + "'");
  }
  if (a.check_nesting && !curves_nested(curves))
    throw Error(Errc::data, "likelihood curves are not nested in k");

  std::string out;
  if (c.params_json) out += header_line({{"command", "likelihood"}, {"nd", a.nd}, {"k", ks}, {"grid_ms", spacing}});
  // Rows ordered by time, then by k in the given order.
  const auto rows = curves.front().points.size();
  for (std::size_t i = 0; i < rows; ++i)
    for (const auto& curve : curves) append_likelihood_csv(out, curve.k, curve.points[i]);
  write_file(a.out, out);
  return kOk;
}

// ---------------------------------------------------------------- peaks

struct PeaksArgs {
  std::string smq, prices, out, horizon = "12h", grid = "30m";
};

int cmd_peaks(const PeaksArgs& a, const Common& c) {
  const auto spacing = parse_duration_ms(a.grid);
  const auto horizon = parse_duration_ms(a.horizon);
  const auto peaks = detect_peaks(load_smq(a.smq), spacing);
  std::vector<LogPricePoint> prices;
  if (!a.prices.empty()) prices = load_prices(a.prices, c);

  std::string out;
  if (c.params_json) out += header_line({{"command", "peaks"}, {"grid_ms", spacing}, {"horizon_ms", horizon}});
  for (const auto& pk : peaks) {
    std::optional<double> move;
    if (!prices.empty()) {
      try {
        move = max_forward_move(prices, pk.time, horizon);
      } catch (const Error& e) {
        if (e.code() != Errc::insufficient_history) throw;
        log(c, "peak at " + std::to_string(pk.time) + ": " + e.what());
      }
    }
    append_peak_csv(out, pk, move);
  }
  write_file(a.out, out);
  return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec_file, out;
  std::optional<std::uint64_t> seed;
  std::optional<double> days, vol, interval, base, spread;
  std::optional<std::int64_t> start_ms;
  std::vector<std::string> jumps;
};

int cmd_synth(const SynthArgs& a, const Common&) {
  SyntheticSpec spec;
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file);
    if (!in) throw Error(Errc::io, "cannot open synthetic spec '" + a.spec_file + "'");
    spec = parse_synthetic_spec(in);
  }
  if (a.seed) spec.seed = *a.seed;
  if (a.days) spec.duration_s = *a.days * 86400.0;
  if (a.vol) spec.volatility = *a.vol;
  if (a.interval) spec.mean_interval_s = *a.interval;
  if (a.base) spec.base_price = *a.base;
  if (a.spread) spec.spread = *a.spread;
  if (a.start_ms) spec.start_ms = *a.start_ms;
  for (const auto& j : a.jumps) {
    std::string_view rest = j;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      spec.jumps.push_back(parse_jump(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  const auto ticks = generate_ticks(spec);
  write_file(a.out, serialize_ticks(ticks));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale of market quakes: directional-change overshoots to tick-anchored magnitudes"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("-v,--verbose", common.verbose, "Log progress to stderr");
  app.add_flag("--params-json", common.params_json, "Write the resolved parameters as a leading '#' line");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Build per-threshold quantile tables");
  c_cal->add_option("--input", cal.input, "Tick CSV")->required()->check(CLI::ExistingFile);
  c_cal->add_option("--window", cal.window, "START..END epoch ms (inclusive)")->required();
  c_cal->add_option("--out", cal.out, "Calibration file")->required();
  c_cal->add_option("--dump-overshoots", cal.dump_overshoots, "Write in-window overshoots CSV");
  c_cal->add_option("--dump-events", cal.dump_events, "Write directional-change events CSV");
  cal.flags.add(*c_cal);

  SmqArgs sa;
  auto* c_smq = app.add_subcommand("smq", "Compute magnitudes on an anchor grid");
  c_smq->add_option("--input", sa.input, "Tick CSV")->required()->check(CLI::ExistingFile);
  c_smq->add_option("--calib", sa.calib, "Calibration file")->required();
  c_smq->add_option("--grid", sa.grid, "Anchor spacing (15m or 30m)");
  c_smq->add_flag("--preliminary", sa.preliminary, "Also emit reduced-window estimates");
  c_smq->add_option("--eq3-divisor", sa.divisor, "na (default) or na1");
  c_smq->add_option("--out", sa.out, "SMQ CSV")->required();
  c_smq->add_option("--dump-wbar", sa.dump_wbar, "Write the average overshoot series CSV");
  sa.flags.add(*c_smq);

  LikelihoodArgs la;
  auto* c_lik = app.add_subcommand("likelihood", "Magnitude likelihood curves");
  c_lik->add_option("--smq", la.smq, "SMQ CSV")->required()->check(CLI::ExistingFile);
  c_lik->add_option("--nd", la.nd, "Look-back, days");
  c_lik->add_option("--k", la.k_list, "Comma-separated magnitude thresholds");
  c_lik->add_option("--grid", la.grid, "Magnitude grid spacing");
  c_lik->add_flag("--check-nesting", la.check_nesting, "Fail unless curves are non-increasing in k");
  c_lik->add_option("--out", la.out, "Likelihood CSV")->required();

  PeaksArgs pa;
  auto* c_pk = app.add_subcommand("peaks", "Detect magnitude peaks");
  c_pk->add_option("--smq", pa.smq, "SMQ CSV")->required()->check(CLI::ExistingFile);
  c_pk->add_option("--prices", pa.prices, "Tick CSV for the forward move column")->check(CLI::ExistingFile);
  c_pk->add_option("--horizon", pa.horizon, "Forward move horizon");
  c_pk->add_option("--grid", pa.grid, "Magnitude grid spacing");
  c_pk->add_option("--out", pa.out, "Peaks CSV")->required();

  SynthArgs sy;
  auto* c_syn = app.add_subcommand("synth", "Generate a synthetic tick series");
  c_syn->add_option("--spec", sy.spec_file, "key = value spec file")->check(CLI::ExistingFile);
  c_syn->add_option("--seed", sy.seed, "RNG seed");
  c_syn->add_option("--days", sy.days, "Duration, days");
  c_syn->add_option("--vol", sy.vol, "Log-price volatility per sqrt(second)");
  c_syn->add_option("--interval", sy.interval, "Mean tick interval, seconds");
  c_syn->add_option("--base", sy.base, "Base price");
  c_syn->add_option("--spread", sy.spread, "Bid/ask spread, log units");
  c_syn->add_option("--start-ms", sy.start_ms, "First tick time, epoch ms");
  c_syn->add_option("--jump", sy.jumps, "OFFSET_S:SIZE, repeatable or comma-separated");
  c_syn->add_option("--out", sy.out, "Tick CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*c_cal) return cmd_calibrate(cal, common);
    if (*c_smq) return cmd_smq(sa, common);
    if (*c_lik) return cmd_likelihood(la, common);
    if (*c_pk) return cmd_peaks(pa, common);
    if (*c_syn) return cmd_synth(sy, common);
  } catch (const smq::Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

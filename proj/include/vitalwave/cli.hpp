#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vitalwave/io.hpp"

namespace vitalwave::cli {

// Exit-code contract: 0 success, 1 usage, 2 data/schema, 3 analysis failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitAnalysis = 3;

/// Simulate a scenario config into a RecordingFile plus a `<output>.truth.json`
/// ground-truth sidecar.
inline int cmd_simulate(const std::string& config_path, const std::string& output_path,
                        std::optional<std::uint64_t> seed_override = std::nullopt) {
  RunConfig cfg;
  std::string config_bytes;
  try {
    config_bytes = read_file_bytes(config_path);
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitData;
  }
  if (seed_override) cfg.scenario.seed = *seed_override;

  try {
    const auto [recording, truth] = simulate_scenario(cfg.scenario, cfg.templates, cfg.transfer);
    write_recording_csv(recording, output_path);
    json sidecar = truth_to_json(truth);
    sidecar["meta"] = {
        {"tool_version", kToolVersion},
        {"seed", cfg.scenario.seed},
        {"config_digest", fnv1a_hex(config_bytes)},
    };
    write_json_file(sidecar, output_path + ".truth.json");
  } catch (const Error& e) {
    std::cerr << "simulate: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

struct AnalyzeOptions {
  std::optional<double> distance_m;
  std::optional<double> speed_kmh;
  std::optional<std::string> report_path;
  std::optional<std::string> config_path;  // filter/detector/band overrides
};

namespace detail {

inline std::optional<BeatSeries> pulse_series(const Trace& raw, const RunConfig& cfg) {
  const Trace filtered = bandpass(raw, cfg.filter);
  auto [oriented, polarity] = normalize_polarity(filtered);
  const std::vector<double> feet = detect_feet(oriented, cfg.detector);
  return locate_fiducials(oriented, feet, polarity, cfg.detector);
}

inline std::string one_line_summary(const VitalsReport& r) {
  char buf[64];
  std::string line;
  auto append = [&line, &buf](const char* fmt, double v) {
    std::snprintf(buf, sizeof(buf), fmt, v);
    if (!line.empty()) line += " | ";
    line += buf;
  };
  if (r.heart_rate_bpm) append("HR %.1f bpm", *r.heart_rate_bpm);
  if (r.respiration_rate_per_min) append("RR %.1f /min", *r.respiration_rate_per_min);
  if (r.cadence_hz) append("cadence %.2f Hz", *r.cadence_hz);
  if (r.step_length_m) append("step %.3f m", *r.step_length_m);
  if (r.pulse_time_difference_s) append("PTD %.1f ms", 1e3 * *r.pulse_time_difference_s);
  if (r.pwv_mps) append("PWV %.2f m/s", *r.pwv_mps);
  if (line.empty()) line = "no vitals derived";
  return line;
}

}  // namespace detail

/// Run the full analysis pipeline over a RecordingFile and write a ReportFile.
inline int cmd_analyze(const std::string& input_path, const AnalyzeOptions& opts = {}) {
  RunConfig cfg;
  try {
    if (opts.config_path) cfg = load_config(*opts.config_path);
  } catch (const Error& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kExitData;
  }

  Recording recording = [] {
    return Recording({Trace(1.0, 0.0, {0.0})});
  }();
  try {
    recording = read_recording_csv(input_path);
  } catch (const Error& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kExitData;
  }

  const Trace* chest = recording.find_channel(Site::chest);
  const Trace* wrist = recording.find_channel(Site::wrist);
  const Trace* ankle = recording.find_channel(Site::ankle);

  std::optional<BeatSeries> primary;
  std::optional<BeatSeries> secondary;
  try {
    if (wrist != nullptr) primary = detail::pulse_series(*wrist, cfg);
    if (ankle != nullptr) {
      auto series = detail::pulse_series(*ankle, cfg);
      if (primary) {
        secondary = series;
      } else {
        primary = series;
      }
    }
  } catch (const NoBeatsFound& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kExitAnalysis;
  } catch (const Error& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kExitAnalysis;
  }

  std::optional<Trace> chest_trace;
  if (chest != nullptr) chest_trace = *chest;
  const std::optional<double> speed_mps =
      opts.speed_kmh ? std::optional<double>(*opts.speed_kmh / 3.6) : std::nullopt;

  const VitalsReport report =
      build_report(primary, secondary, chest_trace, opts.distance_m, speed_mps, cfg.bands);

  json meta = {
      {"tool_version", kToolVersion},
      {"seed", nullptr},
      {"config_digest", fnv1a_hex(read_file_bytes(input_path))},
      {"input", input_path},
  };
  if (opts.distance_m) meta["distance_m"] = *opts.distance_m;
  if (opts.speed_kmh) meta["speed_kmh"] = *opts.speed_kmh;

  const std::string report_path = opts.report_path.value_or(input_path + ".report.json");
  try {
    write_json_file(report_to_json(report, meta), report_path);
  } catch (const Error& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kExitData;
  }
  std::cout << detail::one_line_summary(report) << '\n';
  return kExitOk;
}

/// Write a two-column CSV (frequency_hz, psd) for one recording channel.
inline int cmd_spectrum(const std::string& input_path, const std::string& column,
                        const std::string& output_path) {
  Recording recording = [] {
    return Recording({Trace(1.0, 0.0, {0.0})});
  }();
  try {
    recording = read_recording_csv(input_path);
  } catch (const Error& e) {
    std::cerr << "spectrum: " << e.what() << '\n';
    return kExitData;
  }
  const auto site = vitalwave::detail::parse_site(column);
  const Trace* trace = site ? recording.find_channel(*site) : nullptr;
  if (trace == nullptr) {
    std::cerr << "spectrum: no column named `" << column << "` in " << input_path << '\n';
    return kExitUsage;
  }
  try {
    const double seg = std::min(30.0, trace->duration());
    const Spectrum spec = power_spectrum(detrend(*trace), seg, 0.5);
    std::ofstream out(output_path, std::ios::binary);
    if (!out) {
      std::cerr << "spectrum: cannot open output file: " << output_path << '\n';
      return kExitData;
    }
    out << "frequency_hz,psd\n";
    char buf[64];
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g", spec.frequency_at(k), spec.power[k]);
      out << buf << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "spectrum: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

/// Argument parsing + dispatch for the `vitalwave` binary.
inline int run(const std::vector<std::string>& args) {
  CLI::App app{"capillary-fiber wearable signal simulator and analyzer"};
  app.require_subcommand(1);

  std::string config_path, output_path, input_path, column;
  std::optional<std::uint64_t> seed_override;
  AnalyzeOptions opts;

  CLI::App* sim = app.add_subcommand("simulate", "synthesize a scenario into a recording CSV");
  sim->add_option("config", config_path, "scenario configuration JSON")->required();
  sim->add_option("output", output_path, "output recording CSV path")->required();
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = sim->add_option("--seed", seed_value, "override the config seed");

  CLI::App* ana = app.add_subcommand("analyze", "extract vitals from a recording CSV");
  ana->add_option("input", input_path, "recording CSV")->required();
  double distance = 0.0, speed = 0.0;
  CLI::Option* dist_opt = ana->add_option("--distance-m", distance,
                                          "arterial path-length difference in meters");
  CLI::Option* speed_opt = ana->add_option("--speed-kmh", speed, "treadmill speed in km/h");
  std::string report_path, ana_config;
  CLI::Option* report_opt = ana->add_option("--report", report_path, "report JSON path");
  CLI::Option* cfg_opt = ana->add_option("--config", ana_config, "analysis parameter overrides");

  CLI::App* spc = app.add_subcommand("spectrum", "write one channel's PSD as CSV");
  spc->add_option("input", input_path, "recording CSV")->required();
  spc->add_option("column", column, "site column name")->required();
  spc->add_option("output", output_path, "output CSV path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (sim->parsed()) {
    if (seed_opt->count() > 0) seed_override = seed_value;
    return cmd_simulate(config_path, output_path, seed_override);
  }
  if (ana->parsed()) {
    if (dist_opt->count() > 0) opts.distance_m = distance;
    if (speed_opt->count() > 0) opts.speed_kmh = speed;
    if (report_opt->count() > 0) opts.report_path = report_path;
    if (cfg_opt->count() > 0) opts.config_path = ana_config;
    return cmd_analyze(input_path, opts);
  }
  return cmd_spectrum(input_path, column, output_path);
}

}  // namespace vitalwave::cli

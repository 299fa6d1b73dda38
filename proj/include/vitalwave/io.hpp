#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vitalwave/dsp.hpp"
#include "vitalwave/errors.hpp"
#include "vitalwave/pulse.hpp"
#include "vitalwave/synth.hpp"
#include "vitalwave/trace.hpp"
#include "vitalwave/vitals.hpp"

namespace vitalwave {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over raw bytes; used to stamp reports with a config digest.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Recording CSV: header `time_s,<site>[,<site>...]`, one row per sample,
// UTF-8, LF line endings, decimal points.
// ---------------------------------------------------------------------------

inline void write_recording_csv(const Recording& recording, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutOfRange("cannot open output file: " + path);
  out << "time_s";
  for (const Trace& ch : recording.channels()) out << ',' << site_name(ch.site());
  out << '\n';
  char buf[64];
  const double fs = recording.sample_rate();
  const double t0 = recording.start_time();
  for (std::size_t i = 0; i < recording.length(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", t0 + static_cast<double>(i) / fs);
    out << buf;
    for (const Trace& ch : recording.channels()) {
      std::snprintf(buf, sizeof(buf), "%.12g", ch.samples()[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace detail {

inline std::optional<Site> parse_site(const std::string& name) {
  if (name == "chest") return Site::chest;
  if (name == "wrist") return Site::wrist;
  if (name == "ankle") return Site::ankle;
  if (name == "unspecified") return Site::unspecified;
  return std::nullopt;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Parse a RecordingFile. Schema violations name the offending row/column.
inline Recording read_recording_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutOfRange("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw EmptySamples("empty recording file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = detail::split_csv_row(line);
  if (header.size() < 2 || header[0] != "time_s") {
    throw InvalidConfig("header must be `time_s,<site>[,<site>...]` in " + path);
  }
  std::vector<Site> sites;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto site = detail::parse_site(header[c]);
    if (!site) {
      throw InvalidConfig("unknown site column `" + header[c] + "` (column " +
                          std::to_string(c + 1) + ")");
    }
    sites.push_back(*site);
  }

  std::vector<double> times;
  std::vector<std::vector<double>> columns(sites.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_row(line);
    if (fields.size() != header.size()) {
      throw InvalidConfig("row " + std::to_string(row) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw InvalidConfig("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                            ": not a number: `" + fields[c] + "`");
      }
      if (c == 0) {
        times.push_back(v);
      } else {
        columns[c - 1].push_back(v);
      }
    }
  }
  if (times.size() < 2) {
    throw EmptySamples("recording needs at least two sample rows: " + path);
  }

  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw InvalidConfig("time column must be strictly increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1e-6) {
      throw InvalidConfig("non-uniform time step at row " + std::to_string(i + 2) +
                          " (expected " + std::to_string(dt) + " s, got " +
                          std::to_string(step) + " s)");
    }
  }

  std::vector<Trace> channels;
  for (std::size_t c = 0; c < sites.size(); ++c) {
    channels.emplace_back(1.0 / dt, times.front(), std::move(columns[c]), sites[c]);
  }
  return Recording(std::move(channels), path);
}

// ---------------------------------------------------------------------------
// Configuration JSON (strict: unknown keys rejected, seed required)
// ---------------------------------------------------------------------------

struct RunConfig {
  ScenarioConfig scenario;
  ScenarioTemplates templates;
  SensorTransfer transfer;
  FilterSpec filter;
  DetectorParams detector;
  SpectralBands bands;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw InvalidConfig("unknown key `" + key + "` in " + where);
  }
}

template <typename T>
void assign_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace detail

/// Parse and validate a scenario/analysis configuration. Every randomized
/// behavior requires the explicit top-level "seed"; its absence is a schema
/// error.
inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidConfig("configuration root must be a JSON object");
  detail::reject_unknown_keys(
      j, {"seed", "sample_rate_hz", "scenario", "transfer", "filter", "detector", "spectrum"},
      "configuration root");
  if (!j.contains("seed") || !j.at("seed").is_number_integer()) {
    throw InvalidConfig("configuration requires an integer `seed`");
  }

  RunConfig cfg;
  cfg.scenario.seed = j.at("seed").get<std::uint64_t>();
  detail::assign_if(j, "sample_rate_hz", cfg.scenario.sample_rate_hz);

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    detail::reject_unknown_keys(
        s,
        {"duration_s", "heart_rate_bpm", "ibi_sd_s", "respiration_rate_hz", "respiration_depth",
         "cadence_hz", "cadence_depth", "breath_holds", "occlusion", "inter_site_delay_s",
         "noise_sd", "chest_pulse_depth"},
        "scenario");
    detail::assign_if(s, "duration_s", cfg.scenario.duration_s);
    detail::assign_if(s, "heart_rate_bpm", cfg.scenario.heart_rate_bpm);
    detail::assign_if(s, "ibi_sd_s", cfg.scenario.ibi_sd_s);
    detail::assign_if(s, "respiration_rate_hz", cfg.scenario.respiration_rate_hz);
    detail::assign_if(s, "respiration_depth", cfg.scenario.respiration_depth);
    detail::assign_if(s, "cadence_hz", cfg.scenario.cadence_hz);
    detail::assign_if(s, "cadence_depth", cfg.scenario.cadence_depth);
    detail::assign_if(s, "inter_site_delay_s", cfg.scenario.inter_site_delay_s);
    detail::assign_if(s, "noise_sd", cfg.scenario.noise_sd);
    detail::assign_if(s, "chest_pulse_depth", cfg.scenario.chest_pulse_depth);
    if (s.contains("breath_holds")) {
      for (const auto& w : s.at("breath_holds")) {
        if (!w.is_array() || w.size() != 2) {
          throw InvalidConfig("breath_holds entries must be [t0, t1] pairs");
        }
        cfg.scenario.breath_holds.push_back({w[0].get<double>(), w[1].get<double>()});
      }
    }
    if (s.contains("occlusion") && !s.at("occlusion").is_null()) {
      const json& o = s.at("occlusion");
      detail::reject_unknown_keys(
          o, {"inflate_start_s", "full_occlusion_s", "release_s", "suppress_frac"}, "occlusion");
      OcclusionPhase phase{};
      phase.inflate_start_s = o.at("inflate_start_s").get<double>();
      phase.full_occlusion_s = o.at("full_occlusion_s").get<double>();
      phase.release_s = o.at("release_s").get<double>();
      detail::assign_if(o, "suppress_frac", phase.suppress_frac);
      cfg.scenario.occlusion = phase;
    }
  }

  if (j.contains("transfer")) {
    const json& t = j.at("transfer");
    detail::reject_unknown_keys(t, {"baseline", "gain", "polarity", "monotonic", "fold_point"},
                                "transfer");
    detail::assign_if(t, "baseline", cfg.transfer.baseline);
    detail::assign_if(t, "gain", cfg.transfer.gain);
    detail::assign_if(t, "monotonic", cfg.transfer.monotonic);
    detail::assign_if(t, "fold_point", cfg.transfer.fold_point);
    if (t.contains("polarity")) {
      const std::string p = t.at("polarity").get<std::string>();
      if (p == "decreasing") {
        cfg.transfer.polarity = Polarity::decreasing;
      } else if (p == "increasing") {
        cfg.transfer.polarity = Polarity::increasing;
      } else {
        throw InvalidConfig("transfer polarity must be `decreasing` or `increasing`");
      }
    }
  }

  if (j.contains("filter")) {
    const json& f = j.at("filter");
    detail::reject_unknown_keys(f, {"low_cut_hz", "high_cut_hz", "order", "mode"}, "filter");
    detail::assign_if(f, "low_cut_hz", cfg.filter.low_cut_hz);
    detail::assign_if(f, "high_cut_hz", cfg.filter.high_cut_hz);
    detail::assign_if(f, "order", cfg.filter.order);
    if (f.contains("mode")) {
      const std::string m = f.at("mode").get<std::string>();
      if (m == "causal-streaming") {
        cfg.filter.mode = FilterMode::causal_streaming;
      } else if (m == "zero-phase-offline") {
        cfg.filter.mode = FilterMode::zero_phase_offline;
      } else {
        throw InvalidConfig("filter mode must be `causal-streaming` or `zero-phase-offline`");
      }
    }
  }

  if (j.contains("detector")) {
    const json& d = j.at("detector");
    detail::reject_unknown_keys(
        d, {"threshold_frac", "refractory_s", "envelope_window_s", "slope_gate_frac", "smooth_s"},
        "detector");
    detail::assign_if(d, "threshold_frac", cfg.detector.threshold_frac);
    detail::assign_if(d, "refractory_s", cfg.detector.refractory_s);
    detail::assign_if(d, "envelope_window_s", cfg.detector.envelope_window_s);
    detail::assign_if(d, "slope_gate_frac", cfg.detector.slope_gate_frac);
    detail::assign_if(d, "smooth_s", cfg.detector.smooth_s);
  }

  if (j.contains("spectrum")) {
    const json& sp = j.at("spectrum");
    detail::reject_unknown_keys(sp,
                                {"segment_seconds", "overlap_frac", "respiration_lo_hz",
                                 "respiration_hi_hz", "cadence_lo_hz", "cadence_hi_hz"},
                                "spectrum");
    detail::assign_if(sp, "segment_seconds", cfg.bands.segment_seconds);
    detail::assign_if(sp, "overlap_frac", cfg.bands.overlap_frac);
    detail::assign_if(sp, "respiration_lo_hz", cfg.bands.respiration_lo_hz);
    detail::assign_if(sp, "respiration_hi_hz", cfg.bands.respiration_hi_hz);
    detail::assign_if(sp, "cadence_lo_hz", cfg.bands.cadence_lo_hz);
    detail::assign_if(sp, "cadence_hi_hz", cfg.bands.cadence_hi_hz);
  }

  validate_config(cfg.scenario);
  validate_transfer(cfg.transfer);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Ground-truth sidecar and vitals report JSON
// ---------------------------------------------------------------------------

inline json truth_to_json(const GroundTruth& truth) {
  json j;
  json channels = json::object();
  for (std::size_t i = 0; i < truth.channel_sites.size(); ++i) {
    channels[site_name(truth.channel_sites[i])] = {
        {"beat_foot_times_s", truth.beat_foot_times[i]},
        {"beat_onset_times_s", truth.beat_onset_times[i]},
    };
  }
  j["channels"] = channels;
  j["respiration_rate_hz"] = truth.respiration_rate_hz;
  j["cadence_hz"] = truth.cadence_hz;
  j["inter_site_delay_s"] = truth.inter_site_delay_s;
  if (truth.occlusion) {
    j["occlusion"] = {
        {"inflate_start_s", truth.occlusion->inflate_start_s},
        {"full_occlusion_s", truth.occlusion->full_occlusion_s},
        {"release_s", truth.occlusion->release_s},
        {"suppress_frac", truth.occlusion->suppress_frac},
        {"diastolic_suppressed_window_s", *truth.diastolic_suppressed_window},
        {"release_burst_window_s", *truth.release_burst_window},
    };
  } else {
    j["occlusion"] = nullptr;
  }
  return j;
}

inline json report_to_json(const VitalsReport& report, const json& meta) {
  json j;
  j["meta"] = meta;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  put("heart_rate_bpm", report.heart_rate_bpm);
  if (report.prv) {
    json h = json::array();
    for (const HistogramBin& b : report.prv->histogram) {
      h.push_back({{"bin_center_s", b.bin_center_s}, {"count", b.count}});
    }
    j["prv"] = {
        {"n_beats", report.prv->n_beats},
        {"mean_ibi_s", report.prv->mean_ibi_s},
        {"sdnn_s", report.prv->sdnn_s},
        {"gaussian_fit", {{"mu_s", report.prv->gaussian_fit.mu_s},
                          {"sigma_s", report.prv->gaussian_fit.sigma_s}}},
        {"long_term_flag_caveat", report.prv->long_term_flag_caveat},
        {"histogram", h},
    };
  } else {
    j["prv"] = nullptr;
  }
  put("respiration_rate_per_min", report.respiration_rate_per_min);
  put("respiration_confidence", report.respiration_confidence);
  put("cadence_hz", report.cadence_hz);
  put("step_length_m", report.step_length_m);
  put("pulse_time_difference_s", report.pulse_time_difference_s);
  put("pulse_delay_dispersion_s", report.pulse_delay_dispersion_s);
  put("pwv_mps", report.pwv_mps);
  j["warnings"] = report.warnings;
  return j;
}

inline void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutOfRange("cannot open output file: " + path);
  out << j.dump(2) << '\n';
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutOfRange("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vitalwave

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "vitalwave/errors.hpp"
#include "vitalwave/pulse.hpp"
#include "vitalwave/random.hpp"
#include "vitalwave/trace.hpp"

namespace vitalwave {

inline constexpr double kDefaultSampleRateHz = 250.0;

/// One Gaussian bump of a beat; positions and widths are fractions of the
/// beat period.
struct Lobe {
  double center_frac;
  double amplitude;
  double width_frac;
};

/// Beat morphology as a sum of 1-3 Gaussian lobes with designated systolic
/// (and optionally diastolic) lobes.
struct BeatTemplate {
  Site site = Site::unspecified;
  std::vector<Lobe> lobes;
  int systolic_index = 0;
  int diastolic_index = -1;  // -1 when the template has no diastolic lobe
};

inline void validate_template(const BeatTemplate& tpl) {
  if (tpl.lobes.empty() || tpl.lobes.size() > 3) {
    throw InvalidTemplate("a beat template takes 1 to 3 lobes");
  }
  double prev = -1.0;
  for (const Lobe& l : tpl.lobes) {
    if (!(l.center_frac >= 0.0) || !(l.center_frac < 1.0)) {
      throw InvalidTemplate("lobe centers must lie in [0, 1) of the period");
    }
    if (!(l.center_frac > prev)) throw InvalidTemplate("lobe centers must strictly increase");
    if (!(l.amplitude > 0.0)) throw InvalidTemplate("lobe amplitudes must be positive");
    if (!(l.width_frac > 0.0) || !(l.width_frac < 1.0)) {
      throw InvalidTemplate("lobe widths must be positive fractions of the period");
    }
    prev = l.center_frac;
  }
  const int n = static_cast<int>(tpl.lobes.size());
  if (tpl.systolic_index < 0 || tpl.systolic_index >= n) {
    throw InvalidTemplate("systolic lobe index out of range");
  }
  if (tpl.diastolic_index >= 0) {
    if (tpl.diastolic_index >= n) throw InvalidTemplate("diastolic lobe index out of range");
    if (tpl.diastolic_index <= tpl.systolic_index) {
      throw InvalidTemplate("the systolic lobe must precede the diastolic lobe");
    }
  }
}

inline BeatTemplate default_wrist_template() {
  return BeatTemplate{Site::wrist, {{0.25, 1.0, 0.08}, {0.55, 0.45, 0.12}}, 0, 1};
}

inline BeatTemplate default_ankle_template() {
  // single dominant lobe plus a weaker late lobe
  return BeatTemplate{Site::ankle, {{0.30, 1.0, 0.09}, {0.62, 0.25, 0.13}}, 0, 1};
}

/// Five of these stand in for the oscillometric-style beats right after cuff
/// release: one tall narrow lobe.
inline BeatTemplate release_burst_template() {
  return BeatTemplate{Site::wrist, {{0.30, 1.5, 0.045}}, 0, -1};
}

namespace detail {

inline double raw_beat_value(const BeatTemplate& tpl, double period_s, double t) {
  double v = 0.0;
  for (const Lobe& l : tpl.lobes) {
    const double d = t - l.center_frac * period_s;
    const double s = l.width_frac * period_s;
    v += l.amplitude * std::exp(-0.5 * (d / s) * (d / s));
  }
  return v;
}

}  // namespace detail

/// Beat sample value at time t in [0, period]; zero outside. The raw lobe sum
/// is pinned to zero at both period edges (chord subtraction) so consecutive
/// beats join continuously and the waveform minimum sits at the beat onset.
inline double beat_value(const BeatTemplate& tpl, double period_s, double t) {
  if (t < 0.0 || t > period_s) return 0.0;
  const double w0 = detail::raw_beat_value(tpl, period_s, 0.0);
  const double w1 = detail::raw_beat_value(tpl, period_s, period_s);
  return detail::raw_beat_value(tpl, period_s, t) - (w0 + (w1 - w0) * t / period_s);
}

/// One beat period of samples.
inline std::vector<double> beat_waveform(const BeatTemplate& tpl, double period_s,
                                         double sample_rate_hz) {
  validate_template(tpl);
  if (!(period_s > 0.0)) throw InvalidTemplate("beat period must be positive");
  if (!(sample_rate_hz > 0.0)) throw NonPositiveRate("sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::max<long long>(1, std::llround(period_s * sample_rate_hz)));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = beat_value(tpl, period_s, static_cast<double>(i) / sample_rate_hz);
  }
  return out;
}

/// Fraction of the period between the beat onset (waveform minimum) and the
/// intersecting-tangents foot. The onset tangent is the least-squares line
/// over the strong-upslope span (slope >= 80% of its maximum) and the
/// baseline tangent is the level of the preceding minimum; the foot is their
/// intersection, evaluated numerically on a unit period.
inline double tangent_foot_frac(const BeatTemplate& tpl) {
  validate_template(tpl);
  const double w0 = detail::raw_beat_value(tpl, 1.0, 0.0);
  const double w1 = detail::raw_beat_value(tpl, 1.0, 1.0);
  const double chord_slope = w1 - w0;
  auto value = [&](double t) {
    return detail::raw_beat_value(tpl, 1.0, t) - (w0 + chord_slope * t);
  };
  auto slope = [&](double t) {
    double d = -chord_slope;
    for (const Lobe& l : tpl.lobes) {
      const double u = t - l.center_frac;
      const double s2 = l.width_frac * l.width_frac;
      d += -l.amplitude * (u / s2) * std::exp(-0.5 * u * u / s2);
    }
    return d;
  };

  const double c_sys = tpl.lobes[static_cast<std::size_t>(tpl.systolic_index)].center_frac;
  const int grid = 4000;
  const double h = c_sys / grid;
  int i_up = 1;
  double d_up = slope(h);
  for (int i = 2; i < grid; ++i) {
    const double d = slope(static_cast<double>(i) * h);
    if (d > d_up) {
      d_up = d;
      i_up = i;
    }
  }
  const double floor = kTangentFitFrac * d_up;
  int ia = i_up, ib = i_up;
  while (ia > 1 && slope(static_cast<double>(ia - 1) * h) >= floor) --ia;
  while (ib < grid - 1 && slope(static_cast<double>(ib + 1) * h) >= floor) ++ib;

  double st = 0.0, sv = 0.0;
  for (int i = ia; i <= ib; ++i) {
    st += static_cast<double>(i) * h;
    sv += value(static_cast<double>(i) * h);
  }
  const double count = static_cast<double>(ib - ia + 1);
  const double mt = st / count, mv = sv / count;
  double stt = 0.0, stv = 0.0;
  for (int i = ia; i <= ib; ++i) {
    const double dt = static_cast<double>(i) * h - mt;
    stt += dt * dt;
    stv += dt * (value(static_cast<double>(i) * h) - mv);
  }
  const double fit_slope = stv / stt;

  double vmin = 0.0;
  for (int i = 0; i <= ib; ++i) vmin = std::min(vmin, value(static_cast<double>(i) * h));
  const double foot = mt - (mv - vmin) / fit_slope;
  return std::clamp(foot, 0.0, mt);
}

struct OcclusionPhase {
  double inflate_start_s;
  double full_occlusion_s;
  double release_s;
  /// Fraction of the inflation ramp after which the diastolic lobe is gone.
  double suppress_frac = 0.6;
};

struct ScenarioConfig {
  double duration_s = 60.0;
  double heart_rate_bpm = 60.0;
  double ibi_sd_s = 0.0;
  double respiration_rate_hz = 0.0;
  double respiration_depth = 0.0;
  double cadence_hz = 0.0;  // 0 = stationary
  double cadence_depth = 0.0;
  std::vector<std::array<double, 2>> breath_holds;
  std::optional<OcclusionPhase> occlusion;
  double inter_site_delay_s = 0.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  bool has_seed = true;
  double sample_rate_hz = kDefaultSampleRateHz;
  /// Pulse leakage into the chest channel; the default chest trace carries
  /// respiration and gait only.
  double chest_pulse_depth = 0.0;
};

inline void validate_config(const ScenarioConfig& cfg) {
  if (!(cfg.duration_s > 0.0)) throw InvalidConfig("duration must be positive");
  if (!(cfg.heart_rate_bpm > 0.0)) throw InvalidConfig("heart rate must be positive");
  const double mean_ibi = 60.0 / cfg.heart_rate_bpm;
  if (mean_ibi < kMinIbiSeconds || mean_ibi > kMaxIbiSeconds) {
    throw InvalidConfig("mean inter-beat interval must lie in [0.3 s, 2.0 s]");
  }
  if (!(cfg.ibi_sd_s >= 0.0)) throw InvalidConfig("ibi_sd must be >= 0");
  if (!(cfg.respiration_rate_hz >= 0.0)) throw InvalidConfig("respiration rate must be >= 0");
  if (!(cfg.respiration_depth >= 0.0) || !(cfg.cadence_depth >= 0.0) ||
      !(cfg.chest_pulse_depth >= 0.0)) {
    throw InvalidConfig("depths must be >= 0");
  }
  if (!(cfg.cadence_hz >= 0.0)) throw InvalidConfig("cadence must be >= 0");
  if (!(cfg.noise_sd >= 0.0)) throw InvalidConfig("noise_sd must be >= 0");
  if (!(cfg.sample_rate_hz > 0.0)) throw InvalidConfig("sample rate must be positive");
  for (const auto& w : cfg.breath_holds) {
    if (!(w[0] < w[1]) || w[0] < 0.0 || w[1] > cfg.duration_s) {
      throw InvalidWindow("breath-hold windows must satisfy 0 <= t0 < t1 <= duration");
    }
  }
  if (cfg.occlusion) {
    const OcclusionPhase& o = *cfg.occlusion;
    if (!(o.inflate_start_s >= 0.0) || !(o.inflate_start_s < o.full_occlusion_s) ||
        !(o.full_occlusion_s < o.release_s) || !(o.release_s < cfg.duration_s)) {
      throw InvalidWindow("occlusion phases must satisfy inflate < full < release < duration");
    }
    if (!(o.suppress_frac >= 0.0) || !(o.suppress_frac <= 1.0)) {
      throw InvalidWindow("occlusion suppress_frac must lie in [0, 1]");
    }
  }
}

enum class Polarity { decreasing, increasing };

/// Perturbation-to-intensity map of the sensor. The designed operating regime
/// is monotonic; the non-monotonic mode reflects the perturbation about
/// fold_point (tent map) before applying the gain.
struct SensorTransfer {
  double baseline = 1.0;
  double gain = 1.0;
  Polarity polarity = Polarity::decreasing;
  bool monotonic = true;
  double fold_point = 1.0;
};

inline void validate_transfer(const SensorTransfer& t) {
  if (!(t.baseline > 0.0)) throw InvalidConfig("transfer baseline must be positive");
  if (!(t.gain > 0.0)) throw InvalidConfig("transfer gain must be positive");
}

/// Simulator-emitted labels; the oracle for every analysis module.
struct GroundTruth {
  std::vector<Site> channel_sites;
  /// Intersecting-tangents foot times per channel (what detectors estimate).
  std::vector<std::vector<double>> beat_foot_times;
  /// Waveform-minimum onset per beat, backing each foot time.
  std::vector<std::vector<double>> beat_onset_times;
  double respiration_rate_hz = 0.0;
  double cadence_hz = 0.0;
  double inter_site_delay_s = 0.0;
  std::optional<OcclusionPhase> occlusion;
  /// Derived occlusion windows (empty when no occlusion is configured).
  std::optional<std::array<double, 2>> diastolic_suppressed_window;
  std::optional<std::array<double, 2>> release_burst_window;

  const std::vector<double>* feet_for(Site s) const {
    for (std::size_t i = 0; i < channel_sites.size(); ++i) {
      if (channel_sites[i] == s) return &beat_foot_times[i];
    }
    return nullptr;
  }
};

namespace detail {

inline double truncated_gaussian_ibi(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return std::clamp(mean, kMinIbiSeconds, kMaxIbiSeconds);
  for (int tries = 0; tries < 10000; ++tries) {
    const double v = rng.gaussian(mean, sd);
    if (v >= kMinIbiSeconds && v <= kMaxIbiSeconds) return v;
  }
  return std::clamp(mean, kMinIbiSeconds, kMaxIbiSeconds);
}

/// Draw the foot-time grid: cumulative sums of truncated-Gaussian intervals,
/// keeping feet whose full beat support fits inside the duration.
inline std::vector<double> draw_foot_times(Rng& rng, const ScenarioConfig& cfg,
                                           double foot_frac) {
  const double nominal = 60.0 / cfg.heart_rate_bpm;
  const double tail = (1.0 - foot_frac) * nominal;
  std::vector<double> feet;
  double t = 0.0;
  while (true) {
    t += truncated_gaussian_ibi(rng, nominal, cfg.ibi_sd_s);
    if (t > cfg.duration_s - tail) break;
    if (t - foot_frac * nominal < 0.0) continue;  // clipped lead-in beat
    feet.push_back(t);
  }
  return feet;
}

struct ScheduledBeat {
  double onset_s;
  const BeatTemplate* tpl;
};

/// Sum scheduled beats onto the sample grid. Every beat is rendered with the
/// nominal period so its shape (and tangent foot offset) is identical across
/// beats; short intervals overlap-add and long intervals leave flat gaps.
inline void render_beats(std::vector<double>& x, double fs, double nominal_period,
                         const std::vector<ScheduledBeat>& beats) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  for (const ScheduledBeat& b : beats) {
    auto i0 = static_cast<std::ptrdiff_t>(std::ceil(b.onset_s * fs - 1e-9));
    auto i1 = static_cast<std::ptrdiff_t>(std::floor((b.onset_s + nominal_period) * fs + 1e-9));
    i0 = std::max<std::ptrdiff_t>(i0, 0);
    i1 = std::min(i1, n - 1);
    for (std::ptrdiff_t i = i0; i <= i1; ++i) {
      x[static_cast<std::size_t>(i)] +=
          beat_value(*b.tpl, nominal_period, static_cast<double>(i) / fs - b.onset_s);
    }
  }
}

}  // namespace detail

/// Single-channel pulse perturbation train with ground truth.
inline std::pair<Trace, GroundTruth> pulse_train(const ScenarioConfig& cfg,
                                                 const BeatTemplate& tpl) {
  validate_config(cfg);
  validate_template(tpl);
  const double fs = cfg.sample_rate_hz;
  const double nominal = 60.0 / cfg.heart_rate_bpm;
  const double foot_frac = tangent_foot_frac(tpl);

  Rng rng = Rng(cfg.seed).fork(0);
  const std::vector<double> feet = detail::draw_foot_times(rng, cfg, foot_frac);

  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * fs));
  std::vector<double> x(n, 0.0);
  std::vector<detail::ScheduledBeat> beats;
  std::vector<double> onsets;
  beats.reserve(feet.size());
  onsets.reserve(feet.size());
  for (double f : feet) {
    const double onset = f - foot_frac * nominal;
    beats.push_back({onset, &tpl});
    onsets.push_back(onset);
  }
  detail::render_beats(x, fs, nominal, beats);

  GroundTruth truth;
  truth.channel_sites = {tpl.site};
  truth.beat_foot_times = {feet};
  truth.beat_onset_times = {onsets};
  truth.inter_site_delay_s = 0.0;
  return {Trace(fs, 0.0, std::move(x), tpl.site), truth};
}

/// Breathing sinusoid with raised-cosine on/off ramps around hold windows.
/// The envelope is exactly zero throughout each hold; the 1 s ramps sit just
/// outside the window.
inline std::vector<double> respiration_wave(double rate_hz, double depth, double duration_s,
                                            const std::vector<std::array<double, 2>>& holds,
                                            double sample_rate_hz) {
  if (!(rate_hz >= 0.0)) throw InvalidWindow("respiration rate must be >= 0");
  for (const auto& w : holds) {
    if (!(w[0] < w[1]) || w[0] < 0.0 || w[1] > duration_s) {
      throw InvalidWindow("hold windows must satisfy 0 <= t0 < t1 <= duration");
    }
  }
  const double ramp = 1.0;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    double env = 1.0;
    for (const auto& w : holds) {
      double e;
      if (t < w[0] - ramp || t > w[1] + ramp) {
        e = 1.0;
      } else if (t < w[0]) {
        e = 0.5 * (1.0 + std::cos(std::numbers::pi * (t - (w[0] - ramp)) / ramp));
      } else if (t <= w[1]) {
        e = 0.0;
      } else {
        e = 0.5 * (1.0 - std::cos(std::numbers::pi * (t - w[1]) / ramp));
      }
      env = std::min(env, e);
    }
    out[i] = depth * env * std::sin(2.0 * std::numbers::pi * rate_hz * t);
  }
  return out;
}

/// Step-frequency sinusoid; all zeros when stationary.
inline std::vector<double> gait_wave(double cadence_hz, double depth, double duration_s,
                                     double sample_rate_hz) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<double> out(n, 0.0);
  if (cadence_hz <= 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    out[i] = depth * std::sin(2.0 * std::numbers::pi * cadence_hz * t);
  }
  return out;
}

struct OcclusionSample {
  double amplitude_scale;
  bool diastolic_suppressed;
  bool release_burst;
};

/// Per-sample cuff state: amplitude ramps 1 -> 0 over the inflation span,
/// stays 0 until release, then recovers while the first five beats take the
/// oscillometric burst shape. The diastolic lobe disappears while the
/// systolic one is still visible, partway up the inflation ramp.
inline std::vector<OcclusionSample> occlusion_envelope(const OcclusionPhase& phase,
                                                       double nominal_ibi_s,
                                                       double duration_s,
                                                       double sample_rate_hz) {
  if (!(phase.inflate_start_s >= 0.0) || !(phase.inflate_start_s < phase.full_occlusion_s) ||
      !(phase.full_occlusion_s < phase.release_s) || !(phase.release_s < duration_s)) {
    throw InvalidWindow("occlusion phases must satisfy inflate < full < release < duration");
  }
  if (!(nominal_ibi_s > 0.0)) throw InvalidWindow("nominal inter-beat interval must be positive");
  const double suppress_from =
      phase.inflate_start_s + phase.suppress_frac * (phase.full_occlusion_s - phase.inflate_start_s);
  const double burst_end = phase.release_s + 5.0 * nominal_ibi_s;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  std::vector<OcclusionSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    OcclusionSample s{1.0, false, false};
    if (t >= phase.inflate_start_s && t < phase.full_occlusion_s) {
      s.amplitude_scale = 1.0 - (t - phase.inflate_start_s) /
                                    (phase.full_occlusion_s - phase.inflate_start_s);
    } else if (t >= phase.full_occlusion_s && t < phase.release_s) {
      s.amplitude_scale = 0.0;
    }
    s.diastolic_suppressed = (t >= suppress_from && t < phase.release_s);
    s.release_burst = (t >= phase.release_s && t < burst_end);
    out[i] = s;
  }
  return out;
}

/// Map a perturbation trace through the sensor transfer and add measurement
/// noise. Deterministic for a given seed.
inline Trace apply_sensor_transfer(const Trace& perturbation, const SensorTransfer& transfer,
                                   double noise_sd, std::uint64_t seed) {
  validate_transfer(transfer);
  const double sign = transfer.polarity == Polarity::decreasing ? -1.0 : 1.0;
  Rng rng(seed);
  std::vector<double> out(perturbation.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double p = perturbation.samples()[i];
    if (!transfer.monotonic) p = transfer.fold_point - std::abs(p - transfer.fold_point);
    double v = transfer.baseline + sign * transfer.gain * p;
    if (noise_sd > 0.0) v += noise_sd * rng.gaussian();
    out[i] = v;
  }
  return perturbation.with_samples(std::move(out));
}

struct ScenarioTemplates {
  BeatTemplate wrist = default_wrist_template();
  BeatTemplate ankle = default_ankle_template();
  BeatTemplate burst = release_burst_template();
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return seed ^ (0xD1B54A32D192ED03ULL * (tag + 1));
}

/// Full three-channel scenario: chest (respiration + gait), wrist and ankle
/// pulse trains sharing one beat schedule, the ankle shifted by the inter-site
/// delay, each passed through the sensor transfer. The cuff occlusion, when
/// configured, acts on the wrist channel.
inline std::pair<Recording, GroundTruth> simulate_scenario(const ScenarioConfig& cfg,
                                                           const ScenarioTemplates& templates,
                                                           const SensorTransfer& transfer) {
  validate_config(cfg);
  validate_template(templates.wrist);
  validate_template(templates.ankle);
  validate_template(templates.burst);
  validate_transfer(transfer);

  const double fs = cfg.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * fs));
  const double nominal = 60.0 / cfg.heart_rate_bpm;
  const double frac_wrist = tangent_foot_frac(templates.wrist);
  const double frac_ankle = tangent_foot_frac(templates.ankle);
  const double frac_burst = tangent_foot_frac(templates.burst);

  Rng schedule_rng = Rng(cfg.seed).fork(0);
  ScenarioConfig sched_cfg = cfg;
  const std::vector<double> feet = detail::draw_foot_times(schedule_rng, sched_cfg, frac_wrist);

  std::vector<OcclusionSample> occl;
  if (cfg.occlusion) occl = occlusion_envelope(*cfg.occlusion, nominal, cfg.duration_s, fs);
  auto occl_at = [&](double t) -> OcclusionSample {
    if (occl.empty()) return {1.0, false, false};
    const auto i = static_cast<std::size_t>(
        std::clamp<double>(std::floor(t * fs), 0.0, static_cast<double>(occl.size() - 1)));
    return occl[i];
  };

  // Wrist: beats keep their scheduled tangent-foot times; beats inside the
  // suppression window lose the diastolic lobe, burst beats swap templates.
  BeatTemplate wrist_suppressed = templates.wrist;
  wrist_suppressed.diastolic_index = -1;
  if (templates.wrist.diastolic_index >= 0) {
    wrist_suppressed.lobes.erase(wrist_suppressed.lobes.begin() + templates.wrist.diastolic_index);
  }
  std::vector<detail::ScheduledBeat> wrist_beats;
  std::vector<double> wrist_onsets;
  for (double f : feet) {
    const OcclusionSample flags = occl_at(f);
    const BeatTemplate* tpl = &templates.wrist;
    double frac = frac_wrist;
    if (flags.release_burst) {
      tpl = &templates.burst;
      frac = frac_burst;
    } else if (flags.diastolic_suppressed) {
      tpl = &wrist_suppressed;
    }
    wrist_beats.push_back({f - frac * nominal, tpl});
    wrist_onsets.push_back(f - frac * nominal);
  }
  std::vector<double> wrist_wave(n, 0.0);
  detail::render_beats(wrist_wave, fs, nominal, wrist_beats);
  if (!occl.empty()) {
    for (std::size_t i = 0; i < n; ++i) wrist_wave[i] *= occl[i].amplitude_scale;
  }

  // Ankle: same schedule shifted by the inter-site delay, ankle morphology.
  std::vector<detail::ScheduledBeat> ankle_beats;
  std::vector<double> ankle_feet;
  std::vector<double> ankle_onsets;
  for (double f : feet) {
    const double foot = f + cfg.inter_site_delay_s;
    const double onset = foot - frac_ankle * nominal;
    if (onset < 0.0 || onset + nominal > cfg.duration_s) continue;
    ankle_beats.push_back({onset, &templates.ankle});
    ankle_feet.push_back(foot);
    ankle_onsets.push_back(onset);
  }
  std::vector<double> ankle_wave(n, 0.0);
  detail::render_beats(ankle_wave, fs, nominal, ankle_beats);

  // Chest: respiration + gait, plus optional pulse leakage.
  std::vector<double> chest_wave = respiration_wave(cfg.respiration_rate_hz,
                                                    cfg.respiration_depth, cfg.duration_s,
                                                    cfg.breath_holds, fs);
  const std::vector<double> gait = gait_wave(cfg.cadence_hz, cfg.cadence_depth, cfg.duration_s, fs);
  for (std::size_t i = 0; i < n; ++i) chest_wave[i] += gait[i];
  if (cfg.chest_pulse_depth > 0.0) {
    std::vector<double> leak(n, 0.0);
    std::vector<detail::ScheduledBeat> leak_beats;
    for (double f : feet) leak_beats.push_back({f - frac_wrist * nominal, &templates.wrist});
    detail::render_beats(leak, fs, nominal, leak_beats);
    for (std::size_t i = 0; i < n; ++i) chest_wave[i] += cfg.chest_pulse_depth * leak[i];
  }

  const Trace chest = apply_sensor_transfer(Trace(fs, 0.0, std::move(chest_wave), Site::chest),
                                            transfer, cfg.noise_sd, derive_seed(cfg.seed, 1));
  const Trace wrist = apply_sensor_transfer(Trace(fs, 0.0, std::move(wrist_wave), Site::wrist),
                                            transfer, cfg.noise_sd, derive_seed(cfg.seed, 2));
  const Trace ankle = apply_sensor_transfer(Trace(fs, 0.0, std::move(ankle_wave), Site::ankle),
                                            transfer, cfg.noise_sd, derive_seed(cfg.seed, 3));

  GroundTruth truth;
  truth.channel_sites = {Site::chest, Site::wrist, Site::ankle};
  truth.beat_foot_times = {cfg.chest_pulse_depth > 0.0 ? feet : std::vector<double>{}, feet,
                           ankle_feet};
  truth.beat_onset_times = {cfg.chest_pulse_depth > 0.0 ? wrist_onsets : std::vector<double>{},
                            wrist_onsets, ankle_onsets};
  truth.respiration_rate_hz = cfg.respiration_depth > 0.0 ? cfg.respiration_rate_hz : 0.0;
  truth.cadence_hz = cfg.cadence_depth > 0.0 ? cfg.cadence_hz : 0.0;
  truth.inter_site_delay_s = cfg.inter_site_delay_s;
  truth.occlusion = cfg.occlusion;
  if (cfg.occlusion) {
    const OcclusionPhase& o = *cfg.occlusion;
    truth.diastolic_suppressed_window = {
        o.inflate_start_s + o.suppress_frac * (o.full_occlusion_s - o.inflate_start_s),
        o.release_s};
    truth.release_burst_window = {o.release_s, o.release_s + 5.0 * nominal};
  }
  return {Recording({chest, wrist, ankle}, "scenario"), truth};
}

}  // namespace vitalwave

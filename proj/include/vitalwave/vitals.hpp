#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vitalwave/dsp.hpp"
#include "vitalwave/errors.hpp"
#include "vitalwave/pulse.hpp"
#include "vitalwave/synth.hpp"
#include "vitalwave/trace.hpp"

namespace vitalwave {

struct IbiResult {
  std::vector<double> intervals_s;
  std::size_t n_dropped = 0;
};

/// Successive foot-time differences; intervals outside [0.3 s, 2.0 s] are
/// dropped and counted.
inline IbiResult interbeat_intervals(const BeatSeries& series) {
  if (series.beats.size() < 2) throw TooFewBeats("at least two beats are required");
  IbiResult out;
  for (std::size_t i = 1; i < series.beats.size(); ++i) {
    const double ibi = series.beats[i].foot_time_s - series.beats[i - 1].foot_time_s;
    if (ibi < kMinIbiSeconds || ibi > kMaxIbiSeconds) {
      ++out.n_dropped;
      continue;
    }
    out.intervals_s.push_back(ibi);
  }
  return out;
}

struct HistogramBin {
  double bin_center_s;
  std::size_t count;
};

struct GaussianFit {
  double mu_s;
  double sigma_s;
};

struct PrvReport {
  std::size_t n_beats;
  double mean_ibi_s;
  double sdnn_s;  // population standard deviation
  std::vector<HistogramBin> histogram;
  GaussianFit gaussian_fit;
  /// True when the recording is too short for the 24 h SDNN norm to apply.
  bool long_term_flag_caveat;
};

/// Moment statistics of the interval series. The Gaussian fit is by method of
/// moments, so gaussian_fit == (mean_ibi, sdnn) bit-exactly. The histogram is
/// centered on the mean with the given bin width.
inline PrvReport prv_stats(std::span<const double> ibis, double bin_width_s = 0.025) {
  if (ibis.size() < 2) throw TooFewIntervals("at least two intervals are required");
  if (!(bin_width_s > 0.0)) throw InvalidWindow("histogram bin width must be positive");

  double sum = 0.0;
  for (double v : ibis) sum += v;
  const double mean = sum / static_cast<double>(ibis.size());
  double ss = 0.0;
  for (double v : ibis) {
    const double d = v - mean;
    ss += d * d;
  }
  const double sdnn = std::sqrt(ss / static_cast<double>(ibis.size()));

  std::map<long long, std::size_t> bins;
  for (double v : ibis) {
    const auto k = static_cast<long long>(std::lround((v - mean) / bin_width_s));
    ++bins[k];
  }
  PrvReport report;
  report.n_beats = ibis.size() + 1;
  report.mean_ibi_s = mean;
  report.sdnn_s = sdnn;
  for (long long k = bins.begin()->first; k <= bins.rbegin()->first; ++k) {
    const auto it = bins.find(k);
    report.histogram.push_back(
        {mean + static_cast<double>(k) * bin_width_s, it == bins.end() ? 0 : it->second});
  }
  report.gaussian_fit = GaussianFit{mean, sdnn};
  report.long_term_flag_caveat = sum < 24.0 * 3600.0;
  return report;
}

inline double heart_rate_bpm(std::span<const double> ibis) {
  if (ibis.empty()) throw EmptyInput("heart rate needs at least one interval");
  double sum = 0.0;
  for (double v : ibis) sum += v;
  return 60.0 / (sum / static_cast<double>(ibis.size()));
}

/// Pulse wave velocity from the inter-site delay and the arterial path-length
/// difference (a user-supplied anatomical measurement, never computed here).
inline double pwv_mps(double delta_t_s, double path_difference_m) {
  if (!(delta_t_s > 0.0)) throw NonPositiveDelay("pulse time difference must be positive");
  if (!(path_difference_m > 0.0)) throw NonPositiveDistance("path difference must be positive");
  return path_difference_m / delta_t_s;
}

struct BandPeak {
  double frequency_hz;
  double power;
  double confidence;
};

namespace detail {

/// Strongest interpolated spectral peak inside [f_lo, f_hi], accepted only
/// when it clears 3x the median in-band power.
inline std::optional<BandPeak> band_peak(const Spectrum& spectrum, double f_lo, double f_hi) {
  std::vector<double> in_band;
  for (std::size_t k = 1; k < spectrum.power.size(); ++k) {
    const double f = spectrum.frequency_at(k);
    if (f >= f_lo && f <= f_hi) in_band.push_back(spectrum.power[k]);
  }
  if (in_band.size() < 3) return std::nullopt;

  const std::vector<SpectralPeak> peaks =
      spectral_peaks(spectrum, spectrum.power.size(), spectrum.df_hz, 0.0);
  const SpectralPeak* best = nullptr;
  for (const SpectralPeak& p : peaks) {
    if (p.frequency_hz >= f_lo && p.frequency_hz <= f_hi) {
      best = &p;
      break;  // peaks are sorted by descending power
    }
  }
  if (best == nullptr) return std::nullopt;

  std::sort(in_band.begin(), in_band.end());
  const double med = in_band[in_band.size() / 2];
  if (best->power < 3.0 * med) return std::nullopt;
  const double ratio = med > 0.0 ? best->power / (3.0 * med) : std::numeric_limits<double>::infinity();
  const double confidence = std::isfinite(ratio) ? ratio / (1.0 + ratio) : 1.0;
  return BandPeak{best->frequency_hz, best->power, confidence};
}

}  // namespace detail

struct SpectralBands {
  double respiration_lo_hz = 0.08;
  double respiration_hi_hz = 0.7;
  double cadence_lo_hz = 1.2;
  double cadence_hi_hz = 4.0;
  double segment_seconds = 30.0;
  double overlap_frac = 0.5;
};

struct RespirationEstimate {
  double rate_per_min;
  double confidence;
};

/// Respiration rate from the chest channel, or nothing when no in-band peak
/// stands out (breath hold, detached sensor). Traces shorter than 15 s are
/// rejected so short breath-hold windows can still be classified.
inline std::optional<RespirationEstimate> respiration_rate(const Trace& chest,
                                                           const SpectralBands& bands = {}) {
  if (chest.duration() < 15.0) {
    throw TraceTooShort("respiration estimation needs at least 15 s of signal");
  }
  const double seg = std::min(bands.segment_seconds, chest.duration());
  const Spectrum spec = power_spectrum(detrend(chest), seg, bands.overlap_frac);
  const auto peak = detail::band_peak(spec, bands.respiration_lo_hz, bands.respiration_hi_hz);
  if (!peak) return std::nullopt;
  return RespirationEstimate{60.0 * peak->frequency_hz, peak->confidence};
}

struct CadenceEstimate {
  double cadence_hz;
  double step_length_m;
};

/// Step frequency from the chest channel plus step length from the treadmill
/// speed.
inline CadenceEstimate cadence_step_length(const Trace& chest, double speed_mps,
                                           const SpectralBands& bands = {}) {
  if (!(speed_mps > 0.0)) throw NonPositiveSpeed("speed must be positive");
  if (chest.duration() < 30.0) {
    throw TraceTooShort("cadence estimation needs at least 30 s of signal");
  }
  const double seg = std::min(bands.segment_seconds, chest.duration());
  const Spectrum spec = power_spectrum(detrend(chest), seg, bands.overlap_frac);
  const auto peak = detail::band_peak(spec, bands.cadence_lo_hz, bands.cadence_hi_hz);
  if (!peak) throw NoCadencePeak("no cadence peak in the gait band");
  return CadenceEstimate{peak->frequency_hz, speed_mps / peak->frequency_hz};
}

/// Aggregated clinical-style quantities. Optional fields are present exactly
/// when their inputs were derivable.
struct VitalsReport {
  std::optional<double> heart_rate_bpm;
  std::optional<PrvReport> prv;
  std::optional<double> respiration_rate_per_min;
  std::optional<double> respiration_confidence;
  std::optional<double> cadence_hz;
  std::optional<double> step_length_m;
  std::optional<double> pulse_time_difference_s;
  std::optional<double> pulse_delay_dispersion_s;
  std::optional<double> pwv_mps;
  std::vector<std::string> warnings;
};

/// Fill every derivable field, omit the rest, and record why. The primary
/// pulse series is normally the wrist; analysis still produces a report when
/// only a chest trace is on hand.
inline VitalsReport build_report(const std::optional<BeatSeries>& wrist,
                                 const std::optional<BeatSeries>& ankle,
                                 const std::optional<Trace>& chest,
                                 std::optional<double> path_difference_m,
                                 std::optional<double> speed_mps,
                                 const SpectralBands& bands = {}) {
  VitalsReport report;

  if (wrist) {
    try {
      const IbiResult ibis = interbeat_intervals(*wrist);
      if (ibis.n_dropped > 0) {
        report.warnings.push_back(std::to_string(ibis.n_dropped) +
                                  " inter-beat interval(s) outside [0.3 s, 2.0 s] dropped");
      }
      if (!ibis.intervals_s.empty()) {
        report.heart_rate_bpm = heart_rate_bpm(ibis.intervals_s);
      }
      if (ibis.intervals_s.size() >= 2) {
        report.prv = prv_stats(ibis.intervals_s);
        if (report.prv->sdnn_s < 0.05 && report.prv->long_term_flag_caveat) {
          report.warnings.push_back(
              "sdnn below the 50 ms long-term norm; recording is far shorter than the 24 h "
              "interval that norm applies to");
        }
      } else {
        report.warnings.push_back("too few intervals for pulse-rate-variability statistics");
      }
    } catch (const TooFewBeats&) {
      report.warnings.push_back("too few beats for interval statistics");
    }
  }

  if (chest) {
    try {
      if (const auto resp = respiration_rate(*chest, bands)) {
        report.respiration_rate_per_min = resp->rate_per_min;
        report.respiration_confidence = resp->confidence;
      } else {
        report.warnings.push_back("no respiration peak detected (breath hold or weak signal)");
      }
    } catch (const TraceTooShort&) {
      report.warnings.push_back("chest trace too short for respiration estimation");
    }
    if (speed_mps) {
      try {
        const CadenceEstimate c = cadence_step_length(*chest, *speed_mps, bands);
        report.cadence_hz = c.cadence_hz;
        report.step_length_m = c.step_length_m;
      } catch (const NoCadencePeak&) {
        report.warnings.push_back("no cadence peak detected; step length omitted");
      } catch (const TraceTooShort&) {
        report.warnings.push_back("chest trace too short for cadence estimation");
      }
    }
  } else if (speed_mps) {
    report.warnings.push_back("speed given without a chest channel; cadence omitted");
  }

  if (wrist && ankle) {
    try {
      const PulseDelay delay = pulse_time_difference(*wrist, *ankle);
      report.pulse_time_difference_s = delay.delta_t_s;
      report.pulse_delay_dispersion_s = delay.dispersion_s;
      if (path_difference_m) {
        try {
          report.pwv_mps = pwv_mps(delay.delta_t_s, *path_difference_m);
        } catch (const Error&) {
          report.warnings.push_back("pulse time difference not positive; pwv omitted");
        }
      } else {
        report.warnings.push_back("path difference not given; pwv omitted");
      }
    } catch (const NoMatchedPairs&) {
      report.warnings.push_back("no matched beat pairs between pulse channels");
    }
  } else if (path_difference_m) {
    report.warnings.push_back("path difference given without two pulse channels; pwv omitted");
  }

  return report;
}

}  // namespace vitalwave

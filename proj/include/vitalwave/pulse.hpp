#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "vitalwave/errors.hpp"
#include "vitalwave/trace.hpp"

namespace vitalwave {

enum class PolarityFlag { as_is, inverted };

/// Inter-beat intervals are physiologically gated to this span everywhere
/// (generation and analysis agree on the same bounds).
inline constexpr double kMinIbiSeconds = 0.3;
inline constexpr double kMaxIbiSeconds = 2.0;

/// The onset tangent is fit over the contiguous span where the upstroke slope
/// stays above this fraction of its maximum. The simulator derives its
/// ground-truth foot times from the same construction.
inline constexpr double kTangentFitFrac = 0.8;

/// Beat candidate gating; stated explicitly so detection is deterministic.
struct DetectorParams {
  double threshold_frac = 0.4;    // of the rolling amplitude envelope
  double refractory_s = 0.3;
  double envelope_window_s = 5.0;
  double slope_gate_frac = 0.35;  // of the rolling upslope envelope
  double min_slope_frac = 0.05;   // of the global upslope maximum; noise floor
  double smooth_s = 0.044;        // local-fit span for value/slope estimates
};

/// Landmark points of one beat. Ordering is validated on construction of the
/// series: foot < systolic, and systolic < notch <= diastolic when present.
struct BeatAnnotation {
  double foot_time_s;
  double systolic_time_s;
  double systolic_amp;
  std::optional<double> notch_time_s;
  std::optional<double> diastolic_time_s;
  std::optional<double> diastolic_amp;
};

inline void validate_annotation(const BeatAnnotation& b) {
  if (!(b.foot_time_s < b.systolic_time_s)) {
    throw InvalidConfig("beat annotation requires foot_time < systolic_time");
  }
  if (!std::isfinite(b.systolic_amp)) throw InvalidConfig("systolic amplitude must be finite");
  if (b.notch_time_s) {
    if (!(b.systolic_time_s < *b.notch_time_s)) {
      throw InvalidConfig("beat annotation requires systolic_time < notch_time");
    }
    if (b.diastolic_time_s && !(*b.notch_time_s <= *b.diastolic_time_s)) {
      throw InvalidConfig("beat annotation requires notch_time <= diastolic_time");
    }
  }
  if (b.diastolic_amp && !std::isfinite(*b.diastolic_amp)) {
    throw InvalidConfig("diastolic amplitude must be finite");
  }
}

struct BeatSeries {
  std::vector<BeatAnnotation> beats;
  Site source_site = Site::unspecified;
  PolarityFlag polarity_used = PolarityFlag::as_is;

  std::vector<double> foot_times() const {
    std::vector<double> out;
    out.reserve(beats.size());
    for (const BeatAnnotation& b : beats) out.push_back(b.foot_time_s);
    return out;
  }
};

/// Orient the trace so beats are upward deflections. Transmission-type
/// sensors often render pulses as dips; the decision is the sign of the
/// sample skewness, with symmetric inputs left as-is.
inline std::pair<Trace, PolarityFlag> normalize_polarity(const Trace& trace) {
  const std::vector<double>& x = trace.samples();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(x.size());
  m3 /= static_cast<double>(x.size());
  const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  if (skew < -1e-9) {
    std::vector<double> flipped(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) flipped[i] = -x[i];
    return {trace.with_samples(std::move(flipped)), PolarityFlag::inverted};
  }
  return {trace, PolarityFlag::as_is};
}

namespace detail {

/// Centered moving average with truncated edge windows.
inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t half) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + x[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= half ? i - half : 0;
    const std::size_t b = std::min(n - 1, i + half);
    out[i] = (cum[b + 1] - cum[a]) / static_cast<double>(b - a + 1);
  }
  return out;
}

/// Local least-squares slope (first-order Savitzky-Golay) in units per second.
inline std::vector<double> local_slope(const std::vector<double>& x, std::size_t half,
                                       double fs) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= half ? i - half : 0;
    const std::size_t b = std::min(n - 1, i + half);
    const double count = static_cast<double>(b - a + 1);
    if (count < 2) continue;
    double sj = 0.0, sx = 0.0;
    for (std::size_t j = a; j <= b; ++j) {
      sj += static_cast<double>(j);
      sx += x[j];
    }
    const double mj = sj / count, mx = sx / count;
    double sjj = 0.0, sjx = 0.0;
    for (std::size_t j = a; j <= b; ++j) {
      const double dj = static_cast<double>(j) - mj;
      sjj += dj * dj;
      sjx += dj * (x[j] - mx);
    }
    if (sjj > 0.0) out[i] = sjx / sjj * fs;
  }
  return out;
}

/// Centered rolling maximum via monotonic deque.
inline std::vector<double> rolling_max(const std::vector<double>& x, std::size_t half) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  std::deque<std::size_t> dq;
  std::size_t pushed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n - 1, i + half);
    while (pushed <= hi) {
      while (!dq.empty() && x[dq.back()] <= x[pushed]) dq.pop_back();
      dq.push_back(pushed++);
    }
    const std::size_t lo = i >= half ? i - half : 0;
    while (dq.front() < lo) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

/// Parabolic vertex refinement around index k; returns {offset in samples,
/// value at the vertex}. Falls back to the grid point on degenerate input.
inline std::pair<double, double> refine_extremum(const std::vector<double>& x, std::size_t k) {
  if (k == 0 || k + 1 >= x.size()) return {0.0, x[k]};
  const double pm = x[k - 1], p0 = x[k], pp = x[k + 1];
  const double denom = pm + pp - 2.0 * p0;
  if (denom == 0.0) return {0.0, p0};
  const double d = std::clamp((pm - pp) / (2.0 * denom), -0.5, 0.5);
  const double a = 0.5 * (pm + pp) - p0;
  const double b = 0.5 * (pp - pm);
  return {d, p0 + b * d + a * d * d};
}

inline double interp_at(const std::vector<double>& x, double pos) {
  if (pos <= 0.0) return x.front();
  if (pos >= static_cast<double>(x.size() - 1)) return x.back();
  const auto k = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(k);
  return x[k] + f * (x[k + 1] - x[k]);
}

}  // namespace detail

/// One foot time per beat on a band-passed, polarity-normalized trace.
///
/// Candidates are upward crossings of an adaptive threshold (40% of the
/// rolling 5 s amplitude envelope) with a 0.3 s refractory period; crossings
/// whose upstroke is much weaker than the rolling upslope envelope (diastolic
/// waves, noise bumps) are rejected. Each accepted beat's foot is the
/// intersection of the tangent at maximum upslope with the level of the
/// preceding valley, both parabolic-refined off the sample grid.
inline std::vector<double> detect_feet(const Trace& trace,
                                       const DetectorParams& params = {}) {
  const double fs = trace.sample_rate();
  const std::vector<double>& raw = trace.samples();
  const std::size_t n = raw.size();

  double mean = 0.0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = raw[i] - mean;

  const auto half = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.5 * params.smooth_s * fs)));
  const std::vector<double> s = detail::moving_average(x, half);
  const std::vector<double> slope = detail::local_slope(x, half, fs);
  const auto env_half = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.5 * params.envelope_window_s * fs)));
  const std::vector<double> env = detail::rolling_max(s, env_half);
  const std::vector<double> slope_env = detail::rolling_max(slope, env_half);
  double global_slope_max = 0.0;
  for (double v : slope) global_slope_max = std::max(global_slope_max, v);

  const auto refractory = static_cast<std::ptrdiff_t>(std::lround(params.refractory_s * fs));
  const auto peak_span = static_cast<std::ptrdiff_t>(std::lround(0.25 * fs));
  const auto valley_span = static_cast<std::ptrdiff_t>(std::lround(0.45 * fs));

  std::vector<double> feet;
  std::ptrdiff_t last_accept = -refractory - 1;
  std::ptrdiff_t last_peak = 0;
  double last_foot_idx = -1.0;

  for (std::size_t i = 1; i < n; ++i) {
    const double thr = params.threshold_frac * env[i];
    const double thr_prev = params.threshold_frac * env[i - 1];
    if (!(s[i] > thr && s[i - 1] <= thr_prev)) continue;
    const auto c = static_cast<std::ptrdiff_t>(i);
    if (c - last_accept < refractory) continue;

    // systolic peak: maximum shortly after the crossing
    const std::ptrdiff_t pe = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, c + peak_span);
    std::ptrdiff_t p = c;
    for (std::ptrdiff_t j = c; j <= pe; ++j) {
      if (s[static_cast<std::size_t>(j)] > s[static_cast<std::size_t>(p)]) p = j;
    }
    // preceding valley
    const std::ptrdiff_t va = std::max<std::ptrdiff_t>({0, c - valley_span, last_peak});
    std::ptrdiff_t v = c;
    for (std::ptrdiff_t j = va; j <= c; ++j) {
      if (s[static_cast<std::size_t>(j)] < s[static_cast<std::size_t>(v)]) v = j;
    }
    // maximum upslope between valley and peak
    std::ptrdiff_t u = v;
    for (std::ptrdiff_t j = v; j <= p; ++j) {
      if (slope[static_cast<std::size_t>(j)] > slope[static_cast<std::size_t>(u)]) u = j;
    }
    const double u_slope = slope[static_cast<std::size_t>(u)];
    if (u_slope < params.slope_gate_frac * slope_env[static_cast<std::size_t>(u)] ||
        u_slope < params.min_slope_frac * global_slope_max) {
      continue;  // not a systolic upstroke
    }

    // Baseline level: mean of the smoothed signal around the valley; the
    // pre-beat region is flat, so averaging beats a single-point minimum.
    double valley_value = 0.0;
    {
      const std::ptrdiff_t wa = std::max<std::ptrdiff_t>(va, v - static_cast<std::ptrdiff_t>(half));
      const std::ptrdiff_t wb = std::min<std::ptrdiff_t>(c, v + static_cast<std::ptrdiff_t>(half));
      for (std::ptrdiff_t j = wa; j <= wb; ++j) valley_value += s[static_cast<std::size_t>(j)];
      valley_value /= static_cast<double>(wb - wa + 1);
    }

    // Tangent by least squares over the strong-upslope span around u; far
    // steadier under noise than a single-point slope estimate.
    const double slope_floor = kTangentFitFrac * slope[static_cast<std::size_t>(u)];
    std::ptrdiff_t ua = u, ub = u;
    while (ua > v && slope[static_cast<std::size_t>(ua - 1)] >= slope_floor) --ua;
    while (ub < p && slope[static_cast<std::size_t>(ub + 1)] >= slope_floor) ++ub;
    double sj = 0.0, sx = 0.0;
    for (std::ptrdiff_t j = ua; j <= ub; ++j) {
      sj += static_cast<double>(j);
      sx += s[static_cast<std::size_t>(j)];
    }
    const double count = static_cast<double>(ub - ua + 1);
    const double mj = sj / count, mx = sx / count;
    double sjj = 0.0, sjx = 0.0;
    for (std::ptrdiff_t j = ua; j <= ub; ++j) {
      const double dj = static_cast<double>(j) - mj;
      sjj += dj * dj;
      sjx += dj * (s[static_cast<std::size_t>(j)] - mx);
    }
    const double slope_value = sjj > 0.0 ? sjx / sjj : 0.0;  // per sample
    if (!(slope_value > 0.0)) continue;

    const double foot_idx = mj - (mx - valley_value) / slope_value;
    if (!std::isfinite(foot_idx) || foot_idx <= last_foot_idx) continue;

    feet.push_back(trace.start_time() + foot_idx / fs);
    last_foot_idx = foot_idx;
    last_accept = c;
    last_peak = p;
  }
  if (feet.empty()) throw NoBeatsFound("no beats found in trace");
  return feet;
}

/// Per-beat fiducials from detected feet. The systolic peak is the maximum
/// between the foot and 60% of the inter-beat interval; the dicrotic notch is
/// the most prominent local minimum after it, and the diastolic peak the
/// first local maximum after the notch. Notch/diastolic are reported absent
/// when no local minimum reaches 2% prominence of the systolic amplitude.
inline BeatSeries locate_fiducials(const Trace& trace, const std::vector<double>& foot_times,
                                   PolarityFlag polarity = PolarityFlag::as_is,
                                   const DetectorParams& params = {}) {
  const double fs = trace.sample_rate();
  const std::vector<double>& raw = trace.samples();
  const std::size_t n = raw.size();
  const auto half = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.5 * params.smooth_s * fs)));
  const std::vector<double> s = detail::moving_average(raw, half);

  BeatSeries series;
  series.source_site = trace.site();
  series.polarity_used = polarity;

  const double prominence_frac = 0.02;
  for (std::size_t k = 0; k < foot_times.size(); ++k) {
    const double foot_t = foot_times[k];
    // Rate context: the tighter of the neighboring intervals, capped at the
    // physiological maximum. A long gap to the next detected beat (dropout,
    // occlusion) must not widen the search window.
    double ibi = kMaxIbiSeconds;
    if (k + 1 < foot_times.size()) ibi = std::min(ibi, foot_times[k + 1] - foot_t);
    if (k > 0) ibi = std::min(ibi, foot_t - foot_times[k - 1]);
    if (foot_times.size() == 1) ibi = std::min(1.0, trace.end_time() - foot_t);
    if (!(ibi > 0.0)) continue;

    const double foot_pos = (foot_t - trace.start_time()) * fs;
    const auto i_f = static_cast<std::ptrdiff_t>(std::lround(foot_pos));
    const auto i_sys_end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                                    i_f + static_cast<std::ptrdiff_t>(std::lround(0.6 * ibi * fs)));
    auto i_beat_end = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(n) - 1,
        i_f + static_cast<std::ptrdiff_t>(std::lround(0.95 * ibi * fs)));
    if (k + 1 < foot_times.size()) {
      i_beat_end = std::min<std::ptrdiff_t>(
          i_beat_end, static_cast<std::ptrdiff_t>(std::lround((foot_times[k + 1] - trace.start_time()) * fs)) - 1);
    }
    if (i_f < 0 || i_f >= static_cast<std::ptrdiff_t>(n) || i_sys_end <= i_f) continue;

    // systolic
    std::ptrdiff_t p = i_f + 1;
    for (std::ptrdiff_t j = i_f + 1; j <= i_sys_end; ++j) {
      if (s[static_cast<std::size_t>(j)] > s[static_cast<std::size_t>(p)]) p = j;
    }
    const auto [dp, sys_value] = detail::refine_extremum(s, static_cast<std::size_t>(p));
    const double sys_t = trace.start_time() + (static_cast<double>(p) + dp) / fs;
    const double foot_value = detail::interp_at(s, foot_pos);
    const double sys_amp = sys_value - foot_value;

    BeatAnnotation beat{foot_t, sys_t, sys_amp, std::nullopt, std::nullopt, std::nullopt};

    // dicrotic notch: the most prominent local minimum after systole that is
    // followed by a local maximum (the diastolic peak) within the beat. The
    // deep inter-beat valley never qualifies: nothing rises after it before
    // the next beat.
    std::ptrdiff_t best_notch = -1, best_dia = -1;
    double best_prom = 0.0;
    double running_left = s[static_cast<std::size_t>(p)];
    for (std::ptrdiff_t m = p + 1; m < i_beat_end; ++m) {
      const auto mu = static_cast<std::size_t>(m);
      running_left = std::max(running_left, s[mu]);
      if (!(s[mu] < s[mu - 1] && s[mu] < s[mu + 1])) continue;
      std::ptrdiff_t d = -1;
      for (std::ptrdiff_t j = m + 1; j < i_beat_end; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (s[ju] > s[ju - 1] && s[ju] >= s[ju + 1]) {
          d = j;
          break;
        }
      }
      if (d < 0) continue;
      const double prom = std::min(running_left, s[static_cast<std::size_t>(d)]) - s[mu];
      if (prom > best_prom) {
        best_prom = prom;
        best_notch = m;
        best_dia = d;
      }
    }
    if (best_notch >= 0 && best_prom >= prominence_frac * sys_amp) {
      const auto [dn, notch_value] = detail::refine_extremum(s, static_cast<std::size_t>(best_notch));
      (void)notch_value;
      const double notch_t = trace.start_time() + (static_cast<double>(best_notch) + dn) / fs;
      const auto [dd, dia_value] = detail::refine_extremum(s, static_cast<std::size_t>(best_dia));
      const double dia_t = trace.start_time() + (static_cast<double>(best_dia) + dd) / fs;
      // a diastolic peak below the foot level is residue, not a wave
      if (notch_t > sys_t && dia_t >= notch_t && dia_value > foot_value) {
        beat.notch_time_s = notch_t;
        beat.diastolic_time_s = dia_t;
        beat.diastolic_amp = dia_value - foot_value;
      }
    }

    if (!(beat.foot_time_s < beat.systolic_time_s)) continue;
    validate_annotation(beat);
    if (!series.beats.empty() && !(beat.foot_time_s > series.beats.back().foot_time_s)) continue;
    series.beats.push_back(beat);
  }
  return series;
}

struct PulseDelay {
  double delta_t_s;
  std::size_t n_pairs;
  double dispersion_s;  // median absolute deviation
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Median foot-to-foot delay between two beat series. Each beat in A pairs
/// with the nearest foot in B within the pairing window; the signed median
/// keeps delta_t(A,B) == -delta_t(B,A) for pair-complete series.
inline PulseDelay pulse_time_difference(const BeatSeries& series_a, const BeatSeries& series_b,
                                        double pairing_window_s = 0.5) {
  const std::vector<double> fa = series_a.foot_times();
  const std::vector<double> fb = series_b.foot_times();
  if (fa.empty() || fb.empty()) throw NoMatchedPairs("both series must contain beats");

  std::vector<double> deltas;
  for (double a : fa) {
    auto it = std::lower_bound(fb.begin(), fb.end(), a);
    double best = std::numeric_limits<double>::infinity();
    if (it != fb.end() && std::abs(*it - a) < std::abs(best)) best = *it - a;
    if (it != fb.begin() && std::abs(*(it - 1) - a) < std::abs(best)) best = *(it - 1) - a;
    if (std::abs(best) <= pairing_window_s) deltas.push_back(best);
  }
  if (deltas.empty()) throw NoMatchedPairs("no beat pairs within the pairing window");

  const double med = detail::median_of(deltas);
  std::vector<double> dev;
  dev.reserve(deltas.size());
  for (double d : deltas) dev.push_back(std::abs(d - med));
  return PulseDelay{med, deltas.size(), detail::median_of(dev)};
}

}  // namespace vitalwave

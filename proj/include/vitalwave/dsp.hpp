#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitalwave/errors.hpp"
#include "vitalwave/trace.hpp"

namespace vitalwave {

enum class FilterMode { causal_streaming, zero_phase_offline };

/// Band edges follow the acquisition chain: sub-0.2 Hz drift and mains-range
/// content above 45 Hz are both rejected.
struct FilterSpec {
  double low_cut_hz = 0.2;
  double high_cut_hz = 45.0;
  int order = 4;  // total pole count of the bandpass; must be even
  FilterMode mode = FilterMode::zero_phase_offline;
};

struct SosSection {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 == 1)
};

/// Per-section direct-form II transposed state. One state value must never be
/// shared by two concurrent chunk streams.
struct SosState {
  std::vector<std::array<double, 2>> z;
};

namespace detail {

inline std::vector<std::complex<double>> butterworth_prototype(int n) {
  std::vector<std::complex<double>> poles;
  poles.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

}  // namespace detail

/// Cascaded-biquad Butterworth bandpass designed with the bilinear transform.
class SosFilter {
public:
  static SosFilter design_bandpass(const FilterSpec& spec, double sample_rate_hz) {
    if (!(spec.low_cut_hz > 0.0) || !(spec.high_cut_hz > spec.low_cut_hz) ||
        !(spec.high_cut_hz < 0.5 * sample_rate_hz)) {
      throw BandOutOfRange("band edges must satisfy 0 < low < high < sample_rate/2");
    }
    if (spec.order < 2 || spec.order % 2 != 0) {
      throw InvalidConfig("filter order must be an even integer >= 2");
    }
    const int n_proto = spec.order / 2;
    const double fs2 = 2.0 * sample_rate_hz;
    const double wl = fs2 * std::tan(std::numbers::pi * spec.low_cut_hz / sample_rate_hz);
    const double wh = fs2 * std::tan(std::numbers::pi * spec.high_cut_hz / sample_rate_hz);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;

    // Lowpass prototype -> analog bandpass poles -> z-plane via bilinear.
    std::vector<std::complex<double>> zpoles;
    zpoles.reserve(static_cast<std::size_t>(spec.order));
    for (const auto& p : detail::butterworth_prototype(n_proto)) {
      const std::complex<double> bp = bw * p;
      const std::complex<double> disc = std::sqrt(bp * bp - 4.0 * w0 * w0);
      for (const std::complex<double> s : {0.5 * (bp + disc), 0.5 * (bp - disc)}) {
        zpoles.push_back((fs2 + s) / (fs2 - s));
      }
    }

    // Group poles into conjugate pairs (real poles pair among themselves).
    std::vector<std::complex<double>> pool = zpoles;
    std::vector<std::pair<std::complex<double>, std::complex<double>>> pairs;
    std::vector<std::complex<double>> reals;
    const double imag_tol = 1e-10;
    while (!pool.empty()) {
      std::size_t imax = 0;
      for (std::size_t i = 1; i < pool.size(); ++i) {
        if (std::abs(pool[i].imag()) > std::abs(pool[imax].imag())) imax = i;
      }
      std::complex<double> p = pool[imax];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(imax));
      if (std::abs(p.imag()) < imag_tol) {
        reals.push_back(p);
        continue;
      }
      std::size_t jbest = 0;
      double dbest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < pool.size(); ++j) {
        const double d = std::abs(pool[j] - std::conj(p));
        if (d < dbest) {
          dbest = d;
          jbest = j;
        }
      }
      pairs.emplace_back(p, pool[jbest]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(jbest));
    }
    std::sort(reals.begin(), reals.end(),
              [](const auto& a, const auto& b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
      pairs.emplace_back(reals[i], reals[i + 1]);
    }

    SosFilter f;
    f.sample_rate_ = sample_rate_hz;
    f.spec_ = spec;
    for (const auto& [z1, z2] : pairs) {
      SosSection s{};
      s.b0 = 1.0;
      s.b1 = 0.0;
      s.b2 = -1.0;  // zeros at z = +1 and z = -1
      s.a1 = -(z1 + z2).real();
      s.a2 = (z1 * z2).real();
      f.sections_.push_back(s);
    }
    // Unit gain at the (warped) geometric center frequency.
    const double w_center = 2.0 * std::atan(w0 / fs2);
    const double g = f.magnitude_at_omega(w_center);
    const double per_section = std::pow(1.0 / g, 1.0 / static_cast<double>(f.sections_.size()));
    for (SosSection& s : f.sections_) {
      s.b0 *= per_section;
      s.b2 *= per_section;
    }
    return f;
  }

  const std::vector<SosSection>& sections() const noexcept { return sections_; }
  double sample_rate() const noexcept { return sample_rate_; }
  const FilterSpec& spec() const noexcept { return spec_; }

  /// Analytic single-pass magnitude response at a frequency in Hz.
  double magnitude(double freq_hz) const {
    return magnitude_at_omega(2.0 * std::numbers::pi * freq_hz / sample_rate_);
  }

  SosState zero_state() const { return SosState{{sections_.size(), {0.0, 0.0}}}; }

  /// State matching the steady-state response to a constant input level, so a
  /// step offset at the first sample produces no transient.
  SosState steady_state(double input_level) const {
    SosState st = zero_state();
    double level = input_level;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
      const SosSection& s = sections_[i];
      const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
      st.z[i][0] = (s.b1 + s.b2 - (s.a1 + s.a2) * h1) * level;
      st.z[i][1] = (s.b2 - s.a2 * h1) * level;
      level *= h1;
    }
    return st;
  }

private:
  double magnitude_at_omega(double omega) const {
    const std::complex<double> e1 = std::polar(1.0, -omega);
    const std::complex<double> e2 = std::polar(1.0, -2.0 * omega);
    std::complex<double> h{1.0, 0.0};
    for (const SosSection& s : sections_) {
      h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
    }
    return std::abs(h);
  }

  std::vector<SosSection> sections_;
  double sample_rate_ = 0.0;
  FilterSpec spec_;
};

/// Causal single pass over a chunk; the state carries across chunk boundaries.
inline std::vector<double> sos_filter_chunk(const SosFilter& filter, SosState& state,
                                            std::span<const double> x) {
  if (state.z.size() != filter.sections().size()) state = filter.zero_state();
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t si = 0; si < filter.sections().size(); ++si) {
    const SosSection& s = filter.sections()[si];
    double z1 = state.z[si][0];
    double z2 = state.z[si][1];
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    state.z[si] = {z1, z2};
  }
  return y;
}

namespace detail {

/// Forward-backward pass with odd-extension padding and step-matched initial
/// conditions; zero net phase.
inline std::vector<double> filter_zero_phase(const SosFilter& filter,
                                             std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return std::vector<double>(x.begin(), x.end());
  const double fs = filter.sample_rate();
  const std::size_t pad = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::lround(3.0 * fs / filter.spec().low_cut_hz)));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  SosState st = filter.steady_state(ext.front());
  std::vector<double> fwd = sos_filter_chunk(filter, st, ext);
  std::reverse(fwd.begin(), fwd.end());
  st = filter.steady_state(fwd.front());
  std::vector<double> bwd = sos_filter_chunk(filter, st, fwd);
  std::reverse(bwd.begin(), bwd.end());

  return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                             bwd.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace detail

/// Band-limit a trace per the spec; output keeps grid and length.
inline Trace bandpass(const Trace& trace, const FilterSpec& spec) {
  const SosFilter f = SosFilter::design_bandpass(spec, trace.sample_rate());
  if (spec.mode == FilterMode::zero_phase_offline) {
    return trace.with_samples(detail::filter_zero_phase(f, trace.samples()));
  }
  SosState st = f.steady_state(trace.samples().front());
  return trace.with_samples(sos_filter_chunk(f, st, trace.samples()));
}

/// Leading/trailing span that downstream statistics should treat as filter
/// warm-up when the causal path is used.
inline double edge_guard_seconds(const FilterSpec& spec) {
  return std::max(5.0, 3.0 / spec.low_cut_hz);
}

/// Remove the least-squares line.
inline Trace detrend(const Trace& trace) {
  const std::vector<double>& x = trace.samples();
  const std::size_t n = x.size();
  const double mid = 0.5 * static_cast<double>(n - 1);
  double sxx = 0.0, sxy = 0.0, mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tc = static_cast<double>(i) - mid;
    sxx += tc * tc;
    sxy += tc * (x[i] - mean);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] - mean - slope * (static_cast<double>(i) - mid);
  }
  return trace.with_samples(std::move(out));
}

/// Linear-interpolation resampling; duration preserved within one output sample.
inline Trace resample(const Trace& trace, double new_rate_hz) {
  if (!(new_rate_hz > 0.0)) throw NonPositiveRate("resample target rate must be positive");
  const std::vector<double>& x = trace.samples();
  const std::size_t n = x.size();
  const double ratio = trace.sample_rate() / new_rate_hz;
  const auto n_new = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(trace.duration() * new_rate_hz)));
  std::vector<double> out(n_new);
  for (std::size_t i = 0; i < n_new; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    if (pos >= static_cast<double>(n - 1)) {
      out[i] = x[n - 1];
      continue;
    }
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    out[i] = x[k] + frac * (x[k + 1] - x[k]);
  }
  return Trace(new_rate_hz, trace.start_time(), std::move(out), trace.site());
}

// ---------------------------------------------------------------------------
// Spectral estimation
// ---------------------------------------------------------------------------

namespace detail {

inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  std::size_t j = 0;
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

/// DFT of arbitrary length via Bluestein's chirp-z reduction to a power of two.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<std::complex<double>> a = x;
    fft_pow2(a, false);
    return a;
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  // chirp exponent uses k^2 mod 2n to stay accurate for large k
  auto chirp = [n](std::size_t k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    return std::complex<double>(std::cos(ang), std::sin(ang));
  };
  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  std::vector<std::complex<double>> b(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const std::complex<double> c = chirp(k);
    a[k] = x[k] * c;
    b[k] = std::conj(c);
    if (k != 0) b[m - k] = std::conj(c);
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp(k);
  return out;
}

}  // namespace detail

enum class SpectralWindow { hann, rectangular };

/// One-sided power spectral density with uniform bin width.
struct Spectrum {
  double df_hz = 0.0;
  std::vector<double> power;  // a.u.^2 / Hz, bin k is centered at k * df_hz
  std::string window_descriptor;
  std::size_t n_segments = 0;

  double frequency_at(std::size_t k) const { return static_cast<double>(k) * df_hz; }
};

/// Welch-averaged one-sided PSD. Segments are demeaned before windowing, so a
/// rectangular single-segment estimate integrates to the population variance.
inline Spectrum power_spectrum(const Trace& trace, double segment_seconds,
                               double overlap_frac,
                               SpectralWindow window = SpectralWindow::hann) {
  const double fs = trace.sample_rate();
  const std::vector<double>& x = trace.samples();
  const auto nperseg = static_cast<std::size_t>(std::llround(segment_seconds * fs));
  if (nperseg > x.size()) throw SegmentTooLong("segment exceeds trace duration");
  if (nperseg < 4) throw InvalidWindow("segment must span at least 4 samples");
  if (!(overlap_frac >= 0.0) || overlap_frac >= 1.0) {
    throw InvalidWindow("overlap fraction must be in [0, 1)");
  }
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(nperseg) * (1.0 - overlap_frac))));

  std::vector<double> w(nperseg, 1.0);
  if (window == SpectralWindow::hann) {
    for (std::size_t i = 0; i < nperseg; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(nperseg - 1));
    }
  }
  double u = 0.0;
  for (double wi : w) u += wi * wi;

  const std::size_t nbins = nperseg / 2 + 1;
  std::vector<double> acc(nbins, 0.0);
  std::size_t nseg = 0;
  std::vector<std::complex<double>> buf(nperseg);
  for (std::size_t start = 0; start + nperseg <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nperseg; ++i) mean += x[start + i];
    mean /= static_cast<double>(nperseg);
    for (std::size_t i = 0; i < nperseg; ++i) {
      buf[i] = std::complex<double>((x[start + i] - mean) * w[i], 0.0);
    }
    const std::vector<std::complex<double>> spec = detail::dft(buf);
    for (std::size_t k = 0; k < nbins; ++k) {
      double p = std::norm(spec[k]) / (fs * u);
      const bool nyquist = (nperseg % 2 == 0) && (k == nbins - 1);
      if (k != 0 && !nyquist) p *= 2.0;
      acc[k] += p;
    }
    ++nseg;
  }
  for (double& v : acc) v /= static_cast<double>(nseg);

  Spectrum out;
  out.df_hz = fs / static_cast<double>(nperseg);
  out.power = std::move(acc);
  out.window_descriptor = window == SpectralWindow::hann ? "hann" : "rectangular";
  out.n_segments = nseg;
  return out;
}

struct SpectralPeak {
  double frequency_hz;
  double power;
};

/// Local maxima above floor_frac of the global maximum, greedily thinned to
/// min_separation_hz, refined by 3-point parabolic interpolation. Sorted by
/// descending power.
inline std::vector<SpectralPeak> spectral_peaks(const Spectrum& spectrum,
                                                std::size_t max_peaks,
                                                double min_separation_hz,
                                                double floor_frac) {
  const std::vector<double>& p = spectrum.power;
  if (p.size() < 3 || max_peaks == 0) return {};
  double gmax = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) gmax = std::max(gmax, p[k]);
  if (!(gmax > 0.0)) return {};
  const double floor = floor_frac * gmax;

  std::vector<SpectralPeak> candidates;
  for (std::size_t k = 1; k + 1 < p.size(); ++k) {
    if (!(p[k] > p[k - 1] && p[k] > p[k + 1] && p[k] >= floor)) continue;
    const double pm = p[k - 1], p0 = p[k], pp = p[k + 1];
    const double denom = pm + pp - 2.0 * p0;
    double delta = 0.0;
    if (denom != 0.0) delta = std::clamp((pm - pp) / (2.0 * denom), -0.5, 0.5);
    const double a = 0.5 * (pm + pp) - p0;
    const double b = 0.5 * (pp - pm);
    const double refined = p0 + b * delta + a * delta * delta;
    candidates.push_back({(static_cast<double>(k) + delta) * spectrum.df_hz, refined});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const SpectralPeak& a, const SpectralPeak& b) { return a.power > b.power; });

  std::vector<SpectralPeak> out;
  for (const SpectralPeak& c : candidates) {
    if (out.size() >= max_peaks) break;
    bool clear = true;
    for (const SpectralPeak& kept : out) {
      if (std::abs(kept.frequency_hz - c.frequency_hz) < min_separation_hz) {
        clear = false;
        break;
      }
    }
    if (clear) out.push_back(c);
  }
  return out;
}

}  // namespace vitalwave

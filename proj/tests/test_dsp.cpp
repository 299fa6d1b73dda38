#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "vitalwave/dsp.hpp"
#include "vitalwave/random.hpp"
#include "vitalwave/trace.hpp"

using namespace vitalwave;
using Catch::Approx;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

Trace sinusoid(double freq_hz, double amp, double duration_s, double fs, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(kTau * freq_hz * static_cast<double>(i) / fs + phase);
  }
  return make_trace(fs, 0.0, std::move(x));
}

/// sqrt(2) * RMS over the central span: amplitude of a clean sinusoid.
double central_amplitude(const Trace& t, double guard_s) {
  const auto g = static_cast<std::size_t>(guard_s * t.sample_rate());
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t i = g; i + g < t.size(); ++i) {
    ss += t.samples()[i] * t.samples()[i];
    ++count;
  }
  return std::sqrt(2.0 * ss / static_cast<double>(count));
}

/// Brute-force DFT; the independent oracle for the transform layer.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -kTau * static_cast<double>(k) * static_cast<double>(j) /
                         static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("arbitrary-length DFT matches the brute-force oracle", "[dsp][fft]") {
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {7u, 64u, 150u, 243u, 500u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {u(gen), u(gen)};
    const auto fast = detail::dft(x);
    const auto slow = naive_dft(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(fast[k] - slow[k]));
    INFO("n = " << n);
    REQUIRE(worst < 1e-8 * static_cast<double>(n));
  }
}

TEST_CASE("bandpass rejects DC", "[dsp][filter]") {
  const Trace constant = make_trace(250.0, 0.0, std::vector<double>(30 * 250, 1.0));
  const Trace out = bandpass(constant, FilterSpec{});
  const auto guard = static_cast<std::size_t>(5.0 * 250);
  double worst = 0.0;
  for (std::size_t i = guard; i + guard < out.size(); ++i) {
    worst = std::max(worst, std::abs(out.samples()[i]));
  }
  REQUIRE(worst < 1e-3);
}

TEST_CASE("bandpass amplitudes match the analytic magnitude response", "[dsp][filter]") {
  const FilterSpec spec;  // 0.2-45 Hz, order 4, zero-phase
  const SosFilter designed = SosFilter::design_bandpass(spec, 250.0);

  SECTION("1 Hz passband tone") {
    const double analytic = designed.magnitude(1.0) * designed.magnitude(1.0);  // two passes
    const Trace out = bandpass(sinusoid(1.0, 1.0, 60.0, 250.0), spec);
    const double measured = central_amplitude(out, 10.0);
    REQUIRE(measured == Approx(analytic).margin(0.01));
    REQUIRE(measured > 0.95);
    REQUIRE(measured < 1.05);
  }
  SECTION("60 Hz mains tone is attenuated") {
    const double analytic = designed.magnitude(60.0) * designed.magnitude(60.0);
    const Trace out = bandpass(sinusoid(60.0, 1.0, 60.0, 250.0), spec);
    const double measured = central_amplitude(out, 10.0);
    REQUIRE(measured == Approx(analytic).margin(0.01));
    REQUIRE(measured < 0.3);
  }
  SECTION("band edges validated against the sample rate") {
    REQUIRE_THROWS_AS(bandpass(sinusoid(1.0, 1.0, 10.0, 80.0), spec), BandOutOfRange);
  }
}

TEST_CASE("bandpass is linear", "[dsp][filter][property]") {
  Rng rng(73);
  const std::size_t n = 4000;
  std::vector<double> xv(n), yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    xv[i] = rng.gaussian();
    yv[i] = rng.gaussian();
  }
  const Trace x = make_trace(250.0, 0.0, xv);
  const Trace y = make_trace(250.0, 0.0, yv);
  const double a = 1.7, b = -0.45;
  std::vector<double> combo(n);
  for (std::size_t i = 0; i < n; ++i) combo[i] = a * xv[i] + b * yv[i];

  const FilterSpec spec;
  const Trace fc = bandpass(make_trace(250.0, 0.0, combo), spec);
  const Trace fx = bandpass(x, spec);
  const Trace fy = bandpass(y, spec);
  double scale = 0.0;
  for (double v : fc.samples()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = a * fx.samples()[i] + b * fy.samples()[i];
    REQUIRE(std::abs(fc.samples()[i] - expect) <= 1e-9 * scale);
  }
}

TEST_CASE("zero-phase output has no lag", "[dsp][filter]") {
  const Trace in = sinusoid(1.3, 1.0, 40.0, 250.0);
  const Trace out = bandpass(in, FilterSpec{});
  const auto g = static_cast<std::size_t>(5 * 250);
  double best = -1.0;
  int best_lag = -100;
  for (int lag = -20; lag <= 20; ++lag) {
    double acc = 0.0;
    for (std::size_t i = g; i + g < in.size(); ++i) {
      acc += in.samples()[i] * out.samples()[static_cast<std::size_t>(static_cast<int>(i) + lag)];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  REQUIRE(best_lag == 0);
}

TEST_CASE("causal streaming equals the one-shot causal pass", "[dsp][filter]") {
  Rng rng(11);
  std::vector<double> xv(3000);
  for (double& v : xv) v = rng.gaussian();
  FilterSpec spec;
  spec.mode = FilterMode::causal_streaming;
  const Trace whole = bandpass(make_trace(250.0, 0.0, xv), spec);

  const SosFilter f = SosFilter::design_bandpass(spec, 250.0);
  SosState st = f.steady_state(xv.front());
  std::vector<double> chunked;
  for (std::size_t start = 0; start < xv.size(); start += 700) {
    const std::size_t end = std::min(xv.size(), start + 700);
    const auto part = sos_filter_chunk(
        f, st, std::span<const double>(xv.data() + start, end - start));
    chunked.insert(chunked.end(), part.begin(), part.end());
  }
  REQUIRE(chunked.size() == whole.size());
  for (std::size_t i = 0; i < chunked.size(); ++i) {
    REQUIRE(chunked[i] == Approx(whole.samples()[i]).margin(1e-12));
  }
}

TEST_CASE("detrend removes lines and keeps sinusoids", "[dsp]") {
  const double fs = 250.0;
  const std::size_t n = 5000;
  // even about the record center and an integer number of grid periods, so
  // the sinusoid is exactly orthogonal to {1, t}
  const double center = 0.5 * static_cast<double>(n - 1);
  std::vector<double> ramp(n), wave(n), both(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    ramp[i] = 3.5 * t + 2.0;
    wave[i] = std::cos(kTau * 2.0 * (static_cast<double>(i) - center) / fs);
    both[i] = ramp[i] + wave[i];
  }
  SECTION("pure ramp vanishes") {
    const Trace out = detrend(make_trace(fs, 0.0, ramp));
    for (double v : out.samples()) REQUIRE(std::abs(v) < 1e-9 * 72.0);
  }
  SECTION("zero-mean sinusoid is unchanged") {
    const Trace out = detrend(make_trace(fs, 0.0, wave));
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(out.samples()[i] - wave[i]) < 1e-6);
  }
  SECTION("superposition recovers the sinusoid") {
    const Trace out = detrend(make_trace(fs, 0.0, both));
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(out.samples()[i] - wave[i]) < 1e-6);
  }
}

TEST_CASE("resample", "[dsp]") {
  SECTION("same rate is the identity") {
    const Trace t = sinusoid(1.0, 1.0, 10.0, 250.0);
    const Trace r = resample(t, 250.0);
    REQUIRE(r.samples() == t.samples());
  }
  SECTION("upsampling a 1 Hz tone stays within 1e-3 of the analytic signal") {
    const Trace r = resample(sinusoid(1.0, 1.0, 10.0, 250.0), 500.0);
    REQUIRE(r.sample_rate() == 500.0);
    REQUIRE(std::abs(r.duration() - 10.0) <= 1.0 / 500.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double t = static_cast<double>(i) / 500.0;
      if (t > 10.0 - 1.0 / 250.0) break;  // clamped tail sample
      REQUIRE(std::abs(r.samples()[i] - std::sin(kTau * t)) < 1e-3);
    }
  }
  SECTION("constant stays constant at any rate") {
    const Trace t = make_trace(250.0, 0.0, std::vector<double>(1000, 4.2));
    for (double rate : {40.0, 333.0, 1000.0}) {
      const Trace r = resample(t, rate);
      for (double v : r.samples()) REQUIRE(v == Approx(4.2));
    }
  }
}

TEST_CASE("welch power spectrum", "[dsp][spectrum]") {
  SECTION("2.43 Hz tone lands in the right bin") {
    const Spectrum s = power_spectrum(sinusoid(2.43, 1.0, 60.0, 250.0), 30.0, 0.5);
    REQUIRE(s.df_hz == Approx(1.0 / 30.0));
    REQUIRE(s.n_segments == 3);
    std::size_t kmax = 1;
    for (std::size_t k = 1; k < s.power.size(); ++k) {
      if (s.power[k] > s.power[kmax]) kmax = k;
    }
    REQUIRE(std::abs(s.frequency_at(kmax) - 2.43) <= s.df_hz);
  }
  SECTION("all-zero trace gives an all-zero spectrum") {
    const Spectrum s =
        power_spectrum(make_trace(250.0, 0.0, std::vector<double>(2500, 0.0)), 5.0, 0.5);
    for (double p : s.power) REQUIRE(p == 0.0);
  }
  SECTION("Parseval: rectangular single segment integrates to the variance") {
    Rng rng(314);
    std::vector<double> xv(7500);  // 30 s at 250 Hz, not a power of two
    for (double& v : xv) v = rng.gaussian();
    const Trace t = make_trace(250.0, 0.0, xv);
    const Spectrum s = power_spectrum(t, 30.0, 0.0, SpectralWindow::rectangular);
    REQUIRE(s.n_segments == 1);
    double integral = 0.0;
    for (double p : s.power) integral += p * s.df_hz;
    const double sd = basic_stats(t).stddev;
    REQUIRE(integral == Approx(sd * sd).epsilon(0.02));
  }
  SECTION("segment longer than the trace is rejected") {
    REQUIRE_THROWS_AS(power_spectrum(sinusoid(1.0, 1.0, 10.0, 250.0), 11.0, 0.5),
                      SegmentTooLong);
  }
}

TEST_CASE("spectral peaks", "[dsp][spectrum]") {
  const double fs = 250.0;
  SECTION("breathing plus cadence mixture, power-ordered") {
    const auto n = static_cast<std::size_t>(60 * fs);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      x[i] = 1.0 * std::sin(kTau * 0.3 * t) + 0.5 * std::sin(kTau * 2.43 * t);
    }
    const Spectrum s = power_spectrum(make_trace(fs, 0.0, std::move(x)), 30.0, 0.5);
    const auto peaks = spectral_peaks(s, 4, 0.1, 0.01);
    REQUIRE(peaks.size() == 2);
    REQUIRE(std::abs(peaks[0].frequency_hz - 0.3) <= 0.5 * s.df_hz);
    REQUIRE(std::abs(peaks[1].frequency_hz - 2.43) <= 0.5 * s.df_hz);
    REQUIRE(peaks[0].power > peaks[1].power);
  }
  SECTION("single sinusoid yields exactly one peak") {
    const Spectrum s = power_spectrum(sinusoid(1.7, 1.0, 60.0, fs), 30.0, 0.5);
    const auto peaks = spectral_peaks(s, 8, 0.1, 0.05);
    REQUIRE(peaks.size() == 1);
    REQUIRE(std::abs(peaks[0].frequency_hz - 1.7) <= 0.5 * s.df_hz);
  }
  SECTION("flat spectrum has no local maxima") {
    Spectrum flat;
    flat.df_hz = 0.1;
    flat.power.assign(100, 1.0);
    REQUIRE(spectral_peaks(flat, 4, 0.1, 0.1).empty());
  }
  SECTION("peak frequency lands within half a bin for random in-band tones") {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> pick(0.5, 20.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double f = pick(gen);
      const Spectrum s = power_spectrum(sinusoid(f, 1.0, 60.0, fs), 30.0, 0.5);
      const auto peaks = spectral_peaks(s, 1, 0.1, 0.05);
      REQUIRE(peaks.size() == 1);
      INFO("f = " << f);
      REQUIRE(std::abs(peaks[0].frequency_hz - f) < 0.5 * s.df_hz);
    }
  }
}

TEST_CASE("edge guard follows the low cut", "[dsp]") {
  FilterSpec spec;
  REQUIRE(edge_guard_seconds(spec) == Approx(15.0));
  spec.low_cut_hz = 1.0;
  REQUIRE(edge_guard_seconds(spec) == Approx(5.0));
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitalwave/errors.hpp"

namespace vitalwave {

enum class Site { chest, wrist, ankle, unspecified };

inline const char* site_name(Site s) {
  switch (s) {
    case Site::chest: return "chest";
    case Site::wrist: return "wrist";
    case Site::ankle: return "ankle";
    default: return "unspecified";
  }
}

/// Uniformly sampled single-channel intensity series.
///
/// Sample indices are the authoritative time grid; the time of sample i is
/// start_time() + i / sample_rate(). Instances are validated on construction
/// and immutable afterwards, so they are safe to share across threads.
class Trace {
public:
  Trace(double sample_rate_hz, double start_time_s, std::vector<double> samples,
        Site site = Site::unspecified)
      : sample_rate_(sample_rate_hz),
        start_time_(start_time_s),
        samples_(std::move(samples)),
        site_(site) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
      throw NonPositiveRate("sample rate must be a positive finite frequency");
    }
    if (samples_.empty()) {
      throw EmptySamples("a trace requires at least one sample");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i])) throw NonFiniteSample(i);
    }
  }

  double sample_rate() const noexcept { return sample_rate_; }
  double start_time() const noexcept { return start_time_; }
  Site site() const noexcept { return site_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  double time_at(std::size_t i) const noexcept {
    return start_time_ + static_cast<double>(i) / sample_rate_;
  }
  /// One past the last sample time: start_time + size / sample_rate.
  double end_time() const noexcept { return time_at(samples_.size()); }
  double duration() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  /// Same grid and site, different sample values.
  Trace with_samples(std::vector<double> samples) const {
    return Trace(sample_rate_, start_time_, std::move(samples), site_);
  }

private:
  double sample_rate_;
  double start_time_;
  std::vector<double> samples_;
  Site site_;
};

inline Trace make_trace(double sample_rate_hz, double start_time_s,
                        std::vector<double> samples, Site site = Site::unspecified) {
  return Trace(sample_rate_hz, start_time_s, std::move(samples), site);
}

/// Aligned multi-channel recording: all channels share rate, start, and length.
class Recording {
public:
  explicit Recording(std::vector<Trace> channels, std::string label = {})
      : channels_(std::move(channels)), label_(std::move(label)) {
    if (channels_.empty()) throw EmptySamples("a recording requires at least one channel");
    const Trace& first = channels_.front();
    for (const Trace& ch : channels_) {
      if (ch.sample_rate() != first.sample_rate() || ch.start_time() != first.start_time() ||
          ch.size() != first.size()) {
        throw InvalidConfig("recording channels must share sample rate, start time, and length");
      }
    }
  }

  const std::vector<Trace>& channels() const noexcept { return channels_; }
  const std::string& label() const noexcept { return label_; }
  double sample_rate() const noexcept { return channels_.front().sample_rate(); }
  double start_time() const noexcept { return channels_.front().start_time(); }
  std::size_t length() const noexcept { return channels_.front().size(); }

  const Trace* find_channel(Site site) const noexcept {
    for (const Trace& ch : channels_)
      if (ch.site() == site) return &ch;
    return nullptr;
  }

private:
  std::vector<Trace> channels_;
  std::string label_;
};

/// Half-open window [t0, t1). The result starts at the first sample with
/// time >= t0 and ends before the first sample with time >= t1, so adjacent
/// segments concatenate back to the original sample-for-sample.
inline Trace segment(const Trace& trace, double t0, double t1) {
  const double eps = 1e-9;
  if (t0 < trace.start_time() - eps || t1 > trace.end_time() + eps) {
    throw OutOfRange("segment window exceeds the trace span");
  }
  const double fs = trace.sample_rate();
  auto snap_up = [&](double t) {
    double idx = (t - trace.start_time()) * fs;
    return static_cast<std::ptrdiff_t>(std::ceil(idx - eps));
  };
  std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, snap_up(t0));
  std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(trace.size()),
                                               snap_up(t1));
  if (i0 >= i1) throw EmptyWindow("segment window contains no samples");
  std::vector<double> out(trace.samples().begin() + i0, trace.samples().begin() + i1);
  return Trace(fs, trace.time_at(static_cast<std::size_t>(i0)), std::move(out), trace.site());
}

struct BasicStats {
  double mean;
  double stddev;  // population
  double min;
  double max;
};

inline BasicStats basic_stats(const Trace& trace) {
  const std::vector<double>& x = trace.samples();
  double sum = 0.0;
  double lo = x.front(), hi = x.front();
  for (double v : x) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) {
    const double d = v - mean;
    ss += d * d;
  }
  return BasicStats{mean, std::sqrt(ss / static_cast<double>(x.size())), lo, hi};
}

}  // namespace vitalwave

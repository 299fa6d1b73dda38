#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vitalwave {

enum class Errc {
  empty_samples,
  non_finite_sample,
  non_positive_rate,
  out_of_range,
  empty_window,
  invalid_template,
  invalid_config,
  invalid_window,
  band_out_of_range,
  segment_too_long,
  no_beats_found,
  no_matched_pairs,
  too_few_beats,
  too_few_intervals,
  empty_input,
  non_positive_delay,
  non_positive_distance,
  trace_too_short,
  no_cadence_peak,
  non_positive_speed,
};

/// Base of all library errors; carries a stable error code alongside the message.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

/// One distinct exception type per Errc, so call sites can catch precisely.
template <Errc C>
class TypedError : public Error {
public:
  explicit TypedError(const std::string& what) : Error(C, what) {}
};

using EmptySamples = TypedError<Errc::empty_samples>;
using NonPositiveRate = TypedError<Errc::non_positive_rate>;
using OutOfRange = TypedError<Errc::out_of_range>;
using EmptyWindow = TypedError<Errc::empty_window>;
using InvalidTemplate = TypedError<Errc::invalid_template>;
using InvalidConfig = TypedError<Errc::invalid_config>;
using InvalidWindow = TypedError<Errc::invalid_window>;
using BandOutOfRange = TypedError<Errc::band_out_of_range>;
using SegmentTooLong = TypedError<Errc::segment_too_long>;
using NoBeatsFound = TypedError<Errc::no_beats_found>;
using NoMatchedPairs = TypedError<Errc::no_matched_pairs>;
using TooFewBeats = TypedError<Errc::too_few_beats>;
using TooFewIntervals = TypedError<Errc::too_few_intervals>;
using EmptyInput = TypedError<Errc::empty_input>;
using NonPositiveDelay = TypedError<Errc::non_positive_delay>;
using NonPositiveDistance = TypedError<Errc::non_positive_distance>;
using TraceTooShort = TypedError<Errc::trace_too_short>;
using NoCadencePeak = TypedError<Errc::no_cadence_peak>;
using NonPositiveSpeed = TypedError<Errc::non_positive_speed>;

/// Rejected sample values keep the offending index for diagnostics.
class NonFiniteSample : public Error {
public:
  explicit NonFiniteSample(std::size_t index)
      : Error(Errc::non_finite_sample,
              "sample at index " + std::to_string(index) + " is not finite"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

}  // namespace vitalwave

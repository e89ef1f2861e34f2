#pragma once

#include <stdexcept>
#include <string>

namespace engage {

//! Failure categories surfaced by the library.  Each value names the
//! contract that was violated rather than the place it was detected.
enum class Err {
  InvalidBand,        // band edges outside (0, nyquist) or misordered
  TooShort,           // not enough samples for the requested operation
  EmptyBaseline,      // epoch carries no pre-stimulus samples
  RankDeficient,      // data rank below the requested component count
  DegenerateData,     // zero variance where variance is required
  DimensionMismatch,  // feature dimension differs from a fitted model
  BandOutOfRange,     // spectral band exceeds the Nyquist frequency
  SingleClass,        // training labels contain only one class
  SingularCovariance, // within-class covariance not invertible
  TooFewSamples,      // too few members per class for the requested folds
  LengthMismatch,     // paired sequences of different length
  Empty,              // empty input where at least one element is required
  ConstantInput,      // zero-variance input to a correlation
  InvalidP,           // p-value outside [0, 1]
  MissingRatings,     // an expected ad has no ratings
  InvalidSpec,        // generator or run configuration out of range
  UnknownChannel,     // channel name absent from the layout
  Io,                 // file could not be read, parsed, or written
};

const char* to_string(Err code);

//! Exception carrying one Err code plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace engage

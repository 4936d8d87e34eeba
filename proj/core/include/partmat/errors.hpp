// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_ERRORS_HPP_
#define PARTMAT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace partmat {

/// Violated precondition or malformed configuration. Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structured file/format failure. `code()` distinguishes the failure class so
/// callers can react to e.g. a magic mismatch versus a truncated stream.
class IoError : public std::runtime_error {
 public:
  enum class Code {
    kOpenFailed,
    kBadMagic,
    kBadVersion,
    kTruncated,
    kLabelOutOfRange,
    kMissingName,
    kDimMismatch,
    kNonFinite,
    kMalformed,
  };

  IoError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Numeric failure during optimization (NaN/Inf loss). Carries the epoch and
/// batch where the failure occurred. Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& message, long epoch = -1, long batch = -1)
      : std::runtime_error(message), epoch_(epoch), batch_(batch) {}

  long epoch() const noexcept { return epoch_; }
  long batch() const noexcept { return batch_; }

 private:
  long epoch_;
  long batch_;
};

}  // namespace partmat

#endif  // PARTMAT_ERRORS_HPP_

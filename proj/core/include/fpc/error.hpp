#pragma once

#include <stdexcept>
#include <string>

namespace fpc {

enum class ErrorCode {
  kIo,
  kUnsupportedFormat,
  kInvalidImage,
  kDimensionMismatch,
  kInsufficientImages,
  kInvalidArgument,
  kNotSymmetric,
  kNoConvergence,
  kNegativeEigenvalue,
  kDegenerateSpace,
  kInconclusiveVerdict,
  kBadMagic,
  kUnsupportedVersion,
  kUnexpectedEof,
  kLengthMismatch,
};

/// Single exception type thrown by the library. The code lets callers (and
/// tests) distinguish failure classes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fpc

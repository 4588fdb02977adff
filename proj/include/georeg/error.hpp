#pragma once

#include <stdexcept>
#include <string>

namespace georeg {

enum class ErrorCode {
  InvalidArgument,
  OutOfBounds,
  MissingGeoreference,
  DegenerateTile,
  InvalidFov,
  BadDimensions,
  ShapeMismatch,
  NonFiniteActivation,
  ZeroFeature,
  NonFiniteGradient,
  BadWindow,
  BatchTooSmall,
  MixedGranularity,
  MissingPrior,
  NoConsistentHypothesis,
  EmptySet,
  DivergedLoss,
  ConfigMismatch,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind instead of the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace georeg

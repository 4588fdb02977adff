#include "georeg/error.hpp"

namespace georeg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::MissingGeoreference: return "MissingGeoreference";
    case ErrorCode::DegenerateTile: return "DegenerateTile";
    case ErrorCode::InvalidFov: return "InvalidFov";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::ZeroFeature: return "ZeroFeature";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::MixedGranularity: return "MixedGranularity";
    case ErrorCode::MissingPrior: return "MissingPrior";
    case ErrorCode::NoConsistentHypothesis: return "NoConsistentHypothesis";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace georeg

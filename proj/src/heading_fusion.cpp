#include "georeg/heading_fusion.hpp"

#include <cmath>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"

namespace georeg {

void validate(const FusionState& s) {
  if (!std::isfinite(s.heading)) fail(ErrorCode::InvalidArgument, "fusion heading must be finite");
  if (!(s.variance > 0.0) || !std::isfinite(s.variance)) fail(ErrorCode::InvalidArgument, "fusion variance must be positive");
  if (!(s.process_noise_rate >= 0.0)) fail(ErrorCode::InvalidArgument, "process noise rate must be non-negative");
  if (!(s.measurement_variance >= 0.0)) fail(ErrorCode::InvalidArgument, "measurement variance must be non-negative");
}

FusionState predict(const FusionState& state, double delta_heading, double dt) {
  if (!(dt >= 0.0)) fail(ErrorCode::InvalidArgument, "predict needs dt >= 0");
  FusionState next = state;
  next.heading = wrap360(state.heading + delta_heading);
  next.variance = state.variance + state.process_noise_rate * dt;
  return next;
}

FusionState correct(const FusionState& state, const HeadingEstimate& measurement) {
  if (!measurement.accepted) return state;
  FusionState next = state;
  const double innovation = wrap180(measurement.heading_degrees - state.heading);
  const double gain = state.variance / (state.variance + state.measurement_variance);
  next.heading = wrap360(state.heading + gain * innovation);
  next.variance = state.variance * (1.0 - gain);
  return next;
}

}  // namespace georeg

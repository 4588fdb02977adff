#pragma once

#include "georeg/sequencer.hpp"

namespace georeg {

/// Scalar heading filter: odometry deltas propagate the estimate, accepted
/// absolute headings correct it through the wrapped innovation.
struct FusionState {
  double heading = 0.0;                 // degrees, [0, 360)
  double variance = 25.0;               // degrees^2
  double process_noise_rate = 1.0;      // degrees^2 per second
  double measurement_variance = 4.0;    // degrees^2
};

void validate(const FusionState& state);

/// heading += delta (wrapped); variance += process_noise_rate * dt.
FusionState predict(const FusionState& state, double delta_heading, double dt);

/// Kalman update with gain var / (var + measurement_variance). Rejected
/// measurements return the state unchanged.
FusionState correct(const FusionState& state, const HeadingEstimate& measurement);

}  // namespace georeg

#pragma once

namespace dirand {

/// Optimal tomographic guessing probability for the pure state
/// cosθ|00> + sinθ|11> and the measurement direction α attaining it.
struct PureStateResult {
  double theta = 0.0;
  double alpha = 0.0;
  double guessing_probability = 0.25;
  double hmin = 2.0;
};

/// α ∈ [0, π/2] from sin α = (−cos2θ + √(cos²2θ + 4 sin2θ(1 + sin2θ))) / (2(1 + sin2θ)).
/// Requires θ ∈ [0, π/4].
double pure_state_alpha(double theta);

/// G = ¼(1 + sin2θ)cos²α at α = pure_state_alpha(θ).
PureStateResult pure_state_guessing(double theta);

}  // namespace dirand

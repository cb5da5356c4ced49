#include "dirand/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dirand/numerics.hpp"

namespace dirand {

namespace {

void check_theta(double theta) {
  if (!std::isfinite(theta) || theta < -1e-12 || theta > std::numbers::pi / 4 + 1e-12)
    throw InputError("theta must lie in [0, pi/4], got " + std::to_string(theta));
}

}  // namespace

double pure_state_alpha(double theta) {
  check_theta(theta);
  const double s = std::sin(2.0 * theta);
  const double c = std::cos(2.0 * theta);
  const double value = (-c + std::sqrt(c * c + 4.0 * s * (1.0 + s))) / (2.0 * (1.0 + s));
  if (value < -1e-12 || value > 1.0 + 1e-12)
    throw NumericalError("pure_state_alpha: sin(alpha) = " + std::to_string(value) + " outside [0, 1]");
  return std::asin(std::clamp(value, 0.0, 1.0));
}

PureStateResult pure_state_guessing(double theta) {
  PureStateResult r;
  r.theta = theta;
  r.alpha = pure_state_alpha(theta);
  const double c = std::cos(r.alpha);
  r.guessing_probability = 0.25 * (1.0 + std::sin(2.0 * theta)) * c * c;
  r.hmin = -std::log2(r.guessing_probability);
  return r;
}

}  // namespace dirand

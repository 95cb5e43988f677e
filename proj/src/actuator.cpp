#include "vibrobot/actuator.hpp"

#include <cmath>

namespace vibrobot {

namespace {
constexpr double kDeadZone = 0.2;
}

double motor_speed(double v) {
  // Both branches are evaluated in Horner form with mirrored signs, which makes
  // the map exactly odd in floating point.
  if (v >= kDeadZone)
    return ((((2.6 * v - 26.44) * v + 102.11) * v - 200.92) * v + 253.09) * v - 43.36;
  if (v <= -kDeadZone)
    return ((((2.6 * v + 26.44) * v + 102.11) * v + 200.92) * v + 253.09) * v + 43.36;
  return 0.0;
}

double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod of a tiny negative can round up to 2*pi
  return w;
}

RotorState rotor_step(const RotorState& rotor, double dt) {
  RotorState next = rotor;
  next.theta_e = wrap_phase(rotor.theta_e + rotor.omega_e * dt);
  next.theta_d = wrap_phase(rotor.theta_d + rotor.omega_d * dt);
  return next;
}

EccentricForce eccentric_force(double mass, double radius, double omega, double theta) {
  const double magnitude = mass * radius * omega * omega;
  return {magnitude * std::sin(theta), magnitude * std::cos(theta)};
}

}  // namespace vibrobot

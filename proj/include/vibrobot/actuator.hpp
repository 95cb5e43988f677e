#pragma once

#include <numbers>

namespace vibrobot {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Phases and speeds of the two eccentric rotors. Phases live in [0, 2*pi).
struct RotorState {
  double theta_e = 0.0;
  double theta_d = std::numbers::pi;
  double omega_e = 0.0;
  double omega_d = 0.0;

  bool operator==(const RotorState&) const = default;
};

/// Steady-state rotor speed (rad/s) for a terminal voltage. Quintic fit with a
/// +/-0.2 V dead zone; odd in V. The map jumps at |V| = 0.2 and is not smoothed.
double motor_speed(double volts);

/// Wraps an angle into [0, 2*pi).
double wrap_phase(double theta);

/// Advances both rotor phases by omega*dt. Speeds are left untouched.
RotorState rotor_step(const RotorState& rotor, double dt);

/// Centrifugal force of a spinning eccentric mass, before per-motor signs.
/// horizontal = m r w^2 sin(theta); vertical = m r w^2 cos(theta), positive pressing down.
struct EccentricForce {
  double horizontal = 0.0;
  double vertical = 0.0;
};

EccentricForce eccentric_force(double mass, double radius, double omega, double theta);

}  // namespace vibrobot

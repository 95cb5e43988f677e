#pragma once

#include <Eigen/Dense>

#include "vibrobot/actuator.hpp"
#include "vibrobot/contact.hpp"
#include "vibrobot/params.hpp"

namespace vibrobot {

/// Planar pose and velocity of the centre of mass plus rotor and contact state.
/// `phi` is unwrapped.
struct RobotState {
  double X = 0.0, Y = 0.0, phi = 0.0;
  double Xdot = 0.0, Ydot = 0.0, phidot = 0.0;
  RotorState rotor;
  ContactState contact = ContactState::sliding();
};

/// Continuous state vector layout used by the integrator.
using StateVector = Eigen::Matrix<double, 8, 1>;  // X Y phi Xdot Ydot phidot theta_e theta_d

struct StateDerivative {
  double Xdot = 0.0, Ydot = 0.0, phidot = 0.0;
  double Xddot = 0.0, Yddot = 0.0, phiddot = 0.0;
  double theta_e_dot = 0.0, theta_d_dot = 0.0;

  StateVector vector() const;
};

StateVector pack(const RobotState& s);
void unpack(const StateVector& v, RobotState& s);

/// Net motor force along body x and net motor yaw torque.
struct MotorLoads {
  double force_x = 0.0;
  double torque = 0.0;
  double vertical_e = 0.0;
  double vertical_d = 0.0;
};

MotorLoads motor_loads(const RobotParams& p, const RotorState& rotor);

/// Rigid-body equations of motion for the planar robot: body-frame forces are
/// rotated by phi for translation, and the yaw balance uses the leg moment arms
/// and the two motor offsets.
StateDerivative state_derivative(const RobotState& s, const LegLoads& loads, const RobotParams& p);

}  // namespace vibrobot

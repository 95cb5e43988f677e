#include "vibrobot/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace vibrobot {

StateVector StateDerivative::vector() const {
  StateVector v;
  v << Xdot, Ydot, phidot, Xddot, Yddot, phiddot, theta_e_dot, theta_d_dot;
  return v;
}

StateVector pack(const RobotState& s) {
  StateVector v;
  v << s.X, s.Y, s.phi, s.Xdot, s.Ydot, s.phidot, s.rotor.theta_e, s.rotor.theta_d;
  return v;
}

void unpack(const StateVector& v, RobotState& s) {
  s.X = v[0];
  s.Y = v[1];
  s.phi = v[2];
  s.Xdot = v[3];
  s.Ydot = v[4];
  s.phidot = v[5];
  s.rotor.theta_e = v[6];
  s.rotor.theta_d = v[7];
}

MotorLoads motor_loads(const RobotParams& p, const RotorState& rotor) {
  const EccentricForce fe = eccentric_force(p.m_e, p.r_e, rotor.omega_e, rotor.theta_e);
  const EccentricForce fd = eccentric_force(p.m_d, p.r_d, rotor.omega_d, rotor.theta_d);
  MotorLoads m;
  m.force_x = -fe.horizontal + fd.horizontal;
  m.torque = -p.d1 * fe.horizontal - p.d1 * fd.horizontal;
  m.vertical_e = -fe.vertical;
  m.vertical_d = fd.vertical;
  return m;
}

StateDerivative state_derivative(const RobotState& s, const LegLoads& loads, const RobotParams& p) {
  const MotorLoads motor = motor_loads(p, s.rotor);
  const auto& f = loads.tangential;
  const double fx = motor.force_x + f(0, 0) + f(1, 0) + f(2, 0);
  const double fy = f(0, 1) + f(1, 1) + f(2, 1);
  const double c = std::cos(s.phi);
  const double sn = std::sin(s.phi);

  const double arm = std::numbers::sqrt3 * p.l;
  const double leg_torque = arm / 6.0 * f(0, 1) - p.l / 2.0 * f(0, 0) - arm / 3.0 * f(1, 1) +
                            arm / 6.0 * f(2, 1) + p.l / 2.0 * f(2, 0);

  StateDerivative d;
  d.Xdot = s.Xdot;
  d.Ydot = s.Ydot;
  d.phidot = s.phidot;
  d.Xddot = (fx * c - fy * sn) / p.M;
  d.Yddot = (fx * sn + fy * c) / p.M;
  d.phiddot = (leg_torque + motor.torque) / p.I_zz;
  d.theta_e_dot = s.rotor.omega_e;
  d.theta_d_dot = s.rotor.omega_d;
  return d;
}

}  // namespace vibrobot

#include "vibrobot/sim.hpp"

#include <cmath>
#include <sstream>

namespace vibrobot {

RobotState initial_state(const RunConfig& cfg) {
  RobotState s;
  s.rotor.theta_e = wrap_phase(cfg.sim.theta_e0);
  s.rotor.theta_d = wrap_phase(cfg.sim.theta_d0);
  s.contact = ContactState::stuck(leg_positions(cfg.robot));
  return s;
}

void apply_command(RotorState& rotor, const MotorCommand& cmd) {
  if (cmd.mode == DriveMode::Speed) {
    rotor.omega_e = cmd.e;
    rotor.omega_d = cmd.d;
  } else {
    rotor.omega_e = motor_speed(cmd.e);
    rotor.omega_d = motor_speed(cmd.d);
  }
}

LegLoads contact_loads(const RobotState& s, const RobotParams& p) {
  const MotorLoads motor = motor_loads(p, s.rotor);
  LegLoads loads;
  loads.normal = normal_loads(p, motor.vertical_e, motor.vertical_d);
  const LegKinematics legs =
      leg_kinematics(p, {s.X, s.Y}, {s.Xdot, s.Ydot}, s.phi, s.phidot);
  loads.tangential = friction_forces(p, s.contact, legs, loads.normal, s.phi);
  return loads;
}

namespace {

StateVector derivative_at(const RobotState& base, const StateVector& v, const RobotParams& p) {
  RobotState s = base;
  unpack(v, s);
  return state_derivative(s, contact_loads(s, p), p).vector();
}

}  // namespace

RobotState step(const RobotState& s, const MotorCommand& cmd, const RobotParams& p, double dt,
                double eps_v, double t) {
  RobotState start = s;
  apply_command(start.rotor, cmd);

  const StateVector y0 = pack(start);
  const StateVector k1 = derivative_at(start, y0, p);
  const StateVector k2 = derivative_at(start, y0 + 0.5 * dt * k1, p);
  const StateVector k3 = derivative_at(start, y0 + 0.5 * dt * k2, p);
  const StateVector k4 = derivative_at(start, y0 + dt * k3, p);
  const StateVector y1 = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (!y1.allFinite()) {
    std::ostringstream msg;
    msg << "integration blowup at t = " << t;
    throw SimulationError(msg.str(), t);
  }

  RobotState next = start;
  unpack(y1, next);
  // Rotor phases have a constant rate; advance them exactly and wrap.
  next.rotor = rotor_step(start.rotor, dt);

  const Eigen::Vector2d v0(start.Xdot, start.Ydot);
  const Eigen::Vector2d v1(next.Xdot, next.Ydot);
  const LegKinematics legs = leg_kinematics(p, {next.X, next.Y}, v1, next.phi, next.phidot);
  const MotorLoads motor = motor_loads(p, next.rotor);

  ModeInputs in;
  in.com_speed = v1.norm();
  in.com_velocity_reversed = v0.squaredNorm() > 0.0 && v0.dot(v1) <= 0.0;
  in.normal = normal_loads(p, motor.vertical_e, motor.vertical_d);
  in.spring = spring_forces(p, next.contact, legs.position, next.phi);
  in.leg_world = legs.position;
  next.contact = update_mode(next.contact, in, p.mu, eps_v);
  return next;
}

double SimTrace::record_dt() const {
  return config.sim.record_full_rate ? config.sim.physics_dt : config.sim.control_dt;
}

TraceSample sample_of(const RobotState& s, const RobotParams& p, double t) {
  TraceSample r;
  r.t = t;
  r.X = s.X;
  r.Y = s.Y;
  r.phi = s.phi;
  r.x_body = s.X * std::cos(s.phi) + s.Y * std::sin(s.phi);
  r.omega_e = s.rotor.omega_e;
  r.omega_d = s.rotor.omega_d;
  r.theta_e = s.rotor.theta_e;
  r.theta_d = s.rotor.theta_d;
  const MotorLoads motor = motor_loads(p, s.rotor);
  const Eigen::Vector3d n = normal_loads(p, motor.vertical_e, motor.vertical_d);
  r.N_a = n[0];
  r.N_b = n[1];
  r.N_c = n[2];
  r.stuck = s.contact.is_stuck() ? 1 : 0;
  return r;
}

MotorCommand configured_drive(const SimConfig& c) {
  if (c.drive_mode == DriveMode::Speed) return MotorCommand::speeds(c.omega_e, c.omega_d);
  return MotorCommand::voltages(c.volt_e, c.volt_d);
}

SimTrace run_open_loop(const RunConfig& cfg, const MotorCommand& drive) {
  validate(cfg);
  const SimConfig& sc = cfg.sim;
  const int decimation = sc.record_full_rate ? 1 : sc.substeps();
  const double record_dt = decimation * sc.physics_dt;
  const long long records = std::llround(sc.duration / record_dt);

  SimTrace trace;
  trace.config = cfg;
  trace.samples.reserve(static_cast<std::size_t>(records) + 1);

  RobotState s = initial_state(cfg);
  apply_command(s.rotor, drive);
  const auto record = [&](double t) {
    TraceSample r = sample_of(s, cfg.robot, t);
    if (drive.mode == DriveMode::Voltage) {
      r.V_e = drive.e;
      r.V_d = drive.d;
    }
    trace.samples.push_back(r);
  };

  long long n = 0;
  record(0.0);
  for (long long rec = 1; rec <= records; ++rec) {
    for (int i = 0; i < decimation; ++i, ++n)
      s = step(s, drive, cfg.robot, sc.physics_dt, sc.eps_v, n * sc.physics_dt);
    record(rec * record_dt);
  }
  return trace;
}

}  // namespace vibrobot

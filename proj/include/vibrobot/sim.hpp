#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vibrobot/dynamics.hpp"
#include "vibrobot/params.hpp"

namespace vibrobot {

/// Motor command held over one physics step: fixed rotor speeds (rad/s) or
/// terminal voltages (V) mapped through the motor speed curve.
struct MotorCommand {
  DriveMode mode = DriveMode::Speed;
  double e = 0.0;
  double d = 0.0;

  static MotorCommand speeds(double omega_e, double omega_d) { return {DriveMode::Speed, omega_e, omega_d}; }
  static MotorCommand voltages(double v_e, double v_d) { return {DriveMode::Voltage, v_e, v_d}; }
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// Rest at the origin, stuck, anchors at the nominal leg positions.
RobotState initial_state(const RunConfig& cfg);

/// Sets rotor speeds from the command (voltage mode goes through motor_speed).
void apply_command(RotorState& rotor, const MotorCommand& cmd);

/// Normal loads and tangential leg forces at a state, for its current mode.
LegLoads contact_loads(const RobotState& s, const RobotParams& p);

/// One classic RK4 step with contact mode and anchors frozen, followed by a
/// single stick/slip update. Throws SimulationError if the state goes non-finite.
RobotState step(const RobotState& s, const MotorCommand& cmd, const RobotParams& p, double dt,
                double eps_v, double t = 0.0);

struct TraceSample {
  double t = 0.0;
  double X = 0.0, Y = 0.0, phi = 0.0;
  double x_body = 0.0;
  double V_e = 0.0, V_d = 0.0;
  double omega_e = 0.0, omega_d = 0.0;
  double theta_e = 0.0, theta_d = 0.0;
  double N_a = 0.0, N_b = 0.0, N_c = 0.0;
  int stuck = 0;
  std::array<double, 6> gains{};  // Kp_t Ki_t Kd_t Kp_r Ki_r Kd_r
  double e_t = 0.0, e_r = 0.0;

  bool operator==(const TraceSample&) const = default;
};

struct SimTrace {
  RunConfig config;
  std::vector<TraceSample> samples;

  double record_dt() const;
};

TraceSample sample_of(const RobotState& s, const RobotParams& p, double t);

/// Integrates from rest under a constant drive for cfg.sim.duration, recording
/// every control_dt (or every physics step with record_full_rate).
SimTrace run_open_loop(const RunConfig& cfg, const MotorCommand& drive);

/// Drive described by the config's drive_* keys.
MotorCommand configured_drive(const SimConfig& c);

}  // namespace vibrobot

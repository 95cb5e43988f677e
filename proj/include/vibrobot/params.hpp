#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vibrobot {

/// Physical constants of the three-legged robot and its two vibration motors.
/// SI units throughout. Defaults are the published prototype values.
struct RobotParams {
  double M = 7.2e-3;         // total mass, kg
  double m_e = 9e-4;         // eccentric mass of motor e, kg
  double m_d = 9e-4;         // eccentric mass of motor d, kg
  double r_e = 1.061e-3;     // eccentric radius of motor e, m
  double r_d = 1.061e-3;     // eccentric radius of motor d, m
  double I_zz = 9.2e-7;      // yaw inertia, kg m^2
  double l = 0.04;           // leg triangle side, m
  double d1 = 0.01;          // motor mount offset from the centre, m
  double h = 5.7e-3;         // body height, m (not used by the planar model)
  double k = 72509.185;      // leg spring stiffness, N/m
  double mu = 0.36;          // Coulomb friction coefficient
  double g = 9.807;          // gravity, m/s^2
  double R_motor = 11.2;     // motor resistance, ohm (not used)
  double L_motor = 0.102e-3; // motor inductance, H (not used)
  /// Leg speed below which kinetic friction scales linearly with speed, m/s.
  double friction_v_reg = 1e-3;

  bool operator==(const RobotParams&) const = default;
};

enum class DriveMode { Speed, Voltage };

/// Numerical and controller settings for a run.
struct SimConfig {
  double physics_dt = 1e-5;
  double control_dt = 1e-3;
  double duration = 2.0;
  std::uint64_t seed = 1;
  bool record_full_rate = false;

  double theta_e0 = 0.0;
  double theta_d0 = std::numbers::pi;
  double eps_v = 1e-6;

  // open-loop drive
  DriveMode drive_mode = DriveMode::Speed;
  double omega_e = 455.6;
  double omega_d = 455.6;
  double volt_e = 0.0;
  double volt_d = 0.0;

  // closed-loop references
  double x_ref = 0.02;
  double phi_ref = 0.0;

  // gain tuner
  int tuner_hidden = 8;
  double tuner_eta = 0.01;
  std::array<double, 3> gain_max{500.0, 200.0, 50.0};          // translation Kp, Ki, Kd
  std::array<double, 3> gain_max_rotation{30.0, 10.0, 3.0};    // rotation Kp, Ki, Kd
  bool paper_literal_gradient = false;
  bool paper_literal_gains = false;
  bool tuner_normalized_loss = true;  // tuner loss on e / span
  bool jacobian_guard = true;
  double jacobian_min = 1e-3;

  // plant identifier
  int identifier_hidden = 8;
  double identifier_eta = 0.01;
  int identifier_input_lags = 2;
  int identifier_output_lags = 2;
  double identifier_span_x = 0.0;    // 0 selects |x_ref| (or 0.02 m when zero)
  double identifier_span_phi = 0.0;  // 0 selects |phi_ref| (or 0.2 rad when zero)

  double v_max = 3.0;

  bool operator==(const SimConfig&) const = default;

  /// Number of physics steps per control tick.
  int substeps() const;
};

struct RunConfig {
  SimConfig sim;
  RobotParams robot;

  bool operator==(const RunConfig&) const = default;
};

/// Raised for unreadable, malformed or physically invalid configuration.
/// `key()` is empty for file-level failures; `line()` is 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in);
void save_config(std::ostream& out, const RunConfig& cfg);
std::string config_to_string(const RunConfig& cfg);

/// Applies a single `key = value` assignment. Throws ConfigError naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      int line = 0);

/// Checks every invariant; throws ConfigError naming the first offending key.
void validate(const RunConfig& cfg);

/// Leg contact points a, b, c in the body frame. Rows are legs, columns x/y.
Eigen::Matrix<double, 3, 2> leg_positions(const RobotParams& p);

/// Motor mount points in the body frame: motor e at (0, -d1), motor d at (0, +d1).
Eigen::Vector2d motor_e_mount(const RobotParams& p);
Eigen::Vector2d motor_d_mount(const RobotParams& p);

/// Fills per-run defaults that depend on the references (identifier spans).
double identifier_span_x(const SimConfig& c);
double identifier_span_phi(const SimConfig& c);

}  // namespace vibrobot

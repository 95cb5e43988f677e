#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "vibrobot/dynamics.hpp"
#include "vibrobot/identifier.hpp"
#include "vibrobot/mlp.hpp"
#include "vibrobot/params.hpp"

namespace vibrobot {

using Gains = Eigen::Vector3d;        // Kp, Ki, Kd
using ErrorTrio = Eigen::Vector3d;    // proportional, integral, derivative

/// Displacement along the robot's heading: X cos(phi) + Y sin(phi).
double body_displacement(double X, double Y, double phi);

struct ChannelErrors {
  double translation = 0.0;  // e_t = x_d - x
  double rotation = 0.0;     // e_r = phi_d - phi
};

ChannelErrors channel_errors(const RobotState& s, double x_ref, double phi_ref);

/// u = Kp e_p + Ki e_i + Kd e_d.
double pid_output(const Gains& gains, const ErrorTrio& errors);

class ControllerDivergence : public std::runtime_error {
 public:
  ControllerDivergence(const std::string& what, long long tick)
      : std::runtime_error(what), tick_(tick) {}
  long long tick() const { return tick_; }

 private:
  long long tick_;
};

struct ChannelOptions {
  Gains gain_max{500.0, 200.0, 50.0};
  double dt = 1e-3;
  bool paper_literal_gradient = false;
  bool paper_literal_gains = false;
  bool jacobian_guard = true;
  double jacobian_min = 1e-3;
  /// Tuner loss is (e / error_scale)^2 / 2; the plant Jacobian is taken in the
  /// same scaled output units. 1 gives the raw loss.
  double error_scale = 1.0;
};

struct ChannelStep {
  ErrorTrio errors = ErrorTrio::Zero();
  Gains gains = Gains::Zero();
  double command = 0.0;
  double jacobian = 0.0;        // scaled J_m handed to the tuner (after the optional guard)
  double identifier_error = 0.0;
};

/// One adaptive PID loop: a 3-3 gain-tuning network plus a NARX identifier
/// trained on the channel's own (command, output) stream.
class PidChannel {
 public:
  PidChannel(Mlp<double> tuner, Identifier<double> identifier, const ChannelOptions& options);

  /// Advances the channel by one control tick. `measured` is the plant output
  /// observed this tick, `freeze_integral` holds e_int (anti-windup).
  ChannelStep step(double reference, double measured, bool freeze_integral);

  /// Gains as published to the PID law for raw network outputs.
  Gains gains_from_outputs(const Eigen::VectorXd& outputs) const;
  /// d u / d o_j for the current error trio.
  Eigen::VectorXd control_sensitivity(const ErrorTrio& errors) const;

  const Mlp<double>& tuner() const { return tuner_; }
  const Identifier<double>& identifier() const { return identifier_; }
  double integral() const { return e_int_; }
  const ChannelOptions& options() const { return options_; }

 private:
  Mlp<double> tuner_;
  Identifier<double> identifier_;
  ChannelOptions options_;
  double e_prev_ = 0.0;
  double e_int_ = 0.0;
  bool started_ = false;
};

struct ControlOutput {
  double V_e = 0.0, V_d = 0.0;
  double u_t = 0.0, u_r = 0.0;
  Gains gains_t = Gains::Zero();
  Gains gains_r = Gains::Zero();
  double e_t = 0.0, e_r = 0.0;
  bool clipped = false;
};

/// Common/differential voltage mix, each motor clamped to +/-v_max.
/// V_e = u_t - u_r, V_d = u_t + u_r.
std::pair<double, double> mix_voltages(double u_t, double u_r, double v_max, bool* clipped = nullptr);

/// Translation and rotation channels driving the two motors.
class Controller {
 public:
  explicit Controller(const RunConfig& cfg);

  ControlOutput step(const RobotState& s);

  const PidChannel& translation() const { return translation_; }
  const PidChannel& rotation() const { return rotation_; }
  long long ticks() const { return tick_; }

 private:
  PidChannel translation_;
  PidChannel rotation_;
  double x_ref_, phi_ref_, v_max_;
  bool clipped_last_ = false;
  long long tick_ = 0;
};

}  // namespace vibrobot

#include "vibrobot/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vibrobot {

double body_displacement(double X, double Y, double phi) {
  return X * std::cos(phi) + Y * std::sin(phi);
}

ChannelErrors channel_errors(const RobotState& s, double x_ref, double phi_ref) {
  return {x_ref - body_displacement(s.X, s.Y, s.phi), phi_ref - s.phi};
}

double pid_output(const Gains& gains, const ErrorTrio& errors) { return gains.dot(errors); }

PidChannel::PidChannel(Mlp<double> tuner, Identifier<double> identifier,
                       const ChannelOptions& options)
    : tuner_(std::move(tuner)), identifier_(std::move(identifier)), options_(options) {
  if (tuner_.inputs() != 3 || tuner_.outputs() != 3)
    throw std::invalid_argument("PidChannel: tuner must map 3 errors to 3 gains");
}

Gains PidChannel::gains_from_outputs(const Eigen::VectorXd& o) const {
  if (options_.paper_literal_gains) return options_.gain_max.cwiseProduct(o);
  return options_.gain_max.cwiseProduct((Gains::Ones() + o) / 2.0);
}

Eigen::VectorXd PidChannel::control_sensitivity(const ErrorTrio& errors) const {
  if (options_.paper_literal_gradient) return Eigen::VectorXd::Ones(3);
  const Gains slope = options_.paper_literal_gains ? options_.gain_max : Gains(options_.gain_max / 2.0);
  return errors.cwiseProduct(slope);
}

ChannelStep PidChannel::step(double reference, double measured, bool freeze_integral) {
  const double dt = options_.dt;
  const double e = reference - measured;
  if (!started_) {
    e_prev_ = e;  // no derivative kick on the first tick
    started_ = true;
  }
  if (!freeze_integral) e_int_ += e * dt;

  ChannelStep out;
  out.errors = ErrorTrio(e, e_int_, (e - e_prev_) / dt);
  e_prev_ = e;

  identifier_.predict();
  out.identifier_error = identifier_.train_step(measured);
  const double scale = options_.error_scale;
  double J = identifier_.jacobian() / scale;
  if (options_.jacobian_guard && std::abs(J) < options_.jacobian_min)
    J = (J < 0.0 ? -1.0 : 1.0) * options_.jacobian_min;
  out.jacobian = J;

  const Eigen::VectorXd o = tuner_.forward(out.errors);
  out.gains = gains_from_outputs(o);
  out.command = pid_output(out.gains, out.errors);
  tuner_.backward(e / scale, J, control_sensitivity(out.errors));

  identifier_.push_input(out.command);
  return out;
}

std::pair<double, double> mix_voltages(double u_t, double u_r, double v_max, bool* clipped) {
  const double raw_e = u_t - u_r;
  const double raw_d = u_t + u_r;
  const double v_e = std::clamp(raw_e, -v_max, v_max);
  const double v_d = std::clamp(raw_d, -v_max, v_max);
  if (clipped) *clipped = v_e != raw_e || v_d != raw_d;
  return {v_e, v_d};
}

namespace {

PidChannel make_channel(const RunConfig& cfg, std::mt19937_64& rng, double span,
                        const std::array<double, 3>& bounds) {
  const SimConfig& s = cfg.sim;
  Mlp<double> tuner(3, s.tuner_hidden, 3, OutputActivation::Bipolar, s.tuner_eta);
  tuner.randomize(rng);
  Identifier<double> id(s.identifier_input_lags, s.identifier_output_lags, s.identifier_hidden,
                        s.identifier_eta, s.v_max, span);
  id.randomize(rng);
  ChannelOptions opt;
  opt.gain_max = Gains(bounds[0], bounds[1], bounds[2]);
  opt.dt = s.control_dt;
  opt.paper_literal_gradient = s.paper_literal_gradient;
  opt.paper_literal_gains = s.paper_literal_gains;
  opt.jacobian_guard = s.jacobian_guard && !s.paper_literal_gradient;
  opt.jacobian_min = s.jacobian_min;
  opt.error_scale = s.tuner_normalized_loss ? span : 1.0;
  return PidChannel(std::move(tuner), std::move(id), opt);
}

}  // namespace

Controller::Controller(const RunConfig& cfg)
    : translation_([&] {
        std::mt19937_64 rng(cfg.sim.seed);
        return make_channel(cfg, rng, identifier_span_x(cfg.sim), cfg.sim.gain_max);
      }()),
      rotation_([&] {
        // Separate stream for the rotation channel, derived from the same seed.
        std::mt19937_64 rng(cfg.sim.seed ^ 0x9e3779b97f4a7c15ULL);
        return make_channel(cfg, rng, identifier_span_phi(cfg.sim), cfg.sim.gain_max_rotation);
      }()),
      x_ref_(cfg.sim.x_ref),
      phi_ref_(cfg.sim.phi_ref),
      v_max_(cfg.sim.v_max) {}

ControlOutput Controller::step(const RobotState& s) {
  const double x = body_displacement(s.X, s.Y, s.phi);
  const ChannelStep t = translation_.step(x_ref_, x, clipped_last_);
  const ChannelStep r = rotation_.step(phi_ref_, s.phi, clipped_last_);

  ControlOutput out;
  out.u_t = t.command;
  out.u_r = r.command;
  out.gains_t = t.gains;
  out.gains_r = r.gains;
  out.e_t = t.errors[0];
  out.e_r = r.errors[0];
  std::tie(out.V_e, out.V_d) = mix_voltages(out.u_t, out.u_r, v_max_, &out.clipped);

  const bool finite = std::isfinite(out.V_e) && std::isfinite(out.V_d) &&
                      out.gains_t.allFinite() && out.gains_r.allFinite();
  if (!finite) {
    std::ostringstream msg;
    msg << "controller diverged at tick " << tick_ << " (gains t = " << out.gains_t.transpose()
        << ", r = " << out.gains_r.transpose() << ")";
    throw ControllerDivergence(msg.str(), tick_);
  }
  clipped_last_ = out.clipped;
  ++tick_;
  return out;
}

}  // namespace vibrobot

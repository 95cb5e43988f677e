#pragma once

#include <deque>
#include <stdexcept>

#include "vibrobot/mlp.hpp"

namespace vibrobot {

/// Online series-parallel NARX plant model:
///   y_hat(k) = N([u(k-1) .. u(k-nu), y(k-1) .. y(k-ny)])
/// with a bipolar hidden layer and a linear output. Inputs are divided by
/// `u_scale`, outputs by `y_scale`. The history starts zero-filled.
template <typename Scalar>
class Identifier {
 public:
  using Vector = typename Mlp<Scalar>::Vector;

  Identifier() = default;

  Identifier(int input_lags, int output_lags, int hidden, Scalar eta, Scalar u_scale,
             Scalar y_scale)
      : net_(input_lags + output_lags, hidden, 1, OutputActivation::Linear, eta),
        u_hist_(static_cast<std::size_t>(input_lags), Scalar(0)),
        y_hist_(static_cast<std::size_t>(output_lags), Scalar(0)),
        u_scale_(u_scale),
        y_scale_(y_scale) {
    if (input_lags <= 0) throw std::invalid_argument("Identifier: need at least one input lag");
    if (output_lags < 0) throw std::invalid_argument("Identifier: negative output lag count");
    if (!(u_scale > Scalar(0)) || !(y_scale > Scalar(0)))
      throw std::invalid_argument("Identifier: scale factors must be positive");
  }

  template <typename Rng>
  void randomize(Rng& rng, Scalar range = Scalar(0.5)) {
    net_.randomize(rng, range);
  }

  Mlp<Scalar>& net() { return net_; }
  const Mlp<Scalar>& net() const { return net_; }
  Scalar u_scale() const { return u_scale_; }
  Scalar y_scale() const { return y_scale_; }

  /// Scaled regressor vector built from past samples only.
  Vector regressors() const {
    Vector x(static_cast<Eigen::Index>(u_hist_.size() + y_hist_.size()));
    Eigen::Index i = 0;
    for (Scalar u : u_hist_) x[i++] = u / u_scale_;
    for (Scalar y : y_hist_) x[i++] = y / y_scale_;
    return x;
  }

  /// Prediction of the next plant output from the stored history.
  Scalar predict() {
    prediction_ = net_.forward(regressors())[0] * y_scale_;
    predicted_ = true;
    return prediction_;
  }

  /// One SGD step on (y - y_hat)^2 / 2 in scaled units, then pushes `y_actual`
  /// into the output history. Returns the prediction error y - y_hat.
  Scalar train_step(Scalar y_actual) {
    if (!predicted_) throw std::logic_error("Identifier::train_step called before predict");
    const Scalar error = y_actual - prediction_;
    Vector g(1);
    g[0] = -error / y_scale_;
    net_.descend(g);
    predicted_ = false;
    push_output(y_actual);
    return error;
  }

  /// Records the control applied after the last observation.
  void push_input(Scalar u) {
    if (u_hist_.empty()) return;
    u_hist_.pop_back();
    u_hist_.push_front(u);
  }

  void push_output(Scalar y) {
    if (y_hist_.empty()) return;
    y_hist_.pop_back();
    y_hist_.push_front(y);
  }

  /// d y_hat / d u(k-1) at the last forward pass, in plant units.
  Scalar jacobian() const {
    return net_.input_jacobian()(0, 0) * y_scale_ / u_scale_;
  }

  const std::deque<Scalar>& input_history() const { return u_hist_; }
  const std::deque<Scalar>& output_history() const { return y_hist_; }

 private:
  Mlp<Scalar> net_;
  std::deque<Scalar> u_hist_, y_hist_;  // newest first
  Scalar u_scale_ = Scalar(1);
  Scalar y_scale_ = Scalar(1);
  Scalar prediction_ = Scalar(0);
  bool predicted_ = false;
};

}  // namespace vibrobot

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vibrobot {

/// Bipolar sigmoid (1 - e^-x) / (1 + e^-x), i.e. tanh(x/2).
template <typename Scalar>
Scalar bipolar_sigmoid(Scalar x) {
  using std::tanh;
  return tanh(x / Scalar(2));
}

/// Derivative of the bipolar sigmoid expressed through its value: (1 - f^2) / 2.
template <typename Scalar>
Scalar bipolar_sigmoid_derivative_from_value(Scalar f) {
  return (Scalar(1) - f * f) / Scalar(2);
}

enum class OutputActivation { Bipolar, Linear };

/// Two-layer perceptron with a bipolar-sigmoid hidden layer. Biases are carried
/// as an extra constant-1 row in both weight matrices:
///   net1 = W1^T [u; 1],  o0 = f(net1),  net2 = W2^T [o0; 1],  o1 = f2(net2).
/// W1 is (inputs + 1) x hidden, W2 is (hidden + 1) x outputs.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mlp() = default;

  Mlp(int inputs, int hidden, int outputs, OutputActivation out, Scalar eta)
      : W1_(Matrix::Zero(inputs + 1, hidden)),
        W2_(Matrix::Zero(hidden + 1, outputs)),
        out_(out),
        eta_(eta) {
    if (inputs <= 0 || hidden <= 0 || outputs <= 0)
      throw std::invalid_argument("Mlp: layer sizes must be positive");
  }

  /// Uniform weights on [-range, range].
  template <typename Rng>
  void randomize(Rng& rng, Scalar range = Scalar(0.5)) {
    std::uniform_real_distribution<double> dist(-double(range), double(range));
    for (Eigen::Index j = 0; j < W1_.cols(); ++j)
      for (Eigen::Index i = 0; i < W1_.rows(); ++i) W1_(i, j) = Scalar(dist(rng));
    for (Eigen::Index j = 0; j < W2_.cols(); ++j)
      for (Eigen::Index i = 0; i < W2_.rows(); ++i) W2_(i, j) = Scalar(dist(rng));
  }

  int inputs() const { return int(W1_.rows()) - 1; }
  int hidden() const { return int(W1_.cols()); }
  int outputs() const { return int(W2_.cols()); }
  OutputActivation output_activation() const { return out_; }
  Scalar eta() const { return eta_; }
  void set_eta(Scalar eta) { eta_ = eta; }

  const Matrix& W1() const { return W1_; }
  const Matrix& W2() const { return W2_; }
  Matrix& W1() { return W1_; }
  Matrix& W2() { return W2_; }

  bool has_cache() const { return cached_; }
  const Vector& net1() const { return net1_; }
  const Vector& hidden_output() const { return o0_; }
  const Vector& net2() const { return net2_; }
  const Vector& output() const { return o1_; }

  const Vector& forward(const Vector& input) {
    if (input.size() != inputs())
      throw std::invalid_argument("Mlp::forward: expected " + std::to_string(inputs()) +
                                  " inputs, got " + std::to_string(input.size()));
    u_.resize(input.size() + 1);
    u_ << input, Scalar(1);
    net1_ = W1_.transpose() * u_;
    o0_ = net1_.unaryExpr([](Scalar x) { return bipolar_sigmoid(x); });
    h_.resize(o0_.size() + 1);
    h_ << o0_, Scalar(1);
    net2_ = W2_.transpose() * h_;
    if (out_ == OutputActivation::Bipolar)
      o1_ = net2_.unaryExpr([](Scalar x) { return bipolar_sigmoid(x); });
    else
      o1_ = net2_;
    cached_ = true;
    return o1_;
  }

  /// d(output)/d(net2), elementwise, at the cached pass.
  Vector output_slope() const {
    require_cache("output_slope");
    if (out_ == OutputActivation::Linear) return Vector::Ones(o1_.size());
    return o1_.unaryExpr([](Scalar f) { return bipolar_sigmoid_derivative_from_value(f); });
  }

  struct Gradient {
    Matrix W1;
    Matrix W2;
  };

  /// Gradient of a scalar loss given dLoss/d(output) at the cached pass.
  Gradient loss_gradient(const Vector& dloss_doutput) const {
    require_cache("loss_gradient");
    if (dloss_doutput.size() != outputs())
      throw std::invalid_argument("Mlp::loss_gradient: output gradient size mismatch");
    const Vector delta2 = dloss_doutput.cwiseProduct(output_slope());
    const Vector hidden_slope =
        o0_.unaryExpr([](Scalar f) { return bipolar_sigmoid_derivative_from_value(f); });
    // Bias row of W2 does not feed back into the hidden layer.
    const Vector delta1 = (W2_.topRows(hidden()) * delta2).cwiseProduct(hidden_slope);
    return {u_ * delta1.transpose(), h_ * delta2.transpose()};
  }

  /// Plain gradient-descent step on a loss with the given output gradient.
  void descend(const Vector& dloss_doutput) {
    const Gradient g = loss_gradient(dloss_doutput);
    W2_ -= eta_ * g.W2;
    W1_ -= eta_ * g.W1;
  }

  /// Tuning-network update for E = e_c^2 / 2 where the plant output depends on the
  /// network through the control: dE/do1_j = -e_c * J_p * du/do1_j.
  void backward(Scalar e_c, Scalar plant_jacobian, const Vector& du_doutput) {
    descend(-(e_c * plant_jacobian) * du_doutput);
  }

  /// d(output_j)/d(input_i) at the cached pass; rows are outputs.
  Matrix input_jacobian() const {
    require_cache("input_jacobian");
    const Vector hidden_slope =
        o0_.unaryExpr([](Scalar f) { return bipolar_sigmoid_derivative_from_value(f); });
    const Matrix through_hidden = W1_.topRows(inputs()) * hidden_slope.asDiagonal();
    return output_slope().asDiagonal() * (W2_.topRows(hidden()).transpose() * through_hidden.transpose());
  }

  /// Flat text snapshot: header line then W1 and W2 row by row.
  void save(std::ostream& out) const {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "mlp " << inputs() << ' ' << hidden() << ' ' << outputs() << ' '
        << (out_ == OutputActivation::Bipolar ? "bipolar" : "linear") << ' ' << double(eta_)
        << '\n';
    const auto dump = [&out](const Matrix& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << double(m(i, j));
        out << '\n';
      }
    };
    dump(W1_);
    dump(W2_);
    out.precision(old_precision);
  }

  static Mlp load(std::istream& in) {
    std::string tag, activation;
    int ni = 0, nh = 0, no = 0;
    double eta = 0.0;
    if (!(in >> tag >> ni >> nh >> no >> activation >> eta) || tag != "mlp")
      throw std::runtime_error("Mlp::load: bad snapshot header");
    if (activation != "bipolar" && activation != "linear")
      throw std::runtime_error("Mlp::load: unknown activation '" + activation + "'");
    Mlp net(ni, nh, no,
            activation == "bipolar" ? OutputActivation::Bipolar : OutputActivation::Linear,
            Scalar(eta));
    const auto read = [&in](Matrix& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          double v = 0.0;
          if (!(in >> v)) throw std::runtime_error("Mlp::load: truncated weights");
          m(i, j) = Scalar(v);
        }
    };
    read(net.W1_);
    read(net.W2_);
    return net;
  }

 private:
  void require_cache(const char* what) const {
    if (!cached_) throw std::logic_error(std::string("Mlp::") + what + " called before forward");
  }

  Matrix W1_, W2_;
  OutputActivation out_ = OutputActivation::Bipolar;
  Scalar eta_ = Scalar(0.01);

  bool cached_ = false;
  Vector u_, net1_, o0_, h_, net2_, o1_;
};

}  // namespace vibrobot

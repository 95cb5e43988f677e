#include "vibrobot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vibrobot/identifier.hpp"
#include "vibrobot/mlp.hpp"

namespace vibrobot {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Surrogate {
  Vec input;
  Vec sensitivity;  // du/do
  double u0 = 0.0, J = 0.0, y_d = 0.0;

  double loss(Mlp<double>& net) const {
    const Vec& o = net.forward(input);
    const double y = J * (u0 + sensitivity.dot(o));
    return 0.5 * (y_d - y) * (y_d - y);
  }
};

double max_rel(const Mat& analytic, const Mat& numeric, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic(i), n = numeric(i);
    const double scale = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / scale);
  }
  return worst;
}

}  // namespace

double tuner_gradient_check(std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mlp<double> net(3, 8, 3, OutputActivation::Bipolar, 0.01);
  net.randomize(rng);

  Surrogate s;
  s.input = Vec::NullaryExpr(3, [&] { return dist(rng); });
  s.sensitivity = Vec::NullaryExpr(3, [&] { return dist(rng); });
  s.u0 = dist(rng);
  s.J = dist(rng);
  s.y_d = 2.0 * dist(rng);

  const Vec& o = net.forward(s.input);
  const double e_c = s.y_d - s.J * (s.u0 + s.sensitivity.dot(o));
  const auto grad = net.loss_gradient(-(e_c * s.J) * s.sensitivity);

  const auto numeric = [&](Mat& W) {
    Mat g(W.rows(), W.cols());
    for (Eigen::Index i = 0; i < W.size(); ++i) {
      const double w = W(i);
      W(i) = w + step;
      const double up = s.loss(net);
      W(i) = w - step;
      const double down = s.loss(net);
      W(i) = w;
      g(i) = (up - down) / (2.0 * step);
    }
    return g;
  };
  const Mat n1 = numeric(net.W1());
  const Mat n2 = numeric(net.W2());
  const double floor = 1e-6 * std::max(grad.W1.cwiseAbs().maxCoeff(), grad.W2.cwiseAbs().maxCoeff());
  return std::max(max_rel(grad.W1, n1, floor), max_rel(grad.W2, n2, floor));
}

double identifier_jacobian_check(std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double u_scale = 3.0, y_scale = 0.02;
  Identifier<double> base(2, 2, 8, 0.01, u_scale, y_scale);
  base.randomize(rng, 1.0);
  for (int k = 0; k < 3; ++k) {
    base.push_output(y_scale * dist(rng));
    base.push_input(u_scale * dist(rng));
  }
  base.push_output(y_scale * dist(rng));
  const double u = u_scale * dist(rng);

  Identifier<double> mid = base, up = base, down = base;
  mid.push_input(u);
  up.push_input(u + step);
  down.push_input(u - step);
  mid.predict();
  const double analytic = mid.jacobian();
  const double numeric = (up.predict() - down.predict()) / (2.0 * step);
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-300});
}

IdentDemoResult identifier_linear_demo(std::uint64_t seed, int steps, double eta, double gain,
                                       int hidden, int window) {
  std::mt19937_64 rng(seed);
  Identifier<double> id(2, 2, hidden, eta, 1.0, 1.0);
  id.randomize(rng);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double u_prev = 0.0, err2 = 0.0, power = 0.0;
  for (int k = 0; k < steps; ++k) {
    id.predict();
    const double y = gain * u_prev;
    const double e = id.train_step(y);
    if (k >= steps - window) {
      err2 += e * e;
      power += y * y;
    }
    u_prev = dist(rng);
    id.push_input(u_prev);
  }
  id.predict();
  IdentDemoResult r;
  r.jacobian = id.jacobian();
  r.mse_ratio = power > 0.0 ? err2 / power : 0.0;
  return r;
}

}  // namespace vibrobot

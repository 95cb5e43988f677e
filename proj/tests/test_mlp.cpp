#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "vibrobot/mlp.hpp"

using namespace vibrobot;
using Net = Mlp<double>;
using Vec = Net::Vector;

namespace {

// Plain loops, exp-based activation.
std::vector<double> oracle_forward(const Net& net, const std::vector<double>& in) {
  const auto f = [](double x) { return (1.0 - std::exp(-x)) / (1.0 + std::exp(-x)); };
  const int ni = net.inputs(), nh = net.hidden(), no = net.outputs();
  std::vector<double> hidden(nh);
  for (int j = 0; j < nh; ++j) {
    double s = net.W1()(ni, j);
    for (int i = 0; i < ni; ++i) s += net.W1()(i, j) * in[i];
    hidden[j] = f(s);
  }
  std::vector<double> out(no);
  for (int k = 0; k < no; ++k) {
    double s = net.W2()(nh, k);
    for (int j = 0; j < nh; ++j) s += net.W2()(j, k) * hidden[j];
    out[k] = net.output_activation() == OutputActivation::Bipolar ? f(s) : s;
  }
  return out;
}

Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Frozen surrogate plant: y = J * (u0 + s . o(w)); E = (y_d - y)^2 / 2.
struct Surrogate {
  double J, u0, y_d;
  Vec s;
  double loss(Net& net, const Vec& in) const {
    const double y = J * (u0 + s.dot(net.forward(in)));
    return 0.5 * (y_d - y) * (y_d - y);
  }
  double error(Net& net, const Vec& in) const { return y_d - J * (u0 + s.dot(net.forward(in))); }
};

}  // namespace

TEST_CASE("activation") {
  CHECK(bipolar_sigmoid(0.0) == 0.0);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> x(-20.0, 20.0);
  for (int i = 0; i < 500; ++i) {
    const double v = x(rng);
    CHECK(bipolar_sigmoid(-v) == -bipolar_sigmoid(v));
    CHECK(std::abs(bipolar_sigmoid(v)) < 1.0);
    CHECK(bipolar_sigmoid(v) == doctest::Approx((1 - std::exp(-v)) / (1 + std::exp(-v))).epsilon(1e-12));
    if (std::abs(v) < 8) {
      const double h = 1e-5;
      const double fd = (bipolar_sigmoid(v + h) - bipolar_sigmoid(v - h)) / (2 * h);
      CHECK(std::abs(bipolar_sigmoid_derivative_from_value(bipolar_sigmoid(v)) - fd) <= 1e-8);
    }
  }
}

TEST_CASE("zero networks output zero") {
  Net net(3, 5, 2, OutputActivation::Bipolar, 0.01);
  CHECK(net.forward(Vec::Constant(3, 7.0)).isZero(0.0));

  std::mt19937_64 rng(43);
  net.randomize(rng);
  net.W1().setZero();
  // Hidden layer is f(0) = 0, so only the output bias survives.
  net.W2().row(net.hidden()).setZero();
  CHECK(net.forward(Vec::Zero(3)).isZero(0.0));
}

TEST_CASE("forward agrees with a loop oracle") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const OutputActivation act = trial % 2 ? OutputActivation::Linear : OutputActivation::Bipolar;
    Net net(4, 7, 3, act, 0.01);
    net.randomize(rng);
    const Vec in = random_vec(rng, 4, 2.0);
    const Vec out = net.forward(in);
    const std::vector<double> ref = oracle_forward(net, {in.data(), in.data() + in.size()});
    for (int k = 0; k < 3; ++k) CHECK(std::abs(out[k] - ref[k]) <= 1e-12);
    if (act == OutputActivation::Bipolar) CHECK(out.cwiseAbs().maxCoeff() < 1.0);
    CHECK(net.hidden_output().cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("forward rejects wrong input size") {
  Net net(3, 4, 3, OutputActivation::Bipolar, 0.01);
  CHECK_THROWS_AS(net.forward(Vec::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(Net(0, 4, 3, OutputActivation::Bipolar, 0.01), std::invalid_argument);
}

TEST_CASE("backward before forward") {
  Net net(3, 4, 3, OutputActivation::Bipolar, 0.01);
  CHECK_THROWS_AS(net.backward(1.0, 1.0, Vec::Ones(3)), std::logic_error);
  CHECK_THROWS_AS(net.input_jacobian(), std::logic_error);
}

TEST_CASE("weight gradient matches finite differences of the surrogate loss") {
  std::mt19937_64 rng(53);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Net net(3, 8, 3, OutputActivation::Bipolar, 0.01);
    net.randomize(rng);
    const Vec in = random_vec(rng, 3);
    const Surrogate plant{random_vec(rng, 1)[0], random_vec(rng, 1)[0], random_vec(rng, 1)[0],
                          random_vec(rng, 3)};

    const double e = plant.error(net, in);
    // Analytic gradient, read back from one descent step with eta = 1.
    Net probe = net;
    probe.set_eta(1.0);
    probe.forward(in);
    probe.backward(e, plant.J, plant.s);
    const Net::Matrix g1 = net.W1() - probe.W1();
    const Net::Matrix g2 = net.W2() - probe.W2();

    const double h = 1e-6;
    const auto fd = [&](Net::Matrix& w, int i, int j) {
      const double keep = w(i, j);
      w(i, j) = keep + h;
      const double up = plant.loss(net, in);
      w(i, j) = keep - h;
      const double down = plant.loss(net, in);
      w(i, j) = keep;
      return (up - down) / (2 * h);
    };
    const double floor = 1e-6 * std::max(g1.cwiseAbs().maxCoeff(), g2.cwiseAbs().maxCoeff());
    const auto compare = [&](Net::Matrix& w, const Net::Matrix& g) {
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) {
          const double numeric = fd(w, i, j);
          worst = std::max(worst, std::abs(g(i, j) - numeric) / std::max(std::abs(numeric), floor));
        }
    };
    compare(net.W1(), g1);
    compare(net.W2(), g2);
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("zero error or zero Jacobian leaves the weights") {
  std::mt19937_64 rng(59);
  Net net(3, 6, 3, OutputActivation::Bipolar, 0.5);
  net.randomize(rng);
  const Net before = net;
  net.forward(random_vec(rng, 3));
  net.backward(0.0, 2.0, random_vec(rng, 3));
  CHECK(net.W1() == before.W1());
  CHECK(net.W2() == before.W2());
  net.backward(0.3, 0.0, random_vec(rng, 3));
  CHECK(net.W1() == before.W1());
  CHECK(net.W2() == before.W2());
}

TEST_CASE("update is linear in the error") {
  std::mt19937_64 rng(61);
  Net net(3, 6, 3, OutputActivation::Bipolar, 0.01);
  net.randomize(rng);
  const Vec in = random_vec(rng, 3), s = random_vec(rng, 3);
  Net a = net, b = net;
  a.forward(in);
  b.forward(in);
  a.backward(0.25, 1.7, s);
  b.backward(0.5, 1.7, s);
  const Net::Matrix d1a = a.W1() - net.W1(), d1b = b.W1() - net.W1();
  const Net::Matrix d2a = a.W2() - net.W2(), d2b = b.W2() - net.W2();
  CHECK((d1b - 2 * d1a).cwiseAbs().maxCoeff() <= 1e-15 * (1 + d1b.cwiseAbs().maxCoeff()));
  CHECK((d2b - 2 * d2a).cwiseAbs().maxCoeff() <= 1e-15 * (1 + d2b.cwiseAbs().maxCoeff()));
}

TEST_CASE("small steps decrease the surrogate loss") {
  std::mt19937_64 rng(67);
  for (double eta : {1e-3, 1e-4}) {
    for (int trial = 0; trial < 20; ++trial) {
      Net net(3, 8, 3, OutputActivation::Bipolar, eta);
      net.randomize(rng);
      const Vec in = random_vec(rng, 3);
      const Surrogate plant{1.0 + std::abs(random_vec(rng, 1)[0]), 0.0, 1.0, random_vec(rng, 3)};
      const double before = plant.loss(net, in);
      net.backward(plant.error(net, in), plant.J, plant.s);
      CHECK(plant.loss(net, in) <= before);
    }
  }
}

TEST_CASE("forward is repeatable") {
  std::mt19937_64 rng(71);
  Net net(3, 5, 2, OutputActivation::Bipolar, 0.01);
  net.randomize(rng);
  const Vec in = random_vec(rng, 3);
  const Vec a = net.forward(in);
  const Net::Matrix w1 = net.W1();
  const Vec b = net.forward(in);
  CHECK(a == b);
  CHECK(net.W1() == w1);
}

TEST_CASE("input Jacobian matches finite differences") {
  std::mt19937_64 rng(73);
  Net net(4, 6, 2, OutputActivation::Bipolar, 0.01);
  net.randomize(rng);
  const Vec in = random_vec(rng, 4);
  net.forward(in);
  const Net::Matrix J = net.input_jacobian();
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Vec up = in, down = in;
    up[i] += h;
    down[i] -= h;
    const Vec plus = net.forward(up);  // forward returns the cache; copy before the next pass
    const Vec col = (plus - net.forward(down)) / (2 * h);
    for (int k = 0; k < 2; ++k) CHECK(J(k, i) == doctest::Approx(col[k]).epsilon(1e-7));
  }
}

TEST_CASE("snapshot round trip") {
  std::mt19937_64 rng(79);
  Net net(3, 5, 2, OutputActivation::Linear, 0.0125);
  net.randomize(rng);
  std::stringstream buf;
  net.save(buf);
  const Net back = Net::load(buf);
  CHECK(back.W1() == net.W1());
  CHECK(back.W2() == net.W2());
  CHECK(back.eta() == net.eta());
  CHECK(back.output_activation() == OutputActivation::Linear);

  std::istringstream bad("mlp 3 5 2 relu 0.01\n");
  CHECK_THROWS(Net::load(bad));
  std::istringstream truncated("mlp 1 1 1 linear 0.01\n1 2\n");
  CHECK_THROWS(Net::load(truncated));
}

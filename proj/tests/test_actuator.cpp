#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "vibrobot/actuator.hpp"

using namespace vibrobot;

namespace {

// Straight power-sum evaluation of the fitted curve, positive branch.
double curve_oracle(double v) {
  return 2.6 * std::pow(v, 5) - 26.44 * std::pow(v, 4) + 102.11 * std::pow(v, 3) - 200.92 * v * v +
         253.09 * v - 43.36;
}

}  // namespace

TEST_CASE("motor speed curve") {
  CHECK(motor_speed(0.1) == 0.0);
  CHECK(motor_speed(0.0) == 0.0);
  CHECK(motor_speed(-0.19) == 0.0);
  const double at_one = 2.6 - 26.44 + 102.11 - 200.92 + 253.09 - 43.36;
  CHECK(std::abs(motor_speed(1.0) - 87.08) <= 1e-9);
  CHECK(std::abs(motor_speed(1.0) - at_one) <= 1e-12);
  CHECK(std::abs(motor_speed(-1.0) + 87.08) <= 1e-9);
  for (double v : {0.2, 0.5, 1.7, 2.5, 3.0})
    CHECK(motor_speed(v) == doctest::Approx(curve_oracle(v)).epsilon(1e-12));
}

TEST_CASE("motor speed is exactly odd") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng);
    CHECK(motor_speed(-v) == -motor_speed(v));
  }
}

TEST_CASE("motor speed jumps at the dead-zone edge") {
  CHECK(motor_speed(std::nextafter(0.2, 0.0)) == 0.0);
  CHECK(motor_speed(0.2) == doctest::Approx(curve_oracle(0.2)));
  // The fitted branch is marginally negative right at the edge; it is kept literal.
  CHECK(motor_speed(0.2) != 0.0);
  CHECK(motor_speed(0.2) < 0.0);
  CHECK(motor_speed(0.21) > 0.0);
}

TEST_CASE("rotor step") {
  RotorState r;
  r.theta_e = 1.0;
  r.omega_e = 0.0;
  CHECK(rotor_step(r, 0.37).theta_e == 1.0);

  RotorState full;
  full.theta_e = 0.0;
  full.omega_e = kTwoPi;
  CHECK(std::abs(rotor_step(full, 1.0).theta_e) <= 1e-15);

  RotorState ms;
  ms.theta_e = 0.0;
  ms.omega_e = 455.6;
  ms.omega_d = -3.0;
  const RotorState next = rotor_step(ms, 1e-3);
  CHECK(next.theta_e == doctest::Approx(0.4556).epsilon(1e-13));
  CHECK(next.omega_e == 455.6);
  CHECK(next.theta_d == doctest::Approx(std::numbers::pi - 3e-3).epsilon(1e-13));
}

TEST_CASE("wrap phase stays in [0, 2pi)") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  for (int i = 0; i < 500; ++i) {
    const double w = wrap_phase(dist(rng));
    CHECK(w >= 0.0);
    CHECK(w < kTwoPi);
  }
  CHECK(wrap_phase(-1e-300) >= 0.0);
  CHECK(wrap_phase(-1e-300) < kTwoPi);
}

TEST_CASE("eccentric force") {
  CHECK(eccentric_force(9e-4, 1.061e-3, 455.6, 0.0).horizontal == 0.0);
  const double magnitude = 9e-4 * 1.061e-3 * 455.6 * 455.6;
  const EccentricForce f = eccentric_force(9e-4, 1.061e-3, 455.6, std::numbers::pi / 2);
  CHECK(f.horizontal == doctest::Approx(0.19821).epsilon(1e-4));
  CHECK(f.horizontal == doctest::Approx(magnitude).epsilon(1e-15));
  CHECK(std::abs(f.vertical) <= 1e-15);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> th(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const EccentricForce g = eccentric_force(9e-4, 1.061e-3, 455.6, th(rng));
    CHECK(std::hypot(g.horizontal, g.vertical) == doctest::Approx(magnitude).epsilon(1e-14));
  }
}

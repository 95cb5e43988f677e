#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vibrobot/params.hpp"

using namespace vibrobot;

TEST_CASE("defaults carry the published prototype values") {
  const RobotParams p;
  CHECK(p.k == 72509.185);
  CHECK(p.mu == 0.36);
  CHECK(p.I_zz == 9.2e-7);
  CHECK(p.M == 7.2e-3);
  CHECK(p.l == 0.04);
  CHECK(p.d1 == 0.01);
  CHECK(p.h == 5.7e-3);
  CHECK(p.m_e == 9e-4);
  CHECK(p.m_d == 9e-4);
  CHECK(p.r_e == 1.061e-3);
  CHECK(p.r_d == 1.061e-3);
  CHECK(p.R_motor == 11.2);
  CHECK(p.L_motor == 0.102e-3);
  CHECK(p.g == 9.807);

  const SimConfig s;
  CHECK(s.v_max == 3.0);
  CHECK(s.tuner_eta == 0.01);
  CHECK(s.identifier_eta == 0.01);
  CHECK(s.substeps() == 100);
}

TEST_CASE("empty config gives defaults") {
  std::istringstream in("");
  CHECK(parse_config(in) == RunConfig{});
  std::istringstream comments("# nothing here\n\n   # indented comment\n");
  CHECK(parse_config(comments) == RunConfig{});
}

TEST_CASE("single key override") {
  std::istringstream in("mu = 0.0\n");
  const RunConfig cfg = parse_config(in);
  RobotParams expected;
  expected.mu = 0.0;
  CHECK(cfg.robot == expected);
  CHECK(cfg.sim == SimConfig{});
}

TEST_CASE("inline comments and whitespace") {
  std::istringstream in("  k=1000   # softer legs\nseed = 7\ndrive_mode = voltage\npaper_literal_gains = true\n");
  const RunConfig cfg = parse_config(in);
  CHECK(cfg.robot.k == 1000.0);
  CHECK(cfg.sim.seed == 7);
  CHECK(cfg.sim.drive_mode == DriveMode::Voltage);
  CHECK(cfg.sim.paper_literal_gains);
}

TEST_CASE("invalid values name key and line") {
  SUBCASE("negative mass") {
    std::istringstream in("# header\nM = -1\n");
    try {
      parse_config(in);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "M");
      CHECK(std::string(e.what()).find("'M'") != std::string::npos);
    }
  }
  SUBCASE("unparseable number") {
    std::istringstream in("mu = 0.36\nk = stiff\n");
    try {
      parse_config(in);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "k");
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("unknown key") {
    std::istringstream in("spring = 3\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("missing equals sign") {
    std::istringstream in("mu 0.3\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("negative friction") {
    std::istringstream in("mu = -0.1\n");
    CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("mu"), ConfigError);
  }
  SUBCASE("control_dt not a multiple of physics_dt") {
    std::istringstream in("control_dt = 1.5e-5\n");
    CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("control_dt"), ConfigError);
  }
  SUBCASE("legs too stiff for the time step") {
    std::istringstream in("k = 1e8\n");
    CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("stability"), ConfigError);
    std::istringstream finer("k = 1e8\nphysics_dt = 1e-6\n");
    CHECK_NOTHROW(parse_config(finer));
  }
  SUBCASE("non-positive duration") {
    std::istringstream in("duration = 0\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
}

TEST_CASE("missing file is reported") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/dir/run.cfg"), doctest::Contains("/nonexistent/dir/run.cfg"),
                       ConfigError);
}

TEST_CASE("config round trip is exact") {
  RunConfig cfg;
  cfg.robot.k = 1.0 / 3.0;
  cfg.robot.mu = 0.1 + 0.2;
  cfg.sim.seed = 123456789;
  cfg.sim.theta_d0 = 2.0943951023931957;
  cfg.sim.record_full_rate = true;
  cfg.sim.gain_max_rotation = {1.25, 7.0, 0.3};
  std::ostringstream out;
  save_config(out, cfg);
  std::istringstream in(out.str());
  CHECK(parse_config(in) == cfg);
  CHECK(config_to_string(cfg) == out.str());
}

TEST_CASE("leg positions") {
  const RobotParams p;
  const auto legs = leg_positions(p);
  const double s3 = std::sqrt(3.0);
  CHECK(legs(0, 0) == doctest::Approx(0.011547).epsilon(1e-4));
  CHECK(legs(0, 1) == 0.02);
  CHECK(legs(1, 0) == doctest::Approx(-0.023094).epsilon(1e-4));
  CHECK(legs(1, 1) == 0.0);
  CHECK(legs(2, 0) == doctest::Approx(0.011547).epsilon(1e-4));
  CHECK(legs(2, 1) == -0.02);
  CHECK(legs(0, 0) == doctest::Approx(s3 * 0.04 / 6.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> len(0.001, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    RobotParams q;
    q.l = len(rng);
    const auto L = leg_positions(q);
    CHECK(std::abs(L.col(0).sum()) <= 1e-15);
    CHECK(std::abs(L.col(1).sum()) <= 1e-15);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        CHECK((L.row(i) - L.row(j)).norm() == doctest::Approx(q.l).epsilon(1e-12));
  }
}

TEST_CASE("leg coordinates reproduce the yaw-balance arms") {
  // tau = sum(x_i f_iy - y_i f_ix) must equal
  // (s3 l/6) f_ay - (l/2) f_ax - (s3 l/3) f_by + (s3 l/6) f_cy + (l/2) f_cx.
  const RobotParams p;
  const auto legs = leg_positions(p);
  const double s3 = std::sqrt(3.0), l = p.l;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> f(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double fx[3], fy[3];
    for (int i = 0; i < 3; ++i) fx[i] = f(rng), fy[i] = f(rng);
    double tau = 0.0;
    for (int i = 0; i < 3; ++i) tau += legs(i, 0) * fy[i] - legs(i, 1) * fx[i];
    const double expected = s3 * l / 6 * fy[0] - l / 2 * fx[0] - s3 * l / 3 * fy[1] + s3 * l / 6 * fy[2] + l / 2 * fx[2];
    CHECK(tau == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("motor mounts") {
  const RobotParams p;
  CHECK(motor_e_mount(p) == Eigen::Vector2d(0.0, -0.01));
  CHECK(motor_d_mount(p) == Eigen::Vector2d(0.0, 0.01));
}

TEST_CASE("identifier spans follow the references") {
  SimConfig s;
  s.x_ref = -0.05;
  s.phi_ref = 0.0;
  CHECK(identifier_span_x(s) == 0.05);
  CHECK(identifier_span_phi(s) == 0.2);
  s.identifier_span_phi = 0.7;
  CHECK(identifier_span_phi(s) == 0.7);
}

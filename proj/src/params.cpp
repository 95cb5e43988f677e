#include "vibrobot/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string_view>
#include <vector>

namespace vibrobot {

ConfigError::ConfigError(const std::string& what, std::string key, int line)
    : std::runtime_error(what), key_(std::move(key)), line_(line) {}

int SimConfig::substeps() const {
  return static_cast<int>(std::llround(control_dt / physics_dt));
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, int line,
                            const char* expected) {
  std::ostringstream msg;
  msg << "line " << line << ": key '" << key << "': cannot parse '" << value << "' as "
      << expected;
  throw ConfigError(msg.str(), key, line);
}

double parse_double(const std::string& key, const std::string& value, int line) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
    bad_value(key, value, line, "a finite number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& value, int line) {
  long long v = 0;
  const char* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) bad_value(key, value, line, "an integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, line, "a boolean");
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, int)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Owner>
Owner& owner_of(RunConfig& c) {
  if constexpr (std::is_same_v<Owner, RobotParams>) return c.robot;
  else return c.sim;
}

template <typename Owner>
const Owner& owner_of(const RunConfig& c) {
  if constexpr (std::is_same_v<Owner, RobotParams>) return c.robot;
  else return c.sim;
}

template <typename Owner>
Field real(std::string key, double Owner::*member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v, int line) {
            owner_of<Owner>(c).*member = parse_double(key, v, line);
          },
          [member](const RunConfig& c) { return format_double(owner_of<Owner>(c).*member); }};
}

Field integer(std::string key, int SimConfig::*member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v, int line) {
            c.sim.*member = static_cast<int>(parse_integer(key, v, line));
          },
          [member](const RunConfig& c) { return std::to_string(c.sim.*member); }};
}

Field flag(std::string key, bool SimConfig::*member) {
  return {key,
          [key, member](RunConfig& c, const std::string& v, int line) {
            c.sim.*member = parse_bool(key, v, line);
          },
          [member](const RunConfig& c) { return std::string(c.sim.*member ? "true" : "false"); }};
}

Field gain(std::string key, std::array<double, 3> SimConfig::*bounds, std::size_t index) {
  return {key,
          [key, bounds, index](RunConfig& c, const std::string& v, int line) {
            (c.sim.*bounds)[index] = parse_double(key, v, line);
          },
          [bounds, index](const RunConfig& c) { return format_double((c.sim.*bounds)[index]); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real("M", &RobotParams::M));
    f.push_back(real("m_e", &RobotParams::m_e));
    f.push_back(real("m_d", &RobotParams::m_d));
    f.push_back(real("r_e", &RobotParams::r_e));
    f.push_back(real("r_d", &RobotParams::r_d));
    f.push_back(real("I_zz", &RobotParams::I_zz));
    f.push_back(real("l", &RobotParams::l));
    f.push_back(real("d1", &RobotParams::d1));
    f.push_back(real("h", &RobotParams::h));
    f.push_back(real("k", &RobotParams::k));
    f.push_back(real("mu", &RobotParams::mu));
    f.push_back(real("g", &RobotParams::g));
    f.push_back(real("R_motor", &RobotParams::R_motor));
    f.push_back(real("L_motor", &RobotParams::L_motor));
    f.push_back(real("friction_v_reg", &RobotParams::friction_v_reg));

    f.push_back(real("physics_dt", &SimConfig::physics_dt));
    f.push_back(real("control_dt", &SimConfig::control_dt));
    f.push_back(real("duration", &SimConfig::duration));
    f.push_back({"seed",
                 [](RunConfig& c, const std::string& v, int line) {
                   const long long s = parse_integer("seed", v, line);
                   if (s < 0) bad_value("seed", v, line, "a non-negative integer");
                   c.sim.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.sim.seed); }});
    f.push_back(flag("record_full_rate", &SimConfig::record_full_rate));
    f.push_back(real("theta_e0", &SimConfig::theta_e0));
    f.push_back(real("theta_d0", &SimConfig::theta_d0));
    f.push_back(real("eps_v", &SimConfig::eps_v));
    f.push_back({"drive_mode",
                 [](RunConfig& c, const std::string& v, int line) {
                   if (v == "speed") c.sim.drive_mode = DriveMode::Speed;
                   else if (v == "voltage") c.sim.drive_mode = DriveMode::Voltage;
                   else bad_value("drive_mode", v, line, "'speed' or 'voltage'");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.sim.drive_mode == DriveMode::Speed ? "speed" : "voltage");
                 }});
    f.push_back(real("omega_e", &SimConfig::omega_e));
    f.push_back(real("omega_d", &SimConfig::omega_d));
    f.push_back(real("volt_e", &SimConfig::volt_e));
    f.push_back(real("volt_d", &SimConfig::volt_d));
    f.push_back(real("x_ref", &SimConfig::x_ref));
    f.push_back(real("phi_ref", &SimConfig::phi_ref));
    f.push_back(integer("tuner_hidden", &SimConfig::tuner_hidden));
    f.push_back(real("tuner_eta", &SimConfig::tuner_eta));
    f.push_back(gain("kp_max", &SimConfig::gain_max, 0));
    f.push_back(gain("ki_max", &SimConfig::gain_max, 1));
    f.push_back(gain("kd_max", &SimConfig::gain_max, 2));
    f.push_back(gain("kp_max_r", &SimConfig::gain_max_rotation, 0));
    f.push_back(gain("ki_max_r", &SimConfig::gain_max_rotation, 1));
    f.push_back(gain("kd_max_r", &SimConfig::gain_max_rotation, 2));
    f.push_back(flag("paper_literal_gradient", &SimConfig::paper_literal_gradient));
    f.push_back(flag("paper_literal_gains", &SimConfig::paper_literal_gains));
    f.push_back(flag("tuner_normalized_loss", &SimConfig::tuner_normalized_loss));
    f.push_back(flag("jacobian_guard", &SimConfig::jacobian_guard));
    f.push_back(real("jacobian_min", &SimConfig::jacobian_min));
    f.push_back(integer("identifier_hidden", &SimConfig::identifier_hidden));
    f.push_back(real("identifier_eta", &SimConfig::identifier_eta));
    f.push_back(integer("identifier_input_lags", &SimConfig::identifier_input_lags));
    f.push_back(integer("identifier_output_lags", &SimConfig::identifier_output_lags));
    f.push_back(real("identifier_span_x", &SimConfig::identifier_span_x));
    f.push_back(real("identifier_span_phi", &SimConfig::identifier_span_phi));
    f.push_back(real("v_max", &SimConfig::v_max));
    return f;
  }();
  return table;
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(std::string("key '") + key + "': " + what, key);
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value, line);
      return;
    }
  }
  std::ostringstream msg;
  msg << "line " << line << ": unknown key '" << key << "'";
  throw ConfigError(msg.str(), key, line);
}

void validate(const RunConfig& cfg) {
  const RobotParams& p = cfg.robot;
  const SimConfig& s = cfg.sim;
  const auto positive = [](const char* key, double v) {
    require(v > 0.0, key, "must be strictly positive, got " + format_double(v));
  };
  positive("M", p.M);
  positive("m_e", p.m_e);
  positive("m_d", p.m_d);
  positive("r_e", p.r_e);
  positive("r_d", p.r_d);
  positive("I_zz", p.I_zz);
  positive("l", p.l);
  positive("d1", p.d1);
  positive("h", p.h);
  positive("k", p.k);
  positive("g", p.g);
  positive("R_motor", p.R_motor);
  positive("L_motor", p.L_motor);
  positive("friction_v_reg", p.friction_v_reg);
  require(p.mu >= 0.0, "mu", "must be non-negative");

  positive("physics_dt", s.physics_dt);
  positive("control_dt", s.control_dt);
  positive("duration", s.duration);
  positive("eps_v", s.eps_v);
  positive("v_max", s.v_max);
  const double ratio = s.control_dt / s.physics_dt;
  require(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-6 * ratio,
          "control_dt", "must be an integer multiple of physics_dt");
  // Stuck legs form an undamped spring system; RK4 is only stable for
  // omega * dt <= 2 sqrt(2) on the imaginary axis. Sum of squared leg radii is l^2.
  const double omega = std::sqrt(p.k * std::max(3.0 / p.M, p.l * p.l / p.I_zz));
  require(omega * s.physics_dt <= 2.0 * std::numbers::sqrt2, "k",
          "leg-spring frequency " + format_double(omega) + " rad/s is beyond the integrator's stability limit at physics_dt = " +
              format_double(s.physics_dt) + " s");
  require(s.tuner_hidden > 0, "tuner_hidden", "must be positive");
  require(s.identifier_hidden > 0, "identifier_hidden", "must be positive");
  require(s.identifier_input_lags > 0, "identifier_input_lags", "must be positive");
  require(s.identifier_output_lags >= 0, "identifier_output_lags", "must be non-negative");
  require(s.tuner_eta >= 0.0, "tuner_eta", "must be non-negative");
  require(s.identifier_eta >= 0.0, "identifier_eta", "must be non-negative");
  positive("kp_max", s.gain_max[0]);
  positive("ki_max", s.gain_max[1]);
  positive("kd_max", s.gain_max[2]);
  positive("kp_max_r", s.gain_max_rotation[0]);
  positive("ki_max_r", s.gain_max_rotation[1]);
  positive("kd_max_r", s.gain_max_rotation[2]);
  require(s.jacobian_min >= 0.0, "jacobian_min", "must be non-negative");
  require(s.identifier_span_x >= 0.0, "identifier_span_x", "must be non-negative");
  require(s.identifier_span_phi >= 0.0, "identifier_span_phi", "must be non-negative");
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view view(raw);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const std::string line = trim(view);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", {},
                        line_no);
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key", {}, line_no);
    set_config_value(cfg, key, value, line_no);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

void save_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& f : fields()) out << f.key << " = " << f.get(cfg) << '\n';
}

std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream out;
  save_config(out, cfg);
  return out.str();
}

Eigen::Matrix<double, 3, 2> leg_positions(const RobotParams& p) {
  const double s3 = std::numbers::sqrt3;
  Eigen::Matrix<double, 3, 2> legs;
  legs << s3 * p.l / 6.0, p.l / 2.0,
          -s3 * p.l / 3.0, 0.0,
          s3 * p.l / 6.0, -p.l / 2.0;
  return legs;
}

Eigen::Vector2d motor_e_mount(const RobotParams& p) { return {0.0, -p.d1}; }
Eigen::Vector2d motor_d_mount(const RobotParams& p) { return {0.0, p.d1}; }

double identifier_span_x(const SimConfig& c) {
  if (c.identifier_span_x > 0.0) return c.identifier_span_x;
  return std::abs(c.x_ref) > 0.0 ? std::abs(c.x_ref) : 0.02;
}

double identifier_span_phi(const SimConfig& c) {
  if (c.identifier_span_phi > 0.0) return c.identifier_span_phi;
  return std::abs(c.phi_ref) > 0.0 ? std::abs(c.phi_ref) : 0.2;
}

}  // namespace vibrobot

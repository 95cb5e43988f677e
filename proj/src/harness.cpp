#include "vibrobot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "vibrobot/svg.hpp"

namespace vibrobot {

namespace fs = std::filesystem;

std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

SimTrace run_closed_loop(const RunConfig& cfg) {
  validate(cfg);
  const SimConfig& sc = cfg.sim;
  const int sub = sc.substeps();
  const long long ticks = std::llround(sc.duration / sc.control_dt);

  SimTrace trace;
  trace.config = cfg;
  trace.samples.reserve(static_cast<std::size_t>(sc.record_full_rate ? ticks * sub : ticks) + 1);

  const auto record = [&](const RobotState& s, const ControlOutput& u, double t) {
    TraceSample r = sample_of(s, cfg.robot, t);
    r.V_e = u.V_e;
    r.V_d = u.V_d;
    for (int j = 0; j < 3; ++j) {
      r.gains[j] = u.gains_t[j];
      r.gains[3 + j] = u.gains_r[j];
    }
    r.e_t = u.e_t;
    r.e_r = u.e_r;
    trace.samples.push_back(r);
  };

  RobotState s = initial_state(cfg);
  Controller ctrl(cfg);
  ControlOutput u = ctrl.step(s);
  record(s, u, 0.0);

  long long n = 0;
  for (long long tick = 0; tick < ticks; ++tick) {
    const MotorCommand cmd = MotorCommand::voltages(u.V_e, u.V_d);
    for (int i = 0; i < sub; ++i) {
      s = step(s, cmd, cfg.robot, sc.physics_dt, sc.eps_v, n * sc.physics_dt);
      ++n;
      if (sc.record_full_rate && i + 1 < sub) record(s, u, n * sc.physics_dt);
    }
    u = ctrl.step(s);
    record(s, u, n * sc.physics_dt);
  }
  return trace;
}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter p) { return p == SweepParameter::k ? "k" : "mu"; }

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "k") return SweepParameter::k;
  if (name == "mu") return SweepParameter::mu;
  throw std::invalid_argument("unknown sweep parameter '" + name + "' (expected k or mu)");
}

SweepSpec SweepSpec::defaults(SweepParameter p) {
  SweepSpec spec;
  spec.parameter = p;
  const double k0 = RobotParams{}.k;
  if (p == SweepParameter::k) spec.values = {k0 / 10.0, k0, 10.0 * k0};
  else spec.values = {0.0, 0.18, 0.36, 0.72};
  return spec;
}

void validate(const SweepSpec& spec) {
  const std::string name = to_string(spec.parameter);
  if (spec.values.empty()) throw std::invalid_argument("sweep over " + name + ": empty value list");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const double v = spec.values[i];
    if (!std::isfinite(v)) throw std::invalid_argument("sweep over " + name + ": non-finite value");
    const bool ok = spec.parameter == SweepParameter::mu ? v >= 0.0 : v > 0.0;
    if (!ok)
      throw std::invalid_argument("sweep over " + name + ": value " + format_exact(v) +
                                  (spec.parameter == SweepParameter::mu ? " is negative" : " is not positive"));
    if (i > 0 && !(v > spec.values[i - 1]))
      throw std::invalid_argument("sweep over " + name + ": values must be strictly increasing");
  }
  if (!(spec.duration > 0.0)) throw std::invalid_argument("sweep duration must be positive");
}

RunConfig sweep_config(const RunConfig& base, SweepParameter p, double value) {
  RunConfig cfg = base;
  if (p == SweepParameter::k) cfg.robot.k = value;
  else cfg.robot.mu = value;
  return cfg;
}

SweepRow summarize_sweep_run(double value, const SimTrace& trace) {
  SweepRow row;
  row.value = value;
  if (trace.samples.empty()) {
    row.error = "empty trace";
    return row;
  }
  const TraceSample& last = trace.samples.back();
  row.ok = true;
  row.final_X = last.X;
  row.final_abs_Y = std::abs(last.Y);
  row.final_abs_phi = std::abs(last.phi);
  return row;
}

SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base) {
  validate(spec);
  const std::size_t n = spec.values.size();
  SweepResult result;
  result.spec = spec;
  result.traces.resize(n);
  result.rows.resize(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const double value = spec.values[i];
      try {
        RunConfig cfg = sweep_config(base, spec.parameter, value);
        cfg.sim.duration = spec.duration;
        result.traces[i] = run_open_loop(cfg, spec.drive);
        result.rows[i] = summarize_sweep_run(value, result.traces[i]);
      } catch (const std::exception& e) {
        result.rows[i] = SweepRow{};
        result.rows[i].value = value;
        result.rows[i].error = e.what();
      }
    }
  };

  unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return result;
}

// ---------------------------------------------------------------------------

void validate(const TrackSpec& spec) {
  if (!(spec.duration > 0.0) || !std::isfinite(spec.duration))
    throw std::invalid_argument("tracking duration must be positive");
  if (!std::isfinite(spec.x_ref) || !std::isfinite(spec.phi_ref))
    throw std::invalid_argument("tracking references must be finite");
  if (!(spec.band_t > 0.0) || !(spec.band_r > 0.0))
    throw std::invalid_argument("settling bands must be positive");
}

double settling_time(const std::vector<double>& t, const std::vector<double>& err, double band) {
  if (t.size() != err.size()) throw std::invalid_argument("settling_time: size mismatch");
  std::size_t i = err.size();
  while (i > 0 && std::abs(err[i - 1]) <= band) --i;
  if (i == err.size()) return std::numeric_limits<double>::quiet_NaN();
  return t[i];
}

TrackSummary summarize_tracking(const SimTrace& trace, double band_t, double band_r) {
  TrackSummary s;
  if (trace.samples.empty()) return s;
  const double t_end = trace.samples.back().t;
  const double window_start = 0.9 * t_end;
  const SimConfig& sc = trace.config.sim;

  std::vector<double> t, et, er;
  t.reserve(trace.samples.size());
  et.reserve(trace.samples.size());
  er.reserve(trace.samples.size());
  for (const TraceSample& r : trace.samples) {
    t.push_back(r.t);
    et.push_back(r.e_t);
    er.push_back(r.e_r);
    if (r.t >= window_start) {
      s.steady_e_t = std::max(s.steady_e_t, std::abs(r.e_t));
      s.steady_e_r = std::max(s.steady_e_r, std::abs(r.e_r));
    }
    s.max_abs_voltage = std::max({s.max_abs_voltage, std::abs(r.V_e), std::abs(r.V_d)});
    for (int j = 0; j < 3; ++j) {
      const double gt = r.gains[j], gr = r.gains[3 + j];
      const bool in_t = gt >= 0.0 && gt <= sc.gain_max[j];
      const bool in_r = gr >= 0.0 && gr <= sc.gain_max_rotation[j];
      if (!in_t || !in_r) s.gains_in_bounds = false;
    }
  }
  s.settling_t = settling_time(t, et, band_t);
  s.settling_r = settling_time(t, er, band_r);
  return s;
}

TrackResult run_tracking(const TrackSpec& spec, const RunConfig& base) {
  validate(spec);
  RunConfig cfg = base;
  cfg.sim.x_ref = spec.x_ref;
  cfg.sim.phi_ref = spec.phi_ref;
  cfg.sim.duration = spec.duration;
  TrackResult result;
  result.trace = run_closed_loop(cfg);
  result.summary = summarize_tracking(result.trace, spec.band_t, spec.band_r);
  return result;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "t",    "X",    "Y",    "phi",  "x_body", "V_e",  "V_d",  "omega_e",
      "omega_d", "theta_e", "theta_d", "N_a", "N_b", "N_c", "stuck", "Kp_t",
      "Ki_t", "Kd_t", "Kp_r", "Ki_r", "Kd_r",   "e_t",  "e_r"};
  return cols;
}

namespace {

std::vector<double> row_values(const TraceSample& r) {
  return {r.t,       r.X,       r.Y,        r.phi,      r.x_body,   r.V_e,
          r.V_d,     r.omega_e, r.omega_d,  r.theta_e,  r.theta_d,  r.N_a,
          r.N_b,     r.N_c,     double(r.stuck), r.gains[0], r.gains[1], r.gains[2],
          r.gains[3], r.gains[4], r.gains[5], r.e_t,     r.e_r};
}

TraceSample sample_from(const std::vector<double>& v) {
  TraceSample r;
  r.t = v[0];
  r.X = v[1];
  r.Y = v[2];
  r.phi = v[3];
  r.x_body = v[4];
  r.V_e = v[5];
  r.V_d = v[6];
  r.omega_e = v[7];
  r.omega_d = v[8];
  r.theta_e = v[9];
  r.theta_d = v[10];
  r.N_a = v[11];
  r.N_b = v[12];
  r.N_c = v[13];
  r.stuck = static_cast<int>(v[14]);
  for (int j = 0; j < 6; ++j) r.gains[j] = v[15 + j];
  r.e_t = v[21];
  r.e_r = v[22];
  return r;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << join(trace_columns(), ',') << '\n';
  for (const TraceSample& r : trace.samples) {
    const std::vector<double> v = row_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_exact(v[i]);
    out << '\n';
  }
}

std::vector<TraceSample> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: missing header");
  if (line != join(trace_columns(), ','))
    throw std::runtime_error("trace csv: unexpected header '" + line + "'");
  const std::size_t ncol = trace_columns().size();
  std::vector<TraceSample> samples;
  std::vector<double> v(ncol);
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < ncol; ++c) {
      const auto res = std::from_chars(p, end, v[c]);
      if (res.ec != std::errc{})
        throw std::runtime_error("trace csv line " + std::to_string(line_no) + ": bad number in column " +
                                 trace_columns()[c]);
      p = res.ptr;
      if (c + 1 < ncol) {
        if (p == end || *p != ',')
          throw std::runtime_error("trace csv line " + std::to_string(line_no) + ": too few columns");
        ++p;
      }
    }
    if (p != end) throw std::runtime_error("trace csv line " + std::to_string(line_no) + ": too many columns");
    samples.push_back(sample_from(v));
  }
  return samples;
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
  out << to_string(result.spec.parameter) << ",status,final_X,final_abs_Y,final_abs_phi,error\n";
  for (const SweepRow& r : result.rows) {
    out << format_exact(r.value) << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok)
      out << format_exact(r.final_X) << ',' << format_exact(r.final_abs_Y) << ',' << format_exact(r.final_abs_phi) << ',';
    else
      out << ",,,";
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
}

void write_track_summary(std::ostream& out, const TrackSummary& s) {
  out << "steady_abs_e_t = " << format_exact(s.steady_e_t) << '\n'
      << "steady_abs_e_r = " << format_exact(s.steady_e_r) << '\n'
      << "settling_t = " << (std::isnan(s.settling_t) ? std::string("never") : format_exact(s.settling_t)) << '\n'
      << "settling_r = " << (std::isnan(s.settling_r) ? std::string("never") : format_exact(s.settling_r)) << '\n'
      << "max_abs_voltage = " << format_exact(s.max_abs_voltage) << '\n'
      << "gains_in_bounds = " << (s.gains_in_bounds ? "true" : "false") << '\n';
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create directory (" + ec.message() + ")", dir);
}

template <typename Writer>
fs::path write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open for writing", path);
  writer(out);
  out.flush();
  if (!out) throw OutputError("write failed", path);
  return path;
}

fs::path plot_file(const fs::path& path, const Plot& plot) {
  try {
    write_svg(path, plot);
  } catch (const std::runtime_error&) {
    throw OutputError("cannot write plot", path);
  }
  return path;
}

Series column(const SimTrace& trace, const std::string& label, double TraceSample::*field) {
  Series s;
  s.label = label;
  s.x.reserve(trace.samples.size());
  s.y.reserve(trace.samples.size());
  for (const TraceSample& r : trace.samples) {
    s.x.push_back(r.t);
    s.y.push_back(r.*field);
  }
  return s;
}

Series gain_column(const SimTrace& trace, const std::string& label, int index) {
  Series s;
  s.label = label;
  for (const TraceSample& r : trace.samples) {
    s.x.push_back(r.t);
    s.y.push_back(r.gains[index]);
  }
  return s;
}

}  // namespace

std::vector<fs::path> emit_outputs(const SimTrace& trace, const fs::path& dir, const std::string& command) {
  ensure_dir(dir);
  std::vector<fs::path> files;
  files.push_back(write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, trace); }));
  files.push_back(write_file(dir / "metadata.txt", [&](std::ostream& o) {
    o << "# vibrobot run\n"
      << "command = " << command << '\n'
      << "seed = " << trace.config.sim.seed << '\n'
      << "samples = " << trace.samples.size() << '\n'
      << "record_dt = " << format_exact(trace.record_dt()) << '\n'
      << "columns = " << join(trace_columns(), ',') << '\n'
      << "\n# configuration\n";
    save_config(o, trace.config);
  }));

  files.push_back(plot_file(dir / "x.svg", {"Displacement X", "t [s]", "X [m]", {column(trace, "X", &TraceSample::X)}}));
  files.push_back(plot_file(dir / "y.svg", {"Displacement Y", "t [s]", "Y [m]", {column(trace, "Y", &TraceSample::Y)}}));
  files.push_back(plot_file(dir / "phi.svg", {"Yaw angle", "t [s]", "phi [rad]", {column(trace, "phi", &TraceSample::phi)}}));
  files.push_back(plot_file(dir / "errors.svg", {"Tracking errors", "t [s]", "error [m | rad]",
                                                 {column(trace, "e_t [m]", &TraceSample::e_t),
                                                  column(trace, "e_r [rad]", &TraceSample::e_r)}}));
  files.push_back(plot_file(dir / "gains.svg",
                            {"PID gains", "t [s]", "gain",
                             {gain_column(trace, "Kp_t", 0), gain_column(trace, "Ki_t", 1), gain_column(trace, "Kd_t", 2),
                              gain_column(trace, "Kp_r", 3), gain_column(trace, "Ki_r", 4), gain_column(trace, "Kd_r", 5)}}));
  return files;
}

std::vector<fs::path> emit_outputs(const SweepResult& result, const fs::path& dir) {
  ensure_dir(dir);
  const std::string name = to_string(result.spec.parameter);
  std::vector<fs::path> files;
  files.push_back(write_file(dir / "summary.csv", [&](std::ostream& o) { write_sweep_summary(o, result); }));

  Plot px{"X for each " + name, "t [s]", "X [m]", {}};
  Plot py{"Y for each " + name, "t [s]", "Y [m]", {}};
  Plot pphi{"phi for each " + name, "t [s]", "phi [rad]", {}};
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (!result.rows[i].ok) continue;
    const SimTrace& trace = result.traces[i];
    char sub[32];
    std::snprintf(sub, sizeof(sub), "%s_%02zu", name.c_str(), i);
    const fs::path run_dir = dir / sub;
    ensure_dir(run_dir);
    files.push_back(write_file(run_dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, trace); }));
    files.push_back(write_file(run_dir / "metadata.txt", [&](std::ostream& o) {
      o << "# vibrobot sweep run\n"
        << "parameter = " << name << '\n'
        << "value = " << format_exact(result.rows[i].value) << '\n'
        << "samples = " << trace.samples.size() << '\n'
        << "\n# configuration\n";
      save_config(o, trace.config);
    }));
    const std::string label = name + " = " + format_exact(result.rows[i].value);
    px.series.push_back(column(trace, label, &TraceSample::X));
    py.series.push_back(column(trace, label, &TraceSample::Y));
    pphi.series.push_back(column(trace, label, &TraceSample::phi));
  }
  files.push_back(plot_file(dir / "x.svg", px));
  files.push_back(plot_file(dir / "y.svg", py));
  files.push_back(plot_file(dir / "phi.svg", pphi));
  return files;
}

}  // namespace vibrobot

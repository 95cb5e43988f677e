// vibrobot: open-loop runs, parameter sweeps and closed-loop tracking for the
// three-legged vibration-driven robot.
//
// Precedence for settings: built-in defaults < --config file < --set KEY=VALUE
// < dedicated flags (--seed, --duration, --x-ref, ...).
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or model error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vibrobot/controller.hpp"
#include "vibrobot/diagnostics.hpp"
#include "vibrobot/harness.hpp"
#include "vibrobot/params.hpp"
#include "vibrobot/sim.hpp"

namespace fs = std::filesystem;
using namespace vibrobot;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "RNG seed for weight initialisation");
  cmd->add_option("--duration", c.duration, "simulated time, s");
  cmd->add_option("--set", c.sets, "override a configuration key (KEY=VALUE), repeatable");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.sim.seed = *c.seed;
  if (c.duration) cfg.sim.duration = *c.duration;
  validate(cfg);
  return cfg;
}

fs::path out_dir(const Common& c, const char* command) {
  return c.out.empty() ? fs::path("vibrobot-out") / command : fs::path(c.out);
}

void report_files(const std::vector<fs::path>& files) {
  std::cout << "wrote " << files.size() << " files";
  if (!files.empty()) std::cout << " under " << files.front().parent_path().string();
  std::cout << '\n';
}

int run_openloop(const Common& c) {
  const RunConfig cfg = build_config(c);
  const SimTrace trace = run_open_loop(cfg, configured_drive(cfg.sim));
  const TraceSample& last = trace.samples.back();
  std::cout << "t = " << format_exact(last.t) << " s\n"
            << "X = " << format_exact(last.X) << " m\n"
            << "Y = " << format_exact(last.Y) << " m\n"
            << "phi = " << format_exact(last.phi) << " rad\n";
  report_files(emit_outputs(trace, out_dir(c, "openloop"), "openloop"));
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--values: cannot parse '" + item + "' as a number");
    }
  }
  return values;
}

int run_sweep_cmd(const Common& c, const std::string& param, const std::string& values, unsigned workers) {
  SweepParameter p;
  try {
    p = parse_sweep_parameter(param);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const RunConfig cfg = build_config(c);
  SweepSpec spec = SweepSpec::defaults(p);
  if (!values.empty()) spec.values = parse_values(values);
  spec.drive = configured_drive(cfg.sim);
  spec.duration = cfg.sim.duration;
  spec.workers = workers;
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SweepResult result = run_sweep(spec, cfg);
  write_sweep_summary(std::cout, result);
  report_files(emit_outputs(result, out_dir(c, "sweep")));
  for (const SweepRow& r : result.rows)
    if (!r.ok) return 2;
  return 0;
}

int run_track(const Common& c, std::optional<double> x_ref, std::optional<double> phi_ref) {
  const RunConfig cfg = build_config(c);
  TrackSpec spec;
  spec.x_ref = x_ref.value_or(cfg.sim.x_ref);
  spec.phi_ref = phi_ref.value_or(cfg.sim.phi_ref);
  spec.duration = cfg.sim.duration;
  const TrackResult result = run_tracking(spec, cfg);
  write_track_summary(std::cout, result.summary);
  const fs::path dir = out_dir(c, "track");
  auto files = emit_outputs(result.trace, dir, "track");
  std::ofstream summary(dir / "summary.txt", std::ios::binary);
  if (!summary) throw OutputError("cannot open for writing", dir / "summary.txt");
  write_track_summary(summary, result.summary);
  files.push_back(dir / "summary.txt");
  report_files(files);
  return 0;
}

int run_gradcheck(int seeds) {
  double tuner = 0.0, ident = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    tuner = std::max(tuner, tuner_gradient_check(static_cast<std::uint64_t>(s)));
    ident = std::max(ident, identifier_jacobian_check(static_cast<std::uint64_t>(s)));
  }
  const bool ok = tuner <= 1e-4 && ident <= 1e-6;
  std::printf("seeds = %d\n", seeds);
  std::printf("tuner weight gradient      max rel error = %.3e (limit 1e-4)\n", tuner);
  std::printf("identifier Jacobian        max rel error = %.3e (limit 1e-6)\n", ident);
  std::printf("%s\n", ok ? "ok" : "FAILED");
  return ok ? 0 : 2;
}

int run_ident_demo(std::uint64_t seed, int steps, double eta) {
  const IdentDemoResult r = identifier_linear_demo(seed, steps, eta);
  std::printf("plant y(k) = 0.5 u(k-1), %d steps, eta = %g, seed = %llu\n", steps, eta,
              static_cast<unsigned long long>(seed));
  std::printf("J_m = %.6f\n", r.jacobian);
  std::printf("mse / signal power = %.6f\n", r.mse_ratio);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and adaptive control workbench for a vibration-driven stick-slip robot"};
  app.require_subcommand(0, 1);

  Common common;
  auto* openloop = app.add_subcommand("openloop", "constant-drive run from rest");
  add_common(openloop, common);

  std::string param, values;
  unsigned workers = 0;
  auto* sweep = app.add_subcommand("sweep", "open-loop sweep over k or mu");
  add_common(sweep, common);
  sweep->add_option("--param", param, "k or mu")->required();
  sweep->add_option("--values", values, "comma-separated, strictly increasing");
  sweep->add_option("--workers", workers, "worker threads (0 = all cores)");

  std::optional<double> x_ref, phi_ref;
  auto* track = app.add_subcommand("track", "closed-loop tracking with both adaptive channels");
  add_common(track, common);
  track->add_option("--x-ref", x_ref, "translation reference, m");
  track->add_option("--phi-ref", phi_ref, "yaw reference, rad");

  int seeds = 20;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of the network gradients");
  gradcheck->add_option("--seeds", seeds, "number of random nets")->check(CLI::PositiveNumber);

  std::uint64_t demo_seed = 1;
  int steps = 5000;
  double eta = 0.01;
  auto* ident = app.add_subcommand("ident-demo", "identifier on a synthetic linear plant");
  ident->add_option("--seed", demo_seed, "RNG seed");
  ident->add_option("--steps", steps, "training steps")->check(CLI::PositiveNumber);
  ident->add_option("--eta", eta, "learning rate")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*openloop) return run_openloop(common);
    if (*sweep) return run_sweep_cmd(common, param, values, workers);
    if (*track) return run_track(common, x_ref, phi_ref);
    if (*gradcheck) return run_gradcheck(seeds);
    if (*ident) return run_ident_demo(demo_seed, steps, eta);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

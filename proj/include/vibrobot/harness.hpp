#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vibrobot/controller.hpp"
#include "vibrobot/params.hpp"
#include "vibrobot/sim.hpp"

namespace vibrobot {

// ---------------------------------------------------------------------------
// Closed loop

/// Runs both adaptive channels against the plant for cfg.sim.duration.
/// Sample k holds the state at t_k and the command computed from it.
/// Throws ControllerDivergence or SimulationError.
SimTrace run_closed_loop(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepParameter { k, mu };

std::string to_string(SweepParameter p);
/// "k" or "mu"; anything else throws std::invalid_argument.
SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::mu;
  std::vector<double> values;
  MotorCommand drive = MotorCommand::speeds(455.6, 455.6);
  double duration = 2.0;
  unsigned workers = 0;  // 0 = hardware concurrency

  static SweepSpec defaults(SweepParameter p);
};

/// Throws std::invalid_argument for an empty, unsorted or out-of-range value list.
void validate(const SweepSpec& spec);

/// Copy of `base` with the swept parameter set to `value`.
RunConfig sweep_config(const RunConfig& base, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;  // set when !ok
  double final_X = 0.0;
  double final_abs_Y = 0.0;
  double final_abs_phi = 0.0;
};

/// Summary row computed from a trace alone.
SweepRow summarize_sweep_run(double value, const SimTrace& trace);

struct SweepResult {
  SweepSpec spec;
  std::vector<SimTrace> traces;  // empty trace for failed values
  std::vector<SweepRow> rows;    // same order as spec.values
};

/// One open-loop run per value on a bounded worker pool. Results come back in
/// value order whatever the scheduling; a failed run is reported in its row.
SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base);

// ---------------------------------------------------------------------------
// Tracking

struct TrackSpec {
  double x_ref = 0.02;
  double phi_ref = 0.0;
  double duration = 10.0;
  double band_t = 1e-3;   // settling band for e_t, m
  double band_r = 1e-2;   // settling band for e_r, rad
};

void validate(const TrackSpec& spec);

struct TrackSummary {
  double steady_e_t = 0.0;   // max |e_t| over the final 10 % of the run
  double steady_e_r = 0.0;
  double settling_t = std::numeric_limits<double>::quiet_NaN();  // NaN: never settled
  double settling_r = std::numeric_limits<double>::quiet_NaN();
  double max_abs_voltage = 0.0;
  bool gains_in_bounds = true;
};

TrackSummary summarize_tracking(const SimTrace& trace, double band_t, double band_r);

/// First time after which |err| stays within band; NaN if the last sample is outside.
double settling_time(const std::vector<double>& t, const std::vector<double>& err, double band);

struct TrackResult {
  SimTrace trace;
  TrackSummary summary;
};

TrackResult run_tracking(const TrackSpec& spec, const RunConfig& base);

// ---------------------------------------------------------------------------
// Output

/// Column order of every trace CSV.
const std::vector<std::string>& trace_columns();

void write_trace_csv(std::ostream& out, const SimTrace& trace);
std::vector<TraceSample> read_trace_csv(std::istream& in);

class OutputError : public std::runtime_error {
 public:
  OutputError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// trace.csv, metadata.txt and x/y/phi/errors/gains SVG plots in `dir`.
/// Returns the files written.
std::vector<std::filesystem::path> emit_outputs(const SimTrace& trace,
                                                const std::filesystem::path& dir,
                                                const std::string& command);

/// summary.csv, one trace per value under <param>_<index>/, overlay plots.
std::vector<std::filesystem::path> emit_outputs(const SweepResult& result,
                                                const std::filesystem::path& dir);

void write_sweep_summary(std::ostream& out, const SweepResult& result);
void write_track_summary(std::ostream& out, const TrackSummary& s);

/// Shortest text that parses back to the same double.
std::string format_exact(double v);

}  // namespace vibrobot

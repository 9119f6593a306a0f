#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vanish::harness {

/// Sweep description. Config files are YAML with the same field names:
///
///   deltas: [0.2, 0.1, 0.05]     # strictly decreasing
///   resolutions: [16, 32, 64]    # grid cells per axis, or belief resolution m
///   rho: [1.0]
///   tolerance: 1e-9
///   max_iterations: 10000000     # cap for the fixed-point solvers
///   seed: 1
///   payoff_mode: flow            # or frozen
///   samples: 100                 # Isaacs samples / HJI probes
///   strategy_resolution: 1e-3
struct ExperimentConfig {
  std::string spec_path;
  std::string solver;
  std::vector<double> deltas;
  std::vector<std::size_t> resolutions;
  std::vector<double> rhos{1.0};
  double tolerance = 1e-9;
  std::size_t max_iterations = 10'000'000;
  std::uint64_t seed = 1;
  std::string payoff_mode = "flow";
  std::size_t samples = 100;
  double strategy_resolution = 1e-3;
  std::string output_dir = "out";
  bool gnuplot = false;
};

/// Throws ValidationError (with file position when loaded from a file) unless
/// every list is nonempty, deltas decrease strictly, and tolerances are positive.
void check(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<input>");
ExperimentConfig load_config(const std::string& path);

/// Solvers accepted by run().
const std::vector<std::string>& solvers();

struct ReportRow {
  double delta = 0.0;
  std::size_t resolution = 0;
  double rho = 0.0;
  /// Error measure of the solver (see run()); NaN when undefined.
  double error = 0.0;
  double value_norm = 0.0;
  double runtime_seconds = 0.0;
};

struct ConvergenceReport {
  std::string solver;
  std::vector<ReportRow> rows;
  /// Least-squares slope of log error against log δ over the finest half of
  /// the rows (at least three points); empty with fewer than three usable rows.
  std::optional<double> slope;
};

/// Least-squares slope of log y against log x over the last ceil(n/2)
/// points (at least 3); nullopt when fewer than 3 positive points exist.
std::optional<double> fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Runs the sweep and writes into output_dir:
///   report.csv    delta, resolution, rho, error, value_norm
///   values.csv    per-point values (columns depend on the solver)
///   timing.csv    runtime per row, kept apart so the other files are reproducible
///   manifest.json spec and config hashes, library version, row provenance
///   plot.gp       when gnuplot is set
/// Error per solver: solve-stationary ‖ν_δ − W_ρ‖; guarantee the gap;
/// limit-eq the limit-equation residual; isaacs the mixed gap; hji-residual
/// the largest residual at smooth probes; otherwise the sup difference to the
/// previous row.
ConvergenceReport run(const ExperimentConfig& config);

struct ComparisonRow {
  std::string key;
  double sup_difference = 0.0;
};

/// Aligns two values.csv files on every column but `value` and reports the
/// sup of |value_a − value_b| per delta. Throws ValidationError when the
/// headers differ or a row of one file has no partner in the other.
std::vector<ComparisonRow> compare(const std::string& values_csv_a, const std::string& values_csv_b);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& text);
std::string csv_number(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace vanish::harness

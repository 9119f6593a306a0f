#include "vanish/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "vanish/belief.hpp"
#include "vanish/diffgame.hpp"
#include "vanish/errors.hpp"
#include "vanish/observed.hpp"
#include "vanish/spec_io.hpp"

namespace vanish::harness {

namespace fs = std::filesystem;

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError(path.string() + ": cannot write");
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ << ',';
      out_ << csv_field(fields[k]);
    }
    out_ << "\r\n";
    ++rows_;
  }

  std::size_t data_rows() const { return rows_ - 1; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"' && k + 1 < text.size() && text[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_tuple(double delta, std::size_t resolution, double rho) {
  std::ostringstream s;
  s << "(delta=" << delta << ", resolution=" << resolution << ", rho=" << rho << ")";
  return s.str();
}

// Runs one sweep cell, attaching the parameter tuple to solver errors.
template <class F>
auto guarded(double delta, std::size_t resolution, double rho, F&& f) {
  try {
    return f();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(e.what()) + " at " + format_tuple(delta, resolution, rho));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string(e.what()) + " at " + format_tuple(delta, resolution, rho));
  }
}

std::vector<std::pair<double, std::size_t>> levels(const ExperimentConfig& config, std::size_t default_resolution) {
  std::vector<std::pair<double, std::size_t>> out;
  if (config.resolutions.empty()) {
    for (double d : config.deltas) out.emplace_back(d, default_resolution);
  } else if (config.resolutions.size() == config.deltas.size()) {
    for (std::size_t k = 0; k < config.deltas.size(); ++k) out.emplace_back(config.deltas[k], config.resolutions[k]);
  } else {
    for (double d : config.deltas) {
      for (std::size_t m : config.resolutions) out.emplace_back(d, m);
    }
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string config_canonical(const ExperimentConfig& c) {
  nlohmann::json j;
  j["solver"] = c.solver;
  j["deltas"] = c.deltas;
  j["resolutions"] = c.resolutions;
  j["rho"] = c.rhos;
  j["tolerance"] = c.tolerance;
  j["max_iterations"] = c.max_iterations;
  j["seed"] = c.seed;
  j["payoff_mode"] = c.payoff_mode;
  j["samples"] = c.samples;
  j["strategy_resolution"] = c.strategy_resolution;
  return j.dump();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shared state of one run: output files and the provenance list.
struct Session {
  const ExperimentConfig& config;
  fs::path dir;
  ConvergenceReport report;
  std::vector<double> runtimes;
  nlohmann::json provenance = nlohmann::json::array();
  std::string module;
  std::string operation;

  void add(ReportRow row, double runtime) {
    row.runtime_seconds = runtime;
    provenance.push_back({{"module", module},
                          {"operation", operation},
                          {"delta", row.delta},
                          {"resolution", row.resolution},
                          {"rho", row.rho}});
    report.rows.push_back(row);
  }
};

std::string state_name(const GameSpec& spec, std::size_t z) { return spec.states()[z]; }

kernel::PayoffMode payoff_mode(const ExperimentConfig& c) {
  return c.payoff_mode == "frozen" ? kernel::PayoffMode::frozen : kernel::PayoffMode::flow;
}

void run_solve_observed(Session& s, const GameSpec& spec) {
  s.module = "observed";
  s.operation = "solve_general";
  CsvWriter values(s.dir / "values.csv", {"delta", "state", "value"});
  Vector previous;
  for (double delta : s.config.deltas) {
    const auto start = std::chrono::steady_clock::now();
    const ValueTable table = guarded(delta, 0, 0.0, [&] {
      return observed::solve_general(spec, observed::truncated_partition(spec, delta), payoff_mode(s.config));
    });
    const Vector v(table.at(0).begin(), table.at(0).end());
    for (std::size_t z = 0; z < v.size(); ++z) values.row({csv_number(delta), state_name(spec, z), csv_number(v[z])});
    const double error = previous.empty() ? std::numeric_limits<double>::quiet_NaN() : distance_inf(v, previous);
    s.add({delta, 0, spec.evaluation().is_exponential() ? spec.evaluation().rho() : 0.0, error, norm_inf(v)},
          seconds_since(start));
    previous = v;
  }
}

void run_solve_stationary(Session& s, const GameSpec& spec) {
  s.module = "observed";
  s.operation = "solve_stationary_uniform";
  CsvWriter values(s.dir / "values.csv", {"delta", "rho", "state", "value"});
  const observed::IterationOptions options{s.config.tolerance, s.config.max_iterations};
  for (double rho : s.config.rhos) {
    const Vector w = guarded(0.0, 0, rho, [&] { return observed::solve_limit_equation(spec, rho, 0.0, options).w; });
    for (double delta : s.config.deltas) {
      const auto start = std::chrono::steady_clock::now();
      const Vector nu = guarded(delta, 0, rho, [&] { return observed::solve_stationary_uniform(spec, rho, delta, options).w; });
      for (std::size_t z = 0; z < nu.size(); ++z) {
        values.row({csv_number(delta), csv_number(rho), state_name(spec, z), csv_number(nu[z])});
      }
      s.add({delta, 0, rho, distance_inf(nu, w), norm_inf(nu)}, seconds_since(start));
    }
  }
}

void run_limit_eq(Session& s, const GameSpec& spec) {
  s.module = "observed";
  s.operation = "solve_limit_equation";
  CsvWriter values(s.dir / "values.csv", {"rho", "state", "value"});
  const observed::IterationOptions options{s.config.tolerance, s.config.max_iterations};
  for (double rho : s.config.rhos) {
    const auto start = std::chrono::steady_clock::now();
    const observed::StationaryValue w = guarded(0.0, 0, rho, [&] { return observed::solve_limit_equation(spec, rho, 0.0, options); });
    const Vector residual = observed::limit_equation_residual(spec, rho, w.w);
    for (std::size_t z = 0; z < w.w.size(); ++z) values.row({csv_number(rho), state_name(spec, z), csv_number(w.w[z])});
    s.add({w.delta, 0, rho, norm_inf(residual), norm_inf(w.w)}, seconds_since(start));
  }
}

void run_guarantee(Session& s, const GameSpec& spec) {
  s.module = "observed";
  s.operation = "guarantee_check";
  CsvWriter values(s.dir / "values.csv", {"delta", "rho", "state", "value"});
  const observed::IterationOptions options{s.config.tolerance, s.config.max_iterations};
  for (double rho : s.config.rhos) {
    for (double delta : s.config.deltas) {
      const auto start = std::chrono::steady_clock::now();
      const observed::Guarantee g = guarded(delta, 0, rho, [&] { return observed::guarantee_check(spec, rho, delta, options); });
      for (std::size_t z = 0; z < g.lower_bound.size(); ++z) {
        values.row({csv_number(delta), csv_number(rho), state_name(spec, z), csv_number(g.lower_bound[z])});
      }
      s.add({delta, 0, rho, g.gap, norm_inf(g.lower_bound)}, seconds_since(start));
    }
  }
}

std::vector<std::string> belief_header(const GameSpec& spec, std::initializer_list<const char*> lead) {
  std::vector<std::string> h(lead.begin(), lead.end());
  for (std::size_t z = 0; z < spec.num_states(); ++z) h.push_back("zeta_" + spec.states()[z]);
  h.push_back("value");
  return h;
}

std::size_t default_belief_resolution(const GameSpec& spec) {
  return spec.num_states() == 1 ? 1 : spec.num_states() == 2 ? 32 : 16;
}

void run_solve_belief(Session& s, const GameSpec& spec) {
  s.module = "belief";
  s.operation = "solve_belief_general";
  CsvWriter values(s.dir / "values.csv", belief_header(spec, {"delta", "m"}));
  std::optional<belief::BeliefGrid> previous_grid;
  Vector previous;
  for (const auto& [delta, m] : levels(s.config, default_belief_resolution(spec))) {
    const auto start = std::chrono::steady_clock::now();
    belief::BeliefGrid grid(spec.num_states(), m);
    const ValueTable table = guarded(delta, m, 0.0, [&] {
      return belief::solve_belief_general(spec, observed::truncated_partition(spec, delta), grid, payoff_mode(s.config));
    });
    const Vector v(table.at(0).begin(), table.at(0).end());
    double error = std::numeric_limits<double>::quiet_NaN();
    if (previous_grid) {
      error = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        error = std::max(error, std::abs(previous_grid->interpolate(previous, grid.point(k)) - v[k]));
      }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<std::string> row{csv_number(delta), std::to_string(m)};
      for (double c : grid.point(k)) row.push_back(csv_number(c));
      row.push_back(csv_number(v[k]));
      values.row(row);
    }
    s.add({delta, m, spec.evaluation().is_exponential() ? spec.evaluation().rho() : 0.0, error, norm_inf(v)},
          seconds_since(start));
    previous_grid.emplace(grid);
    previous = v;
  }
}

void run_belief_sweep(Session& s, const GameSpec& spec) {
  s.module = "belief";
  s.operation = "refine_and_compare";
  CsvWriter values(s.dir / "values.csv", belief_header(spec, {"delta", "m", "rho"}));
  const observed::IterationOptions options{s.config.tolerance, s.config.max_iterations};
  std::vector<std::size_t> resolutions = s.config.resolutions;
  if (resolutions.empty()) resolutions.push_back(default_belief_resolution(spec));
  for (double rho : s.config.rhos) {
    const auto start = std::chrono::steady_clock::now();
    const auto ladder = guarded(0.0, 0, rho, [&] {
      return belief::refine_and_compare(spec, rho, s.config.deltas, resolutions, options);
    });
    const double runtime = seconds_since(start) / static_cast<double>(ladder.size());
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      const auto& level = ladder[l];
      const belief::BeliefGrid grid(spec.num_states(), level.resolution);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<std::string> row{csv_number(level.delta), std::to_string(level.resolution), csv_number(rho)};
        for (double c : grid.point(k)) row.push_back(csv_number(c));
        row.push_back(csv_number(level.solution.values[k]));
        values.row(row);
      }
      const double error = l == 0 ? std::numeric_limits<double>::quiet_NaN() : level.cauchy_gap;
      s.add({level.delta, level.resolution, rho, error, norm_inf(level.solution.values)}, runtime);
    }
  }
}

constexpr std::size_t kDefaultCells = 40;

Partition diffgame_partition(const diffgame::DiffGameSpec& spec, double delta) {
  return uniform_partition_with_mesh(delta, spec.evaluation().truncation_horizon());
}

std::vector<std::string> diffgame_header(const diffgame::DiffGameSpec& spec, bool sided) {
  std::vector<std::string> h{"delta", "cells"};
  if (sided) h.push_back("side");
  for (std::size_t d = 0; d < spec.dim(); ++d) h.push_back("z" + std::to_string(d));
  h.push_back("value");
  return h;
}

void write_grid_values(CsvWriter& out, const diffgame::StateGrid& grid, double delta, std::size_t cells,
                       const std::string& side, std::span<const double> values) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<std::string> row{csv_number(delta), std::to_string(cells)};
    if (!side.empty()) row.push_back(side);
    const diffgame::State z = grid.node(k);
    for (std::size_t d = 0; d < grid.dim(); ++d) row.push_back(csv_number(z[d]));
    row.push_back(csv_number(values[k]));
    out.row(row);
  }
}

double cauchy(const std::optional<diffgame::StateGrid>& previous_grid, const Vector& previous,
              const diffgame::StateGrid& grid, std::span<const double> values) {
  if (!previous_grid) return std::numeric_limits<double>::quiet_NaN();
  double e = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    e = std::max(e, std::abs(previous_grid->interpolate(previous, grid.node(k)) - values[k]));
  }
  return e;
}

double sup(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void run_diffgame(Session& s, const diffgame::DiffGameSpec& spec, const std::string& kind) {
  s.module = "diffgame";
  s.operation = kind == "diffgame-pure" ? "solve_pure" : kind == "diffgame-relaxed" ? "solve_relaxed" : "solve_random";
  const bool sided = kind != "diffgame-random";
  CsvWriter values(s.dir / "values.csv", diffgame_header(spec, sided));
  std::optional<diffgame::StateGrid> previous_grid;
  Vector previous;
  for (const auto& [delta, cells] : levels(s.config, kDefaultCells)) {
    const auto start = std::chrono::steady_clock::now();
    diffgame::StateGrid grid = diffgame::StateGrid::uniform(spec.box(), cells);
    const Partition partition = diffgame_partition(spec, delta);
    Vector reference;
    double norm = 0.0;
    guarded(delta, cells, 0.0, [&] {
      if (kind == "diffgame-pure") {
        const ValueTable lo = diffgame::solve_pure(spec, partition, grid, diffgame::Side::maxmin);
        const ValueTable up = diffgame::solve_pure(spec, partition, grid, diffgame::Side::minmax);
        write_grid_values(values, grid, delta, cells, "maxmin", lo.at(0));
        write_grid_values(values, grid, delta, cells, "minmax", up.at(0));
        reference.assign(lo.at(0).begin(), lo.at(0).end());
        norm = std::max(sup(lo.at(0)), sup(up.at(0)));
      } else if (kind == "diffgame-relaxed") {
        diffgame::RelaxedOptions options;
        options.strategy_resolution = s.config.strategy_resolution;
        const diffgame::RelaxedValue v = diffgame::solve_relaxed(spec, partition, grid, options);
        write_grid_values(values, grid, delta, cells, "maxmin", v.lower.at(0));
        write_grid_values(values, grid, delta, cells, "minmax", v.upper.at(0));
        const ValueTable mid = v.midpoint();
        reference.assign(mid.at(0).begin(), mid.at(0).end());
        norm = std::max(sup(v.lower.at(0)), sup(v.upper.at(0)));
      } else {
        const ValueTable v = diffgame::solve_random(spec, partition, grid);
        write_grid_values(values, grid, delta, cells, "", v.at(0));
        reference.assign(v.at(0).begin(), v.at(0).end());
        norm = sup(v.at(0));
      }
      return 0;
    });
    s.add({delta, cells, 0.0, cauchy(previous_grid, previous, grid, reference), norm}, seconds_since(start));
    previous_grid.emplace(grid);
    previous = reference;
  }
}

void run_isaacs(Session& s, const diffgame::DiffGameSpec& spec) {
  s.module = "diffgame";
  s.operation = "isaacs_check";
  std::vector<std::string> header{"sample", "t"};
  for (std::size_t d = 0; d < spec.dim(); ++d) header.push_back("z" + std::to_string(d));
  for (std::size_t d = 0; d < spec.dim(); ++d) header.push_back("p" + std::to_string(d));
  header.insert(header.end(), {"pure_gap", "value"});
  CsvWriter values(s.dir / "values.csv", header);
  const auto start = std::chrono::steady_clock::now();
  const double t_max = std::min(spec.evaluation().truncation_horizon(), 10.0);
  const auto samples = diffgame::isaacs_samples(spec, s.config.samples, s.config.seed, t_max);
  const diffgame::IsaacsReport r = diffgame::isaacs_check(spec, samples);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::vector<std::string> row{std::to_string(k), csv_number(samples[k].t)};
    for (std::size_t d = 0; d < spec.dim(); ++d) row.push_back(csv_number(samples[k].z[d]));
    for (std::size_t d = 0; d < spec.dim(); ++d) row.push_back(csv_number(samples[k].p[d]));
    row.push_back(csv_number(r.pure_gaps[k]));
    row.push_back(csv_number(r.mixed_gaps[k]));
    values.row(row);
  }
  s.add({0.0, 0, 0.0, r.max_mixed_gap, r.max_pure_gap}, seconds_since(start));
}

void run_hji(Session& s, const diffgame::DiffGameSpec& spec) {
  s.module = "diffgame";
  s.operation = "hji_residual";
  std::vector<std::string> header{"delta", "cells", "t"};
  for (std::size_t d = 0; d < spec.dim(); ++d) header.push_back("z" + std::to_string(d));
  header.insert(header.end(), {"hessian_bound", "smooth", "value"});
  CsvWriter values(s.dir / "values.csv", header);
  for (const auto& [delta, cells] : levels(s.config, kDefaultCells)) {
    const auto start = std::chrono::steady_clock::now();
    const diffgame::StateGrid grid = diffgame::StateGrid::uniform(spec.box(), cells);
    const Partition partition = diffgame_partition(spec, delta);
    const ValueTable table = guarded(delta, cells, 0.0, [&] { return diffgame::solve_random(spec, partition, grid); });
    std::mt19937_64 rng(s.config.seed);
    double worst = 0.0;
    if (partition.num_stages() < 2 || cells < 3) throw ValidationError("hji-residual: need at least 2 stages and 3 cells");
    std::uniform_int_distribution<std::size_t> pick_time(1, partition.num_stages() - 1);
    for (std::size_t k = 0; k < s.config.samples; ++k) {
      diffgame::State z{};
      for (std::size_t d = 0; d < spec.dim(); ++d) {
        std::uniform_int_distribution<std::size_t> pick_node(1, cells - 1);
        z[d] = grid.box().lower[d] + grid.spacing(d) * static_cast<double>(pick_node(rng));
      }
      const double t = partition.time(pick_time(rng));
      const diffgame::HjiResidual r = diffgame::hji_residual(table, grid, spec, t, z);
      if (r.smooth) worst = std::max(worst, r.residual);
      std::vector<std::string> row{csv_number(delta), std::to_string(cells), csv_number(t)};
      for (std::size_t d = 0; d < spec.dim(); ++d) row.push_back(csv_number(z[d]));
      row.insert(row.end(), {csv_number(r.hessian_bound), r.smooth ? "1" : "0", csv_number(r.residual)});
      values.row(row);
    }
    s.add({delta, cells, 0.0, worst, sup(table.at(0))}, seconds_since(start));
  }
}

bool is_diffgame_solver(const std::string& solver) {
  return solver.rfind("diffgame-", 0) == 0 || solver == "isaacs" || solver == "hji-residual";
}

void write_report(const Session& s) {
  CsvWriter out(s.dir / "report.csv", {"delta", "resolution", "rho", "error", "value_norm"});
  for (const ReportRow& r : s.report.rows) {
    out.row({csv_number(r.delta), std::to_string(r.resolution), csv_number(r.rho), csv_number(r.error),
             csv_number(r.value_norm)});
  }
  CsvWriter timing(s.dir / "timing.csv", {"delta", "resolution", "rho", "seconds"});
  for (const ReportRow& r : s.report.rows) {
    timing.row({csv_number(r.delta), std::to_string(r.resolution), csv_number(r.rho), csv_number(r.runtime_seconds)});
  }
}

void write_manifest(const Session& s, const std::string& spec_text) {
  nlohmann::json m;
  m["library"] = {{"name", "vanish"}, {"version", kLibraryVersion}};
  m["solver"] = s.config.solver;
  m["spec"] = {{"path", s.config.spec_path}, {"fnv1a", hex(fnv1a(spec_text))}};
  const std::string canonical = config_canonical(s.config);
  m["config"] = nlohmann::json::parse(canonical);
  m["config_fnv1a"] = hex(fnv1a(canonical));
  m["outputs"] = {"report.csv", "values.csv", "timing.csv"};
  m["rows"] = s.provenance;
  if (s.report.slope) m["slope"] = *s.report.slope;
  std::ofstream out(s.dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

void write_gnuplot(const Session& s) {
  std::ofstream out(s.dir / "plot.gp", std::ios::binary);
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set logscale xy\n"
      << "set xlabel 'delta'\n"
      << "set ylabel 'error'\n"
      << "set terminal pngcairo size 800,600\n"
      << "set output 'report.png'\n"
      << "plot 'report.csv' using 1:4 with linespoints title '" << s.config.solver << "'\n";
}

}  // namespace

const std::vector<std::string>& solvers() {
  static const std::vector<std::string> names{
      "solve-observed", "solve-stationary", "limit-eq",        "guarantee",      "solve-belief",
      "belief-sweep",   "diffgame-pure",    "diffgame-relaxed", "diffgame-random", "isaacs",
      "hji-residual"};
  return names;
}

void check(const ExperimentConfig& c) {
  if (std::find(solvers().begin(), solvers().end(), c.solver) == solvers().end()) {
    throw ValidationError("config: unknown solver '" + c.solver + "'");
  }
  const bool needs_deltas = c.solver != "limit-eq" && c.solver != "isaacs";
  if (needs_deltas && c.deltas.empty()) throw ValidationError("config: deltas must be nonempty");
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    if (!(c.deltas[k] > 0.0)) throw ValidationError("config: deltas must be positive");
    if (k > 0 && !(c.deltas[k] < c.deltas[k - 1])) throw ValidationError("config: deltas must decrease strictly");
  }
  if (c.rhos.empty()) throw ValidationError("config: rho must be nonempty");
  for (double r : c.rhos) {
    if (!(r > 0.0)) throw ValidationError("config: rho must be positive");
  }
  for (std::size_t m : c.resolutions) {
    if (m == 0) throw ValidationError("config: resolutions must be positive");
  }
  if (!(c.tolerance > 0.0)) throw ValidationError("config: tolerance must be positive");
  if (c.max_iterations == 0) throw ValidationError("config: max_iterations must be positive");
  if (!(c.strategy_resolution > 0.0)) throw ValidationError("config: strategy_resolution must be positive");
  if (c.payoff_mode != "flow" && c.payoff_mode != "frozen") {
    throw ValidationError("config: payoff_mode must be flow or frozen");
  }
  if (c.samples == 0) throw ValidationError("config: samples must be positive");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  auto fail = [&](const YAML::Node& n, const std::string& msg) {
    const int line = n.IsDefined() && !n.Mark().is_null() ? n.Mark().line + 1 : 1;
    throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
  };
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) fail(root, "expected a mapping at the top level");
  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    const YAML::Node& v = kv.second;
    try {
      if (key == "deltas") {
        c.deltas = v.as<std::vector<double>>();
      } else if (key == "resolutions") {
        c.resolutions = v.as<std::vector<std::size_t>>();
      } else if (key == "rho") {
        c.rhos = v.IsSequence() ? v.as<std::vector<double>>() : std::vector<double>{v.as<double>()};
      } else if (key == "tolerance") {
        c.tolerance = v.as<double>();
      } else if (key == "max_iterations") {
        c.max_iterations = v.as<std::size_t>();
      } else if (key == "seed") {
        c.seed = v.as<std::uint64_t>();
      } else if (key == "payoff_mode") {
        c.payoff_mode = v.as<std::string>();
      } else if (key == "samples") {
        c.samples = v.as<std::size_t>();
      } else if (key == "strategy_resolution") {
        c.strategy_resolution = v.as<double>();
      } else if (key == "solver") {
        c.solver = v.as<std::string>();
      } else {
        fail(kv.first, "unknown config field '" + key + "'");
      }
    } catch (const YAML::Exception&) {
      fail(v, "malformed value for '" + key + "'");
    }
  }
  for (std::size_t k = 1; k < c.deltas.size(); ++k) {
    if (!(c.deltas[k] < c.deltas[k - 1])) fail(root["deltas"], "deltas must decrease strictly");
  }
  if (!(c.tolerance > 0.0)) fail(root["tolerance"], "tolerance must be positive");
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

std::optional<double> fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<std::pair<double, double>> points;
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
    if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(y[k])) points.emplace_back(std::log(x[k]), std::log(y[k]));
  }
  if (points.size() < 3) return std::nullopt;
  const std::size_t keep = std::max<std::size_t>(3, (points.size() + 1) / 2);
  const std::size_t first = points.size() - keep;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = first; k < points.size(); ++k) {
    sx += points[k].first;
    sy += points[k].second;
    sxx += points[k].first * points[k].first;
    sxy += points[k].first * points[k].second;
  }
  const double n = static_cast<double>(keep);
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

ConvergenceReport run(const ExperimentConfig& config) {
  check(config);
  Session s{config, fs::path(config.output_dir), {}, {}, nlohmann::json::array(), {}, {}};
  s.report.solver = config.solver;
  const std::string spec_text = read_file(config.spec_path);
  fs::create_directories(s.dir);
  if (is_diffgame_solver(config.solver)) {
    const diffgame::DiffGameSpec spec = parse_diffgame_spec(spec_text, config.spec_path);
    if (config.solver == "isaacs") {
      run_isaacs(s, spec);
    } else if (config.solver == "hji-residual") {
      run_hji(s, spec);
    } else {
      run_diffgame(s, spec, config.solver);
    }
  } else {
    const GameSpec spec = parse_game_spec(spec_text, config.spec_path);
    static const std::map<std::string, std::function<void(Session&, const GameSpec&)>> table{
        {"solve-observed", run_solve_observed}, {"solve-stationary", run_solve_stationary},
        {"limit-eq", run_limit_eq},             {"guarantee", run_guarantee},
        {"solve-belief", run_solve_belief},     {"belief-sweep", run_belief_sweep}};
    table.at(config.solver)(s, spec);
  }
  std::stable_sort(s.report.rows.begin(), s.report.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.delta > b.delta; });
  std::vector<double> x;
  std::vector<double> y;
  for (const ReportRow& r : s.report.rows) {
    x.push_back(r.delta);
    y.push_back(r.error);
  }
  s.report.slope = fit_loglog_slope(x, y);
  write_report(s);
  write_manifest(s, spec_text);
  if (config.gnuplot) write_gnuplot(s);
  return s.report;
}

std::vector<ComparisonRow> compare(const std::string& values_csv_a, const std::string& values_csv_b) {
  const auto a = read_csv(values_csv_a);
  const auto b = read_csv(values_csv_b);
  if (a.empty() || b.empty()) throw ValidationError("compare: empty CSV file");
  if (a.front() != b.front()) throw ValidationError("compare: CSV headers differ");
  const auto& header = a.front();
  const auto value_it = std::find(header.begin(), header.end(), "value");
  if (value_it == header.end()) throw ValidationError("compare: no 'value' column");
  const std::size_t value_col = static_cast<std::size_t>(value_it - header.begin());
  const auto delta_it = std::find(header.begin(), header.end(), "delta");
  const std::optional<std::size_t> delta_col =
      delta_it == header.end() ? std::nullopt : std::optional<std::size_t>(delta_it - header.begin());

  auto key_of = [&](const std::vector<std::string>& row) {
    std::string key;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == value_col) continue;
      key += csv_field(row[c]);
      key += ',';
    }
    return key;
  };
  std::map<std::string, double> lookup;
  for (std::size_t r = 1; r < b.size(); ++r) lookup[key_of(b[r])] = std::stod(b[r].at(value_col));

  std::vector<ComparisonRow> out;
  std::map<std::string, std::size_t> position;
  std::size_t matched = 0;
  for (std::size_t r = 1; r < a.size(); ++r) {
    const std::string key = key_of(a[r]);
    const auto it = lookup.find(key);
    if (it == lookup.end()) throw ValidationError("compare: row without partner: " + key);
    ++matched;
    const std::string group = delta_col ? "delta=" + a[r].at(*delta_col) : "all";
    auto [pos, inserted] = position.emplace(group, out.size());
    if (inserted) out.push_back({group, 0.0});
    out[pos->second].sup_difference =
        std::max(out[pos->second].sup_difference, std::abs(std::stod(a[r].at(value_col)) - it->second));
  }
  if (matched != b.size() - 1) throw ValidationError("compare: files have different row sets");
  return out;
}

}  // namespace vanish::harness

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vanish/belief.hpp"
#include "vanish/diffgame.hpp"
#include "vanish/harness.hpp"
#include "vanish/kernel.hpp"
#include "vanish/matgame.hpp"
#include "vanish/observed.hpp"
#include "vanish/spec_io.hpp"

using namespace vanish;

namespace {

const std::string kExamples = VANISH_EXAMPLES;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<void(Outcome&)> body;
};

oracle::Dense dense(const Matrix& m) {
  oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

double ratio_spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

void matrix_duality(Outcome& out) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = -1.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t a = 2 + k % 7, b = 2 + (k / 7) % 7;
    Matrix m(a, b);
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) m(i, j) = u(rng);
    const auto sol = matgame::solve(m);
    double sx = 0.0, sy = 0.0;
    for (double v : sol.x) sx += v;
    for (double v : sol.y) sy += v;
    out.require(std::abs(sx - 1.0) <= 1e-10 && std::abs(sy - 1.0) <= 1e-10, "strategies sum to 1");
    worst = std::max(worst, matgame::certificate_gap(m, sol));
  }
  out.require(worst <= 1e-9, "certificate gap");
  out.detail << "max certificate gap " << worst;

  double closed_err = 0.0;
  std::size_t interior = 0;
  for (int k = 0; interior < 50 && k < 10000; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Matrix m = Matrix::from_rows({{a, b}, {c, d}});
    if (matgame::lower_pure_value(m) == matgame::upper_pure_value(m)) continue;
    ++interior;
    closed_err = std::max(closed_err, std::abs(matgame::value(m) - (a * d - b * c) / (a - b - c + d)));
  }
  closed_err = std::max(closed_err, std::abs(matgame::value(Matrix::from_rows({{3, 0}, {1, 2}})) - 1.5));
  out.require(closed_err <= 1e-10, "2x2 closed form");
  out.detail << ", 2x2 closed-form error " << closed_err << " over " << interior + 1 << " games";
}

void kernel_semigroup(Outcome& out) {
  double semi = 0.0, rows = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::size_t s = 2 + seed % 9;
    const GameSpec g = random_instance(seed, s, 1, 1, 0.5 + static_cast<double>(seed % 4));
    const RateMatrix& q = g.rates(0, 0);
    for (double a : {0.1, 0.5, 1.0})
      for (double b : {0.1, 0.5, 1.0}) {
        const auto pab = kernel::transition(q, a + b);
        semi = std::max(semi, norm_inf(pab.matrix() - kernel::transition(q, a).matrix() * kernel::transition(q, b).matrix()));
        for (std::size_t r = 0; r < s; ++r) {
          double total = 0.0;
          for (std::size_t c = 0; c < s; ++c) total += pab(r, c);
          rows = std::max(rows, std::abs(total - 1.0));
        }
      }
  }
  out.require(semi <= 1e-9, "semigroup");
  out.require(rows <= 1e-10, "row sums");
  out.detail << "semigroup defect " << semi << ", row-sum defect " << rows;
}

void uncontrolled_oracle(Outcome& out) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::size_t s = 1 + seed % 10;
    const double rho = 0.25 + 0.1 * static_cast<double>(seed % 20);
    const GameSpec g = testing_support::uncontrolled(random_instance(seed, s, 1, 1, 1.0 + static_cast<double>(seed % 3)));
    oracle::Dense a = dense(g.rates(0, 0).matrix());
    std::vector<double> b(s);
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) a[r][c] = (r == c ? rho : 0.0) - a[r][c];
      b[r] = rho * g.payoff(r, 0, 0);
    }
    const auto ref = oracle::solve(a, b);
    out.require(ref.has_value(), "oracle solve");
    if (!ref) continue;
    const auto w = observed::solve_limit_equation(g, rho);
    for (std::size_t z = 0; z < s; ++z) worst = std::max(worst, std::abs(w.w[z] - (*ref)[z]));
  }
  out.require(worst <= 1e-8, "limit equation vs linear solve");
  out.detail << "max deviation " << worst;
}

void limit_uniqueness(Outcome& out) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GameSpec g = random_instance(seed, 1 + seed % 5, 1 + seed % 3, 1 + (seed / 3) % 3, 1.0);
    const double base = observed::default_reduction_step(g, 1.0);
    const auto a = observed::solve_limit_equation(g, 1.0, base);
    const auto b = observed::solve_limit_equation(g, 1.0, 0.3 * base);
    worst = std::max(worst, distance_inf(a.w, b.w));
  }
  out.require(worst <= 1e-7, "reduction-step independence");
  out.detail << "max difference " << worst;
}

void vanishing_convergence(Outcome& out) {
  const GameSpec g = load_game_spec(kExamples + "/game_3state.yaml");
  const auto w = observed::solve_limit_equation(g, 1.0);
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  std::vector<double> errors;
  for (double d : deltas) errors.push_back(distance_inf(observed::solve_stationary_uniform(g, 1.0, d).w, w.w));
  for (std::size_t k = 1; k < errors.size(); ++k) out.require(errors[k] < errors[k - 1], "monotone decrease");
  const auto slope = harness::fit_loglog_slope(deltas, errors);
  out.require(slope && *slope >= 0.8 && *slope <= 1.2, "slope in [0.8, 1.2]");
  out.detail << "errors";
  for (double e : errors) out.detail << ' ' << e;
  if (slope) out.detail << ", slope " << *slope;
}

void stationary_factorization(Outcome& out) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double rho = 0.5 + 0.25 * static_cast<double>(seed % 4);
    const GameSpec g = random_instance(seed, 1 + seed % 4, 2, 2, 1.0, Evaluation::exponential(rho, 1e-9));
    const double delta = 0.1;
    const Partition p = observed::truncated_partition(g, delta);
    const ValueTable v = observed::solve_general(g, p);
    const auto nu = observed::solve_stationary_uniform(g, rho, delta, {1e-11});
    for (std::size_t n = 0; n < p.num_stages(); ++n)
      for (std::size_t z = 0; z < g.num_states(); ++z)
        worst = std::max(worst, std::abs(v.at(n)[z] - std::exp(-rho * p.time(n)) * nu.w[z]));
  }
  out.require(worst <= 1e-7, "factorization");
  out.detail << "max deviation " << worst;
}

void guarantee(Outcome& out) {
  const GameSpec g = load_game_spec(kExamples + "/game_3state.yaml");
  std::vector<double> gaps, per_delta;
  for (double d : {0.2, 0.1, 0.05}) {
    const auto r = observed::guarantee_check(g, 1.0, d);
    for (std::size_t z = 0; z < 3; ++z) out.require(r.lower_bound[z] >= r.limit_value[z] - r.gap - 1e-12, "lower bound");
    gaps.push_back(r.gap);
    per_delta.push_back(r.gap / d);
  }
  out.detail << "gaps";
  for (double v : gaps) out.detail << ' ' << v;
  out.detail << ", ratios";
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    const double r = gaps[k] / gaps[k - 1];
    out.detail << ' ' << r;
    out.require(r >= 0.3 && r <= 0.7, "halving ratio in [0.3, 0.7]");
  }
  out.require(ratio_spread(per_delta) <= 2.0, "gap/delta bounded");
}

void belief_oracles(Outcome& out) {
  const GameSpec single = testing_support::static_game(Matrix::from_rows({{3, 0}, {1, 2}}), Evaluation::exponential(1.0));
  const Partition p = uniform_partition(3.0, 30);
  const double a = std::abs(belief::solve_belief_general(single, p, belief::BeliefGrid(1, 1)).at(0)[0] -
                            observed::solve_general(single, p).at(0)[0]);
  out.require(a <= 1e-8, "(a) single state");

  const GameSpec chain = testing_support::uncontrolled(random_instance(1, 2, 2, 2, 1.0));
  const belief::BeliefGrid grid(2, 32);
  const auto v = belief::solve_belief_stationary(chain, 1.0, 0.1, grid);
  const auto w = observed::solve_limit_equation(chain, 1.0);
  double b = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) b = std::max(b, std::abs(v.values[k] - dot(grid.point(k), w.w)));
  out.require(b <= 1e-7, "(b) uncontrolled chain");

  const Matrix m = Matrix::from_rows({{3, 0}, {1, 2}});
  const GameSpec blind = testing_support::state_blind(random_instance(2, 2, 2, 2, 1.0), m);
  const auto vb = belief::solve_belief_stationary(blind, 1.0, 0.1, grid);
  double c = 0.0;
  for (double x : vb.values) c = std::max(c, std::abs(x - vb.values.front()));
  c = std::max(c, std::abs(vb.values.front() - 1.5));
  out.require(c <= 1e-7, "(c) state-blind payoff");
  out.detail << "(a) " << a << ", (b) " << b << ", (c) " << c;
}

void belief_refinement(Outcome& out) {
  const GameSpec g = load_game_spec(kExamples + "/game_2state.yaml");
  const std::vector<double> deltas{0.1, 0.05, 0.025};
  const std::vector<std::size_t> ms{16, 32, 64};
  const auto levels = belief::refine_and_compare(g, 1.0, deltas, ms);
  out.detail << "sup gaps";
  for (std::size_t k = 1; k < levels.size(); ++k) out.detail << ' ' << levels[k].cauchy_gap;
  for (std::size_t k = 2; k < levels.size(); ++k) out.require(levels[k].cauchy_gap < levels[k - 1].cauchy_gap, "decreasing");
}

void differential_suite(Outcome& out) {
  using namespace diffgame;
  const std::vector<std::string> names{"matching_pennies", "drift_1d", "linear_1d", "pursuit_2d"};
  // (a) and (c)
  double order_violation = 0.0, mixed = 0.0;
  for (const auto& name : names) {
    const DiffGameSpec g = load_diffgame_spec(kExamples + "/" + name + ".yaml");
    const Partition p = uniform_partition_with_mesh(0.1, std::min(2.0, g.evaluation().truncation_horizon()));
    const StateGrid grid = StateGrid::uniform(g.box(), g.dim() == 1 ? 40 : 16);
    const ValueTable lo = solve_pure(g, p, grid, Side::maxmin);
    const ValueTable hi = solve_pure(g, p, grid, Side::minmax);
    const ValueTable mid = solve_random(g, p, grid);
    for (std::size_t n = 0; n <= p.num_stages(); ++n)
      for (std::size_t k = 0; k < grid.size(); ++k)
        order_violation = std::max({order_violation, lo.at(n)[k] - mid.at(n)[k], mid.at(n)[k] - hi.at(n)[k]});
    mixed = std::max(mixed, isaacs_check(g, isaacs_samples(g, 100, 1)).max_mixed_gap);
  }
  out.require(order_violation <= 1e-9, "(a) pure bounds");
  out.require(mixed <= 1e-9, "(c) mixed Isaacs gap");

  // (b)
  const DiffGameSpec mp = load_diffgame_spec(kExamples + "/matching_pennies.yaml");
  const Partition pm = observed::truncated_partition(
      GameSpec({"s"}, {"a"}, {"b"}, {Matrix(1, 1)}, {RateMatrix::zero(1)}, mp.evaluation()), 0.1);
  const StateGrid gm = StateGrid::uniform(mp.box(), 4);
  const double mass = mp.evaluation().mass(0.0, pm.horizon());
  const double b_value = solve_random(mp, pm, gm).sup_norm();
  const double b_gap = solve_pure(mp, pm, gm, Side::minmax).at(0)[2] - solve_pure(mp, pm, gm, Side::maxmin).at(0)[2];
  out.require(b_value <= 1e-8, "(b) mixed value 0");
  out.require(std::abs(b_gap - 2.0 * mass) <= 1e-9, "(b) pure gap 2*mass");

  // (d)
  const DiffGameSpec drift = load_diffgame_spec(kExamples + "/drift_1d.yaml");
  const GameSpec clock({"s"}, {"a"}, {"b"}, {Matrix(1, 1)}, {RateMatrix::zero(1)}, drift.evaluation());
  double phi = 0.0, hji = 0.0;
  {
    const Partition p = observed::truncated_partition(clock, 0.025);
    const StateGrid grid = StateGrid::uniform(drift.box(), 160);
    const ValueTable v = solve_random(drift, p, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const State z = grid.node(k);
      if (std::abs(z[0]) > 4.0) continue;
      phi = std::max(phi, std::abs(v.at(0)[k] - z[0]));
      if (std::abs(z[0]) <= 1.0) hji = std::max(hji, hji_residual(v, grid, drift, p.time(20), z).residual);
    }
  }
  out.require(phi <= 1e-2, "(d) stationary value z");
  out.require(hji <= 1e-3, "(d) HJI residual");

  // (e)
  const DiffGameSpec lin = load_diffgame_spec(kExamples + "/linear_1d.yaml");
  std::vector<double> gaps;
  std::size_t flagged = 0;
  for (auto [delta, cells] : {std::pair{0.1, 40u}, std::pair{0.05, 80u}, std::pair{0.025, 160u}}) {
    const Partition p = uniform_partition_with_mesh(delta, 1.0);
    const StateGrid grid = StateGrid::uniform(lin.box(), cells);
    const RelaxedValue r = solve_relaxed(lin, p, grid);
    flagged += r.flagged_cells;
    const ValueTable rnd = solve_random(lin, p, grid);
    const ValueTable relaxed = r.midpoint();
    double d = 0.0;
    for (std::size_t n = 0; n <= p.num_stages(); ++n)
      for (std::size_t k = 0; k < grid.size(); ++k) d = std::max(d, std::abs(relaxed.at(n)[k] - rnd.at(n)[k]));
    gaps.push_back(d);
  }
  for (std::size_t k = 1; k < gaps.size(); ++k) out.require(gaps[k] < 0.7 * gaps[k - 1], "(e) ratio < 0.7");
  out.detail << "(a) " << order_violation << ", (b) " << b_value << " / gap " << b_gap << " vs " << 2.0 * mass << ", (c) "
             << mixed << ", (d) " << phi << " / residual " << hji << ", (e)";
  for (double g : gaps) out.detail << ' ' << g;
  out.detail << " flagged " << flagged;
}

void lifted_cross_check(Outcome& out) {
  const GameSpec g = load_game_spec(kExamples + "/game_2state.yaml");
  std::vector<Vector> beliefs;
  for (int k = 0; k < 10; ++k) {
    const double a = (static_cast<double>(k) + 0.5) / 10.0;
    beliefs.push_back({a, 1.0 - a});
  }
  std::vector<double> worst;
  for (auto [delta, cells] : {std::pair{0.1, 32u}, std::pair{0.05, 64u}}) {
    const auto checks = observed::lift_check(g, observed::truncated_partition(g, delta), beliefs, cells);
    double w = 0.0;
    for (const auto& c : checks) w = std::max(w, c.gap);
    worst.push_back(w);
  }
  out.require(worst.back() <= 5e-2, "gap within 5e-2");
  out.require(worst[1] < worst[0], "gap shrinks");
  out.detail << "max gaps " << worst[0] << " (1/32, .1) " << worst[1] << " (1/64, .05)";
}

void flow_vs_frozen(Outcome& out) {
  double spread = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GameSpec g = random_instance(seed, 2 + seed % 3, 2, 2, 1.0);
    std::vector<double> c;
    for (double d : {0.2, 0.1, 0.05}) {
      const Partition p = observed::truncated_partition(g, d);
      const ValueTable a = observed::solve_general(g, p);
      const ValueTable b = observed::solve_general(g, p, kernel::PayoffMode::frozen);
      double sup = 0.0;
      for (std::size_t n = 0; n < a.num_times(); ++n)
        for (std::size_t z = 0; z < a.width(); ++z) sup = std::max(sup, std::abs(a.at(n)[z] - b.at(n)[z]));
      c.push_back(sup / d);
    }
    spread = std::max(spread, ratio_spread(c));
  }
  out.require(spread <= 2.0, "C stable");
  out.detail << "worst max/min of sup/delta " << spread;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "matrix-game duality", 5, matrix_duality},
      {2, "kernel semigroup", 5, kernel_semigroup},
      {3, "uncontrolled limit equation", 5, uncontrolled_oracle},
      {4, "limit-equation uniqueness", 30, limit_uniqueness},
      {5, "vanishing-duration convergence", 60, vanishing_convergence},
      {6, "stationary factorization", 60, stationary_factorization},
      {7, "guarantee check", 60, guarantee},
      {8, "belief-game oracles", 120, belief_oracles},
      {9, "belief-game refinement", 300, belief_refinement},
      {10, "differential-game suite", 300, differential_suite},
      {11, "lifted-game cross-check", 300, lifted_cross_check},
      {12, "flow vs frozen payoff", 60, flow_vs_frozen},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.limit_seconds) {
      out.pass = false;
      out.detail << " [failed: runtime over " << c.limit_seconds << " s]";
    }
    std::printf("%s criterion %2d %-32s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                out.detail.str().c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

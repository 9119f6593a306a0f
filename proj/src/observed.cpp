#include "vanish/observed.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vanish/diffgame.hpp"
#include "vanish/errors.hpp"
#include "vanish/matgame.hpp"

namespace vanish::observed {

namespace {

// Discounted game with stage payoffs (S × A·B, column i·B + j), per-pair
// transitions and discount factor beta.
struct DiscreteGame {
  std::size_t num_actions1 = 0;
  std::size_t num_actions2 = 0;
  Matrix payoffs;
  std::vector<Matrix> transitions;
  double beta = 0.0;
};

Matrix stage_game(const DiscreteGame& game, std::size_t z, std::span<const double> v) {
  Matrix m(game.num_actions1, game.num_actions2);
  for (std::size_t p = 0; p < game.transitions.size(); ++p) {
    m(p / game.num_actions2, p % game.num_actions2) =
        game.payoffs(z, p) + game.beta * dot(game.transitions[p].row(z), v);
  }
  return m;
}

Vector shapley(const DiscreteGame& game, std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t z = 0; z < v.size(); ++z) out[z] = matgame::value(stage_game(game, z, v));
  return out;
}

std::size_t iterate(const std::function<Vector(const Vector&)>& op, double beta, Vector& v,
                    const IterationOptions& options, const char* who) {
  // ‖v_{k+1} − v*‖ <= β/(1−β) ‖v_{k+1} − v_k‖.
  const double threshold = beta > 0.0 ? options.tolerance * (1.0 - beta) / beta : 0.0;
  for (std::size_t k = 1; k <= options.max_iterations; ++k) {
    Vector next = op(v);
    const double step = distance_inf(next, v);
    v = std::move(next);
    if (step <= threshold) return k;
  }
  std::ostringstream msg;
  msg << who << ": no convergence after " << options.max_iterations << " iterations (beta = " << beta << ")";
  throw ConvergenceError(msg.str());
}

DiscreteGame uniform_discretization(const GameSpec& spec, double rho, double delta) {
  const GameSpec discounted = spec.with_evaluation(Evaluation::exponential(rho));
  const kernel::StageModel model(discounted, delta);
  DiscreteGame game{spec.num_actions1(), spec.num_actions2(), model.payoffs_at(0.0), {}, std::exp(-rho * delta)};
  for (std::size_t i = 0; i < spec.num_actions1(); ++i) {
    for (std::size_t j = 0; j < spec.num_actions2(); ++j) game.transitions.push_back(model.transition(i, j).matrix());
  }
  return game;
}

bool valid_reduction(const GameSpec& spec, double rho, double delta) {
  return delta * rho < 1.0 && delta * spec.rate_norm() / (1.0 - delta * rho) <= 1.0;
}

}  // namespace

ValueTable solve_general(const GameSpec& spec, const Partition& partition, kernel::PayoffMode mode) {
  const std::size_t s = spec.num_states();
  const std::size_t b = spec.num_actions2();
  ValueTable table(partition.knots(), s);
  std::map<std::int64_t, kernel::StageModel> models;
  Matrix m(spec.num_actions1(), b);
  for (std::size_t n = partition.num_stages(); n-- > 0;) {
    const double delta = partition.duration(n);
    const auto key = std::llround(delta * 1e12);
    auto it = models.find(key);
    if (it == models.end()) it = models.emplace(key, kernel::StageModel(spec, delta, mode)).first;
    const kernel::StageModel& model = it->second;
    const Matrix payoffs = model.payoffs_at(partition.time(n));
    const auto next = table.at(n + 1);
    auto current = table.at(n);
    for (std::size_t z = 0; z < s; ++z) {
      for (std::size_t p = 0; p < payoffs.cols(); ++p) {
        m(p / b, p % b) = payoffs(z, p) + dot(model.transition(p / b, p % b).matrix().row(z), next);
      }
      current[z] = matgame::value(m);
    }
  }
  return table;
}

Partition truncated_partition(const GameSpec& spec, double delta) {
  return uniform_partition_with_mesh(delta, spec.evaluation().truncation_horizon());
}

StationaryValue solve_stationary_uniform(const GameSpec& spec, double rho, double delta,
                                         const IterationOptions& options) {
  if (!(rho > 0.0) || !(delta > 0.0)) throw std::invalid_argument("solve_stationary_uniform: rho and delta must be positive");
  const DiscreteGame game = uniform_discretization(spec, rho, delta);
  StationaryValue out;
  out.w.assign(spec.num_states(), 0.0);
  out.rho = rho;
  out.delta = delta;
  out.method = Method::fixed_point;
  out.iterations = iterate([&](const Vector& v) { return shapley(game, v); }, game.beta, out.w, options,
                           "solve_stationary_uniform");
  return out;
}

double default_reduction_step(const GameSpec& spec, double rho) { return 0.5 / (spec.rate_norm() + rho); }

StationaryValue solve_limit_equation(const GameSpec& spec, double rho, double delta_reduction,
                                     const IterationOptions& options) {
  if (!(rho > 0.0)) throw std::invalid_argument("solve_limit_equation: rho must be positive");
  double delta = delta_reduction > 0.0 ? delta_reduction : default_reduction_step(spec, rho);
  while (!valid_reduction(spec, rho, delta)) delta *= 0.5;

  const std::size_t s = spec.num_states();
  const double factor = 1.0 - delta * rho;
  DiscreteGame game{spec.num_actions1(), spec.num_actions2(), Matrix(s, spec.num_actions1() * spec.num_actions2()),
                    {}, factor};
  for (std::size_t i = 0; i < spec.num_actions1(); ++i) {
    for (std::size_t j = 0; j < spec.num_actions2(); ++j) {
      Matrix p = Matrix::identity(s);
      p += (delta / factor) * spec.rates(i, j).matrix();
      game.transitions.push_back(std::move(p));
      for (std::size_t z = 0; z < s; ++z) game.payoffs(z, i * spec.num_actions2() + j) = delta * rho * spec.payoff(z, i, j);
    }
  }
  StationaryValue out;
  out.w.assign(s, 0.0);
  out.rho = rho;
  out.delta = delta;
  out.method = Method::limit_equation;
  out.iterations = iterate([&](const Vector& v) { return shapley(game, v); }, factor, out.w, options,
                           "solve_limit_equation");
  return out;
}

namespace {

Matrix limit_stage_game(const GameSpec& spec, double rho, std::size_t z, std::span<const double> w) {
  Matrix m(spec.num_actions1(), spec.num_actions2());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      m(i, j) = rho * spec.payoff(z, i, j) + dot(spec.rates(i, j).matrix().row(z), w);
    }
  }
  return m;
}

}  // namespace

Vector limit_equation_residual(const GameSpec& spec, double rho, std::span<const double> w) {
  Vector out(spec.num_states());
  for (std::size_t z = 0; z < out.size(); ++z) {
    out[z] = std::abs(rho * w[z] - matgame::value(limit_stage_game(spec, rho, z, w)));
  }
  return out;
}

StageStrategies limit_equation_strategies(const GameSpec& spec, double rho, std::span<const double> w) {
  StageStrategies out;
  for (std::size_t z = 0; z < spec.num_states(); ++z) {
    matgame::MatrixGameSolution sol = matgame::solve(limit_stage_game(spec, rho, z, w));
    out.x.push_back(std::move(sol.x));
    out.y.push_back(std::move(sol.y));
  }
  return out;
}

Guarantee guarantee_check(const GameSpec& spec, double rho, double delta, const IterationOptions& options) {
  Guarantee out;
  out.limit_value = solve_limit_equation(spec, rho, 0.0, options).w;
  const StageStrategies strategies = limit_equation_strategies(spec, rho, out.limit_value);
  const DiscreteGame game = uniform_discretization(spec, rho, delta);
  const std::size_t s = spec.num_states();
  const std::size_t a = spec.num_actions1();
  const std::size_t b = spec.num_actions2();
  auto best_reply = [&](const Vector& u) {
    Vector next(s);
    for (std::size_t z = 0; z < s; ++z) {
      const Matrix m = stage_game(game, z, u);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < b; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < a; ++i) v += strategies.x[z][i] * m(i, j);
        best = std::min(best, v);
      }
      next[z] = best;
    }
    return next;
  };
  out.lower_bound.assign(s, 0.0);
  iterate(best_reply, game.beta, out.lower_bound, options, "guarantee_check");
  out.gap = distance_inf(out.limit_value, out.lower_bound);
  return out;
}

std::vector<LiftCheck> lift_check(const GameSpec& spec, const Partition& partition,
                                  const std::vector<Vector>& beliefs, std::size_t cells) {
  for (const Vector& b : beliefs) {
    if (b.size() != spec.num_states()) throw std::invalid_argument("lift_check: belief has the wrong size");
  }
  const ValueTable observed = solve_general(spec, partition);
  const diffgame::DiffGameSpec lifted = diffgame::lift_observed_game(spec);
  const diffgame::StateGrid grid = diffgame::StateGrid::uniform(lifted.box(), cells);
  const ValueTable table = diffgame::solve_random(lifted, partition, grid);
  std::vector<LiftCheck> out;
  for (const Vector& b : beliefs) {
    LiftCheck c;
    c.lhs = dot(b, observed.at(0));
    diffgame::State zeta{};
    std::copy(b.begin(), b.end(), zeta.begin());
    c.rhs = grid.interpolate(table.at(0), zeta);
    c.gap = std::abs(c.lhs - c.rhs);
    out.push_back(c);
  }
  return out;
}

LiftCheck lift_check(const GameSpec& spec, const Partition& partition, std::span<const double> belief,
                     std::size_t cells) {
  return lift_check(spec, partition, std::vector<Vector>{Vector(belief.begin(), belief.end())}, cells).front();
}

}  // namespace vanish::observed

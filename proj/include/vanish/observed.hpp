#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vanish/game.hpp"
#include "vanish/kernel.hpp"
#include "vanish/linalg.hpp"

namespace vanish::observed {

struct IterationOptions {
  /// Target sup-norm distance to the fixed point.
  double tolerance = 1e-9;
  std::size_t max_iterations = 10'000'000;
};

enum class Method { fixed_point, limit_equation };

/// Stationary value of the observed-state game with discount ρ.
struct StationaryValue {
  Vector w;
  double rho = 0.0;
  Method method = Method::fixed_point;
  /// Stage duration of the discretization, or the reduction step for the limit equation.
  double delta = 0.0;
  std::size_t iterations = 0;
};

/// Backward induction over the partition: zero terminal value, and at every
/// decision time the matrix game of stage payoff plus propagated continuation.
/// Transitions and stage payoffs are cached per distinct stage duration.
ValueTable solve_general(const GameSpec& spec, const Partition& partition,
                         kernel::PayoffMode mode = kernel::PayoffMode::flow);

/// Uniform partition with mesh δ reaching the evaluation's truncation horizon.
Partition truncated_partition(const GameSpec& spec, double delta);

/// ν_{δ,ρ}: fixed point of ν ↦ val[stage payoff over [0, δ] + e^{−ρδ} P^δ ν],
/// iterated from 0. Throws ConvergenceError past the iteration cap.
StationaryValue solve_stationary_uniform(const GameSpec& spec, double rho, double delta,
                                         const IterationOptions& options = {});

/// 0.5 / (Λ + ρ), Λ the largest uniformization rate of the game.
double default_reduction_step(const GameSpec& spec, double rho);

/// W_ρ, the solution of ρW = val[ρg + qW], computed as the value of the
/// discrete game with transitions Id + δq/(1 − δρ) and discount factor
/// 1 − δρ. A step that makes some transition invalid is halved until valid;
/// delta_reduction <= 0 selects default_reduction_step().
StationaryValue solve_limit_equation(const GameSpec& spec, double rho, double delta_reduction = 0.0,
                                     const IterationOptions& options = {});

/// Per-state |ρW(z) − val[ρg(z, ·, ·) + (q(·, ·) W)(z)]|.
Vector limit_equation_residual(const GameSpec& spec, double rho, std::span<const double> w);

/// Optimal mixed actions of both players in the per-state stage games of the
/// limit equation at W.
struct StageStrategies {
  std::vector<Vector> x;
  std::vector<Vector> y;
};
StageStrategies limit_equation_strategies(const GameSpec& spec, double rho, std::span<const double> w);

struct Guarantee {
  Vector limit_value;
  /// Player 2's optimal value against Player 1's stationary strategy.
  Vector lower_bound;
  /// max over states of |W_ρ(z) − lower_bound(z)|.
  double gap = 0.0;
};

/// Player 1 plays the stationary strategy optimal in the limit-equation stage
/// games; Player 2's best reply in the δ-discretized game is found by value
/// iteration on the resulting discounted decision process.
Guarantee guarantee_check(const GameSpec& spec, double rho, double delta, const IterationOptions& options = {});

struct LiftCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

/// Compares ⟨ζ, v_Π(0, ·)⟩ with the value at ζ of the random-action
/// discretization of the game lifted to beliefs, on a uniform grid of
/// [0, 1]^S with `cells` cells per axis.
LiftCheck lift_check(const GameSpec& spec, const Partition& partition, std::span<const double> belief,
                     std::size_t cells);
/// Same comparison at several beliefs, sharing one solve of each side.
std::vector<LiftCheck> lift_check(const GameSpec& spec, const Partition& partition,
                                  const std::vector<Vector>& beliefs, std::size_t cells);

}  // namespace vanish::observed

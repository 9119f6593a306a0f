#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vanish/game.hpp"
#include "vanish/linalg.hpp"
#include "vanish/quadrature.hpp"

namespace vanish::kernel {

/// Transition matrix P^h = exp(h q): entries >= 0, rows summing to 1.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  StochasticMatrix(Matrix entries, double horizon) : entries_(std::move(entries)), horizon_(horizon) {}

  const Matrix& matrix() const { return entries_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return entries_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return entries_(r, c); }

 private:
  Matrix entries_;
  double horizon_ = 0.0;
};

/// exp(h q) by uniformization: with Λ = max_z |q[z][z]| and B = Id + q/Λ,
/// exp(hq) = Σ_k Pois(k; Λh) B^k, truncated once the Poisson tail is below
/// 1e-13. Every partial sum is a nonnegative combination of stochastic
/// matrices. Throws std::invalid_argument for h < 0.
StochasticMatrix transition(const RateMatrix& q, double h);

/// ζᵀP. Throws std::invalid_argument unless ζ lies in the simplex within 1e-10.
Vector push_belief(std::span<const double> belief, const StochasticMatrix& p);

/// (P ∘ f)(z) = Σ_z' P[z, z'] f(z').
Vector act_on_function(const StochasticMatrix& p, std::span<const double> f);
Vector act_on_function(const RateMatrix& q, std::span<const double> f);

/// How the payoff flow inside a stage is integrated.
enum class PayoffMode {
  /// ∫ k(t_n + s) g(Z_s, i, j) ds with Z_s following the chain.
  flow,
  /// g(Z_{t_n}, i, j) ∫ k(t_n + s) ds with the state frozen at the stage start.
  frozen,
};

/// ∫_0^δ k(t_n + s) [e^{s q(i,j)} g(·, i, j)](z) ds.
/// Exponential evaluations use the closed form
///   e^{−ρ t_n} [ρ (ρ Id − q)^{−1} (Id − e^{−ρδ} e^{δq}) g](z);
/// tabulated ones use composite 8-point Gauss–Legendre with four panels.
/// Throws std::runtime_error if ρ Id − q has condition number above 1e12.
double stage_payoff(const GameSpec& spec, std::size_t z, std::size_t i, std::size_t j, double t_n,
                    double delta);

/// g(z, i, j) ∫_{t_n}^{t_n + δ} k(s) ds.
double stage_payoff_frozen(const GameSpec& spec, std::size_t z, std::size_t i, std::size_t j,
                           double t_n, double delta);

/// Per-duration cache of transitions and stage-payoff data for every action
/// pair. Read-only after construction; keeps a reference to `spec`, which
/// must outlive the model.
class StageModel {
 public:
  StageModel(const GameSpec& spec, double delta, PayoffMode mode = PayoffMode::flow);

  double delta() const { return delta_; }
  PayoffMode mode() const { return mode_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions1() const { return num_actions1_; }
  std::size_t num_actions2() const { return num_actions2_; }

  const StochasticMatrix& transition(std::size_t i, std::size_t j) const {
    return transitions_[i * num_actions2_ + j];
  }

  /// Stage payoffs for a stage starting at t: entry (z, i·B + j).
  Matrix payoffs_at(double t) const;

 private:
  const GameSpec* spec_;
  double delta_;
  PayoffMode mode_;
  std::size_t num_states_;
  std::size_t num_actions1_;
  std::size_t num_actions2_;
  std::vector<StochasticMatrix> transitions_;
  // Exponential flow: stage payoff vector for a stage starting at t = 0.
  std::vector<Vector> base_payoff_;
  // Tabulated flow: quadrature offsets and e^{s q} g at each offset, per pair.
  QuadratureRule rule_;
  std::vector<std::vector<Vector>> propagated_payoff_;
};

}  // namespace vanish::kernel

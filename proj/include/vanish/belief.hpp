#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vanish/game.hpp"
#include "vanish/kernel.hpp"
#include "vanish/linalg.hpp"
#include "vanish/observed.hpp"

namespace vanish::belief {

inline constexpr std::size_t kMaxStates = 4;

/// Points of the simplex Δ(Ω) with coordinates in (1/m)ℤ, with piecewise-linear
/// interpolation on the Freudenthal (Kuhn) triangulation.
///
/// Points are addressed through cumulative coordinates y_k = m Σ_{l>=k} ζ_l,
/// k = 1 … S−1, which map the simplex onto m ≥ y_1 ≥ … ≥ y_{S−1} ≥ 0. The
/// triangulation is the Kuhn triangulation of the unit cubes in y, so the
/// interpolant is continuous, exact on affine functions, and its weights are
/// nonnegative and sum to 1.
class BeliefGrid {
 public:
  /// Throws std::invalid_argument unless 1 <= S <= 4 and m >= 1.
  BeliefGrid(std::size_t num_states, std::size_t resolution);

  struct Weights {
    std::array<std::uint32_t, kMaxStates> index{};
    std::array<double, kMaxStates> weight{};
    std::uint8_t count = 0;
  };

  std::size_t num_states() const { return num_states_; }
  std::size_t resolution() const { return resolution_; }
  std::size_t size() const { return points_.size() / num_states_; }
  std::span<const double> point(std::size_t k) const { return {points_.data() + k * num_states_, num_states_}; }
  /// Index of the point with integer coordinates `counts` (summing to m), or size() if absent.
  std::size_t index_of(std::span<const std::size_t> counts) const;
  Weights weights(std::span<const double> belief) const;
  double interpolate(std::span<const double> values, std::span<const double> belief) const;

 private:
  std::size_t num_states_;
  std::size_t resolution_;
  std::vector<double> points_;
  // Dense table over cumulative coordinates in [0, m]^{S−1}; unused cells hold size().
  std::vector<std::uint32_t> lookup_;
};

double apply_weights(const BeliefGrid::Weights& w, std::span<const double> values);

/// ζ P^δ(i, j).
Vector belief_step(const GameSpec& spec, std::span<const double> belief, std::size_t i, std::size_t j, double delta);

/// Backward induction on the grid: zero terminal value, and at each grid
/// belief the matrix game of ⟨ζ, stage payoff⟩ plus the interpolated
/// continuation at the pushed belief.
ValueTable solve_belief_general(const GameSpec& spec, const Partition& partition, const BeliefGrid& grid,
                                kernel::PayoffMode mode = kernel::PayoffMode::flow);

struct BeliefStationary {
  Vector values;
  double rho = 0.0;
  double delta = 0.0;
  std::size_t resolution = 0;
  std::size_t iterations = 0;
};

/// Fixed point of v ↦ [ζ ↦ val(⟨ζ, stage payoff over [0, δ]⟩ + e^{−ρδ} v(ζ P^δ))]
/// on the grid, iterated from 0 with the stopping rule of the observed case.
BeliefStationary solve_belief_stationary(const GameSpec& spec, double rho, double delta, const BeliefGrid& grid,
                                         const observed::IterationOptions& options = {});

struct RefinementLevel {
  double delta = 0.0;
  std::size_t resolution = 0;
  BeliefStationary solution;
  /// Sup over this level's grid of |previous level interpolated − this level|; 0 for the first level.
  double cauchy_gap = 0.0;
};

/// Levels (δ_k, m_k): paired element-wise when both lists have the same
/// length, otherwise the Cartesian product ordered by decreasing δ then
/// increasing m. Each level is compared with the one before it.
std::vector<RefinementLevel> refine_and_compare(const GameSpec& spec, double rho, std::span<const double> deltas,
                                                std::span<const std::size_t> resolutions,
                                                const observed::IterationOptions& options = {});

}  // namespace vanish::belief

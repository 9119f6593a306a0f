#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vanish/evaluation.hpp"
#include "vanish/game.hpp"
#include "vanish/linalg.hpp"

namespace vanish::diffgame {

inline constexpr std::size_t kMaxDim = 3;

/// Point of the state space; coordinates past dim() are unused and kept at 0.
using State = std::array<double, kMaxDim>;

/// Axis-aligned state box.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool contains(const State& z, double tol = 0.0) const;
  /// Projects z onto the box; returns whether any coordinate moved.
  bool clamp(State& z) const;
};

using Dynamics = std::function<State(const State& z, std::size_t i, std::size_t j)>;
using PayoffFlow = std::function<double(const State& z, std::size_t i, std::size_t j)>;

/// Deterministic zero-sum differential game ż = f(z, i, j) on a box with
/// payoff flow g(z, i, j) weighted by the evaluation k. Lipschitz bounds are
/// with respect to the sup norm on states.
class DiffGameSpec {
 public:
  DiffGameSpec(Box box, std::size_t num_actions1, std::size_t num_actions2, Dynamics dynamics,
               PayoffFlow payoff, double lipschitz_dynamics, double lipschitz_payoff,
               Evaluation evaluation, std::string family = "custom");

  std::size_t dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  std::size_t num_actions1() const { return num_actions1_; }
  std::size_t num_actions2() const { return num_actions2_; }
  State dynamics(const State& z, std::size_t i, std::size_t j) const { return dynamics_(z, i, j); }
  double payoff(const State& z, std::size_t i, std::size_t j) const { return payoff_(z, i, j); }
  double lipschitz_dynamics() const { return lipschitz_dynamics_; }
  double lipschitz_payoff() const { return lipschitz_payoff_; }
  const Evaluation& evaluation() const { return evaluation_; }
  const std::string& family() const { return family_; }

  DiffGameSpec with_evaluation(Evaluation evaluation) const;

 private:
  Box box_;
  std::size_t num_actions1_;
  std::size_t num_actions2_;
  Dynamics dynamics_;
  PayoffFlow payoff_;
  double lipschitz_dynamics_;
  double lipschitz_payoff_;
  Evaluation evaluation_;
  std::string family_;
};

/// Checks finiteness of f and g and the declared Lipschitz bounds by random
/// sampling: every sampled difference quotient must stay within 1.01× the
/// declared bound.
std::optional<Violation> validate(const DiffGameSpec& spec, std::size_t samples = 2000,
                                  std::uint64_t seed = 1);

// Named dynamics families. Per-pair tables are indexed [i][j].

/// f ≡ 0.
Dynamics zero_dynamics();
/// f(z, i, j) = b[i][j].
Dynamics constant_dynamics(std::vector<std::vector<State>> b);
/// f(z, i, j) = a[i][j] z + b[i][j], with a[i][j] a dim×dim matrix.
Dynamics linear_dynamics(std::vector<std::vector<Matrix>> a, std::vector<std::vector<State>> b);
/// f(z, i, j) = drift z + u[i] + w[j].
Dynamics separable_control_dynamics(Matrix drift, std::vector<State> u, std::vector<State> w);
/// g(z, i, j) = base[i][j] + ⟨slope[i][j], z⟩.
PayoffFlow affine_payoff(Matrix base, std::vector<std::vector<State>> slope);

/// Sup-norm Lipschitz constants of the families above.
double lipschitz_linear(const std::vector<std::vector<Matrix>>& a);
double lipschitz_affine_payoff(const std::vector<std::vector<State>>& slope);

/// Tensor grid over the box with multilinear interpolation. Interpolation
/// weights are nonnegative and sum to 1; queries outside the box are clamped.
class StateGrid {
 public:
  /// At least two nodes per axis.
  StateGrid(Box box, std::vector<std::size_t> nodes_per_axis);
  /// Uniform grid with `cells` cells per axis.
  static StateGrid uniform(const Box& box, std::size_t cells);

  struct Stencil {
    std::array<std::uint32_t, 1u << kMaxDim> index{};
    std::array<double, 1u << kMaxDim> weight{};
    std::uint8_t count = 0;
  };

  std::size_t dim() const { return box_.dim(); }
  std::size_t size() const { return size_; }
  const Box& box() const { return box_; }
  const std::vector<std::size_t>& nodes_per_axis() const { return nodes_; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }
  State node(std::size_t k) const;
  Stencil stencil(const State& z) const;
  double interpolate(std::span<const double> values, const State& z) const;

 private:
  Box box_;
  std::vector<std::size_t> nodes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

double apply_stencil(const StateGrid::Stencil& s, std::span<const double> values);

struct FlowDiagnostics {
  std::size_t clamped = 0;
};

/// Φ^h(z; i, j): RK4 with substeps small enough for local error near 1e-8,
/// then projected onto the box (counted in diagnostics).
State flow(const DiffGameSpec& spec, const State& z, std::size_t i, std::size_t j, double h,
           FlowDiagnostics* diagnostics = nullptr);

/// Φ̄^h(z; x, y): flow of the averaged field Σ x_i y_j f(z, i, j). This is not
/// the average of the pure flows.
State flow_relaxed(const DiffGameSpec& spec, const State& z, std::span<const double> x,
                   std::span<const double> y, double h, FlowDiagnostics* diagnostics = nullptr);

enum class Side { maxmin, minmax };

/// Pure-action discretization: backward induction with sup-inf (maxmin) or
/// inf-sup (minmax) over pure actions. Stage payoffs are 8-point
/// Gauss–Legendre integrals of g along the flow.
ValueTable solve_pure(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                      Side side, FlowDiagnostics* diagnostics = nullptr);

/// Random-action mixed extension: actions are drawn from mixed strategies and
/// the continuation follows the realized pure flow; each step takes the
/// matrix-game value.
ValueTable solve_random(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                        FlowDiagnostics* diagnostics = nullptr);

struct RelaxedOptions {
  /// Final step of the pattern search over mixed strategies.
  double strategy_resolution = 1e-3;
  /// Objective evaluations allowed per inner optimization before the cell is flagged.
  std::size_t evaluation_cap = 100000;
};

struct RelaxedValue {
  ValueTable lower;  ///< sup over X of inf over Y
  ValueTable upper;  ///< inf over Y of sup over X
  std::size_t flagged_cells = 0;

  /// max |upper − lower| over the tables.
  double side_gap() const;
  ValueTable midpoint() const;
};

/// Relaxed-control mixed extension: players pick mixed actions (x, y) that
/// act through the averaged dynamics and payoff. The stage objective is
/// nonlinear in (x, y); both sides are computed by nested pattern search
/// on the strategy simplices, warm-started from the matrix-game solution of
/// the pure-action stage game.
RelaxedValue solve_relaxed(const DiffGameSpec& spec, const Partition& partition, const StateGrid& grid,
                           const RelaxedOptions& options = {}, FlowDiagnostics* diagnostics = nullptr);

struct IsaacsSample {
  double t = 0.0;
  State z{};
  State p{};
};

struct IsaacsReport {
  /// max over samples of h⁺ − h⁻ (pure Hamiltonians).
  double max_pure_gap = 0.0;
  /// max over samples of H⁺ − H⁻ (mixed Hamiltonians from the matrix-game certificates).
  double max_mixed_gap = 0.0;
  std::vector<double> pure_gaps;
  std::vector<double> mixed_gaps;
};

/// Uniform random (t, z, p) samples: t in [0, t_max], z in the box, p in [−p_scale, p_scale]^d.
std::vector<IsaacsSample> isaacs_samples(const DiffGameSpec& spec, std::size_t count, std::uint64_t seed,
                                         double t_max = 1.0, double p_scale = 1.0);

IsaacsReport isaacs_check(const DiffGameSpec& spec, std::span<const IsaacsSample> samples);

struct HjiResidual {
  double residual = 0.0;
  /// Largest second difference quotient in z; large values flag a kink.
  double hessian_bound = 0.0;
  bool smooth = true;
};

/// |∂_t W + val[g k + ⟨f, ∇W⟩]| at (t, z) by central differences: in t over
/// the neighbouring partition knots, in z over one grid spacing. Throws
/// std::invalid_argument when a stencil leaves the grid or the partition.
HjiResidual hji_residual(const ValueTable& table, const StateGrid& grid, const DiffGameSpec& spec, double t,
                         const State& z, double hessian_threshold = 1e3);

/// Differential game on beliefs ζ ∈ Δ(Ω) ⊂ [0, 1]^S induced by an observed
/// game: actions are per-state profiles i(·) ∈ I^Ω, j(·) ∈ J^Ω encoded in
/// mixed radix (state 0 least significant), dynamics
/// f(ζ, i, j)(z) = Σ_ω ζ(ω) q(i(ω), j(ω))[ω, z] and payoff ⟨ζ, g(·, i(·), j(·))⟩.
/// Requires S <= kMaxDim.
DiffGameSpec lift_observed_game(const GameSpec& spec);

/// Decodes a mixed-radix action profile into per-state actions.
std::vector<std::size_t> decode_profile(std::size_t code, std::size_t radix, std::size_t states);

}  // namespace vanish::diffgame

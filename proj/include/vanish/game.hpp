#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vanish/evaluation.hpp"
#include "vanish/linalg.hpp"

namespace vanish {

/// Generator q of a continuous-time Markov chain: nonnegative off-diagonal
/// entries, zero row sums. Construction does not check; see validate().
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(Matrix entries) : entries_(std::move(entries)) {}

  const Matrix& matrix() const { return entries_; }
  std::size_t size() const { return entries_.rows(); }
  /// Λ = max_z |q[z][z]|.
  double uniformization_rate() const;

  static RateMatrix zero(std::size_t n) { return RateMatrix(Matrix(n, n)); }

 private:
  Matrix entries_;
};

/// First broken invariant of a rate matrix, or nullopt.
std::optional<std::string> check_rate_matrix(const RateMatrix& q, double row_sum_tol = 1e-12);

/// Finite zero-sum game on a controlled continuous-time Markov chain.
///
/// Payoff g[z][i][j] is a flow (payoff per unit time); rates(i, j) is the
/// generator in force while the action pair (i, j) is played.
class GameSpec {
 public:
  /// `payoff[z]` is the A×B stage matrix at state z; `rates` holds A·B
  /// generators in row-major (i, j) order. Throws ValidationError on shape
  /// mismatches; value invariants are left to validate().
  GameSpec(std::vector<std::string> states, std::vector<std::string> actions1,
           std::vector<std::string> actions2, std::vector<Matrix> payoff,
           std::vector<RateMatrix> rates, Evaluation evaluation);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_actions1() const { return actions1_.size(); }
  std::size_t num_actions2() const { return actions2_.size(); }

  const std::vector<std::string>& states() const { return states_; }
  const std::vector<std::string>& actions1() const { return actions1_; }
  const std::vector<std::string>& actions2() const { return actions2_; }

  double payoff(std::size_t z, std::size_t i, std::size_t j) const { return payoff_[z](i, j); }
  const Matrix& payoff_matrix(std::size_t z) const { return payoff_[z]; }
  const RateMatrix& rates(std::size_t i, std::size_t j) const {
    return rates_[i * actions2_.size() + j];
  }
  const Evaluation& evaluation() const { return evaluation_; }

  /// ‖g‖ = max |g[z][i][j]|.
  double payoff_norm() const { return payoff_norm_; }
  /// max over action pairs of the uniformization rate.
  double rate_norm() const;

  GameSpec with_evaluation(Evaluation evaluation) const;
  GameSpec with_payoff_shift(double c) const;

 private:
  std::vector<std::string> states_;
  std::vector<std::string> actions1_;
  std::vector<std::string> actions2_;
  std::vector<Matrix> payoff_;
  std::vector<RateMatrix> rates_;
  Evaluation evaluation_;
  double payoff_norm_ = 0.0;
};

struct Violation {
  std::string message;
};

/// Total check of the value invariants: finite payoffs, and every generator
/// has nonnegative off-diagonal entries and zero row sums (within 1e-12).
/// Returns the first violation found.
std::optional<Violation> validate(const GameSpec& spec);

/// Decision times 0 = t_1 < … < t_N < T of a partition of [0, T]; stage n is
/// [t_n, t_{n+1}) with t_{N+1} = T.
class Partition {
 public:
  /// Throws std::invalid_argument unless times start at 0 and increase
  /// strictly below the horizon.
  Partition(std::vector<double> times, double horizon);

  std::size_t num_stages() const { return times_.size(); }
  /// t_n for n in [0, num_stages()]; index num_stages() is the horizon.
  double time(std::size_t n) const { return n < times_.size() ? times_[n] : horizon_; }
  double duration(std::size_t n) const { return time(n + 1) - time(n); }
  double horizon() const { return horizon_; }
  double mesh() const { return mesh_; }
  const std::vector<double>& times() const { return times_; }
  /// t_1 … t_N followed by the horizon.
  std::vector<double> knots() const;

 private:
  std::vector<double> times_;
  double horizon_;
  double mesh_ = 0.0;
};

/// {0, T/n, …, T(n−1)/n}; throws std::invalid_argument for T <= 0 or n == 0.
Partition uniform_partition(double horizon, std::size_t n);
/// Uniform partition with stage duration exactly `delta` and horizon n·delta,
/// the smallest such horizon >= min_horizon.
Partition uniform_partition_with_mesh(double delta, double min_horizon);

/// Values at partition times, linear in t in between, zero at and after the
/// horizon. Each time slice has `width` entries (states or grid nodes).
class ValueTable {
 public:
  ValueTable(std::vector<double> knots, std::size_t width);

  std::size_t num_times() const { return knots_.size(); }
  std::size_t width() const { return width_; }
  const std::vector<double>& knots() const { return knots_; }

  std::span<double> at(std::size_t n) { return {values_.data() + n * width_, width_}; }
  std::span<const double> at(std::size_t n) const { return {values_.data() + n * width_, width_}; }

  /// Linear interpolation in t of entry k.
  double value(double t, std::size_t k) const;
  Vector slice(double t) const;

  double sup_norm() const;
  /// max over entries and stages of |v(t_{n+1}, k) − v(t_n, k)| / (t_{n+1} − t_n).
  double max_time_quotient() const;

 private:
  std::vector<double> knots_;
  std::size_t width_;
  std::vector<double> values_;
};

/// Seeded random game: payoffs uniform in [−1, 1], off-diagonal rates uniform
/// in [0, rate_scale], diagonal minus the row sum. Deterministic in `seed`.
GameSpec random_instance(std::uint64_t seed, std::size_t num_states, std::size_t num_actions1,
                         std::size_t num_actions2, double rate_scale,
                         const Evaluation& evaluation = Evaluation::exponential(1.0));

}  // namespace vanish

#pragma once

#include <variant>
#include <vector>

namespace vanish {

/// Exponential density k(t) = ρ e^{-ρt}.
struct Exponential {
  double rho = 1.0;
};

/// Piecewise-linear density on [knots.front() = 0, knots.back()], zero afterwards.
struct Tabulated {
  std::vector<double> knots;
  std::vector<double> densities;
  double lipschitz_bound = 0.0;
};

/// Probability density k on R+ weighting the payoff flow over time.
///
/// Instances are normalized (∫k = 1) at construction. The tail tolerance sets
/// where infinite-horizon games are truncated: solvers stop at the smallest
/// horizon whose residual evaluation mass is at most this tolerance and use a
/// zero terminal value there.
class Evaluation {
 public:
  static constexpr double kDefaultTailTolerance = 1e-6;

  /// Throws ValidationError unless rho > 0 and tail_tolerance > 0.
  static Evaluation exponential(double rho, double tail_tolerance = kDefaultTailTolerance);
  /// Throws ValidationError unless knots start at 0, increase strictly, the
  /// densities are nonnegative, and the total mass is 1 within 1e-9.
  static Evaluation tabulated(std::vector<double> knots, std::vector<double> densities,
                              double tail_tolerance = kDefaultTailTolerance);

  bool is_exponential() const { return std::holds_alternative<Exponential>(kind_); }
  /// Discount rate; only meaningful for the exponential kind.
  double rho() const;
  const std::variant<Exponential, Tabulated>& kind() const { return kind_; }
  double tail_tolerance() const { return tail_tolerance_; }

  double density(double t) const;
  /// ∫_a^b k(s) ds for 0 <= a <= b.
  double mass(double a, double b) const;
  /// ∫_T^∞ k(s) ds.
  double tail(double horizon) const;
  /// Smallest horizon with tail() <= tail_tolerance (support end for tabulated densities).
  double truncation_horizon() const;
  /// Lipschitz constant of k on R+.
  double lipschitz() const;

  Evaluation with_tail_tolerance(double tail_tolerance) const;

 private:
  Evaluation(std::variant<Exponential, Tabulated> kind, double tail_tolerance)
      : kind_(std::move(kind)), tail_tolerance_(tail_tolerance) {}

  std::variant<Exponential, Tabulated> kind_;
  double tail_tolerance_;
};

}  // namespace vanish

#pragma once

#include "vanish/linalg.hpp"

namespace vanish::matgame {

/// Value and optimal mixed strategies of a finite zero-sum game where the row
/// player (x over rows) maximizes and the column player (y) minimizes.
struct MatrixGameSolution {
  double value = 0.0;
  Vector x;
  Vector y;
};

/// Solves the mixed extension of the matrix game M exactly (up to pivot
/// round-off). Pure saddle points are returned directly; otherwise the game
/// is shifted positive and the column player's linear program is solved by
/// primal simplex with Bland's rule, reading the row player's strategy off the
/// final reduced costs. Deterministic. Throws std::invalid_argument on a
/// non-finite or empty matrix.
MatrixGameSolution solve(const Matrix& m);

/// Value only; same algorithm.
double value(const Matrix& m);

/// max_i min_j M[i][j].
double lower_pure_value(const Matrix& m);
/// min_j max_i M[i][j].
double upper_pure_value(const Matrix& m);

/// min_j xᵀM[:, j], the payoff the row strategy guarantees.
double guaranteed_by_row(const Matrix& m, const Vector& x);
/// max_i M[i, :]·y, the payoff the column strategy concedes at most.
double conceded_by_column(const Matrix& m, const Vector& y);

/// max(value − guaranteed_by_row, conceded_by_column − value); nonpositive
/// up to round-off for an exact solution.
double certificate_gap(const Matrix& m, const MatrixGameSolution& sol);

/// Whether solve(M + c·1).value == solve(M).value + c within 1e-9.
bool value_shift_check(const Matrix& m, double c);

}  // namespace vanish::matgame

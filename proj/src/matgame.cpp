#include "vanish/matgame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vanish/errors.hpp"

namespace vanish::matgame {

namespace {

constexpr double kPivotTol = 1e-12;

void check_input(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("matgame: empty matrix");
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("matgame: non-finite entry");
  }
}

void normalize(Vector& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= sum;
}

// Maximize Σw subject to P w <= 1, w >= 0, for P with all entries in [1, 2].
// Returns (w, u) where u are the dual prices of the constraints.
struct LpSolution {
  Vector w;
  Vector u;
};

LpSolution simplex_column_lp(const Matrix& p) {
  const std::size_t rows = p.rows();
  const std::size_t cols = p.cols();
  const std::size_t width = cols + rows + 1;  // w, slack, rhs
  std::vector<double> tab(rows * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return tab[r * width + c]; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) at(r, c) = p(r, c);
    at(r, cols + r) = 1.0;
    at(r, width - 1) = 1.0;
  }
  std::vector<double> reduced(width, 0.0);
  for (std::size_t c = 0; c < cols; ++c) reduced[c] = -1.0;
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) basis[r] = cols + r;

  const std::size_t max_pivots = 50 * (rows + cols) + 100;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_pivots) throw ConvergenceError("matgame: simplex pivot cap exceeded");
    // Bland: lowest-index improving column.
    std::size_t enter = width;
    for (std::size_t c = 0; c + 1 < width; ++c) {
      if (reduced[c] < -kPivotTol) {
        enter = c;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = at(r, enter);
      if (a <= kPivotTol) continue;
      const double ratio = at(r, width - 1) / a;
      if (ratio < best_ratio - 1e-15 ||
          (std::abs(ratio - best_ratio) <= 1e-15 && leave < rows && basis[r] < basis[leave])) {
        best_ratio = ratio;
        leave = r;
      }
    }
    // P > 0 keeps the feasible region bounded, so some row always qualifies.
    if (leave == rows) throw std::logic_error("matgame: unbounded column program");

    const double piv = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    const double f = reduced[enter];
    for (std::size_t c = 0; c < width; ++c) reduced[c] -= f * at(leave, c);
    basis[leave] = enter;
  }

  LpSolution out{Vector(cols, 0.0), Vector(rows, 0.0)};
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < cols) out.w[basis[r]] = at(r, width - 1);
  }
  for (std::size_t r = 0; r < rows; ++r) out.u[r] = reduced[cols + r];
  return out;
}

}  // namespace

double lower_pure_value(const Matrix& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    best = std::max(best, *std::min_element(row.begin(), row.end()));
  }
  return best;
}

double upper_pure_value(const Matrix& m) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double col_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) col_max = std::max(col_max, m(i, j));
    best = std::min(best, col_max);
  }
  return best;
}

double guaranteed_by_row(const Matrix& m, const Vector& x) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += x[i] * m(i, j);
    worst = std::min(worst, s);
  }
  return worst;
}

double conceded_by_column(const Matrix& m, const Vector& y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.rows(); ++i) worst = std::max(worst, dot(m.row(i), y));
  return worst;
}

MatrixGameSolution solve(const Matrix& m) {
  check_input(m);
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();

  // Pure saddle point: some row's minimum equals some column's maximum.
  std::size_t best_row = 0;
  double lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = m.row(i);
    const double v = *std::min_element(row.begin(), row.end());
    if (v > lower) {
      lower = v;
      best_row = i;
    }
  }
  std::size_t best_col = 0;
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) v = std::max(v, m(i, j));
    if (v < upper) {
      upper = v;
      best_col = j;
    }
  }
  if (lower == upper) {
    MatrixGameSolution sol{lower, Vector(rows, 0.0), Vector(cols, 0.0)};
    sol.x[best_row] = 1.0;
    sol.y[best_col] = 1.0;
    return sol;
  }

  // Map entries affinely onto [1, 2]; strategies are invariant under this map.
  const double lo = *std::min_element(m.data().begin(), m.data().end());
  const double hi = *std::max_element(m.data().begin(), m.data().end());
  const double range = hi - lo;  // > 0, otherwise a saddle was found
  Matrix p(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) p(i, j) = 1.0 + (m(i, j) - lo) / range;
  }
  LpSolution lp = simplex_column_lp(p);
  MatrixGameSolution sol{0.0, std::move(lp.u), std::move(lp.w)};
  normalize(sol.x);
  normalize(sol.y);
  const double guaranteed = guaranteed_by_row(m, sol.x);
  const double conceded = conceded_by_column(m, sol.y);
  sol.value = 0.5 * (guaranteed + conceded);
  return sol;
}

double value(const Matrix& m) { return solve(m).value; }

double certificate_gap(const Matrix& m, const MatrixGameSolution& sol) {
  return std::max(sol.value - guaranteed_by_row(m, sol.x), conceded_by_column(m, sol.y) - sol.value);
}

bool value_shift_check(const Matrix& m, double c) {
  Matrix shifted = m;
  shifted += Matrix(m.rows(), m.cols(), c);
  return std::abs(solve(shifted).value - (solve(m).value + c)) <= 1e-9;
}

}  // namespace vanish::matgame

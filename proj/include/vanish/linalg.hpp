#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vanish {

using Vector = std::vector<double>;

/// Dense row-major matrix. Sizes in this library stay small (tens of rows),
/// so no expression templates or blocking.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

/// A·v
Vector matvec(const Matrix& a, std::span<const double> v);
/// vᵀ·A
Vector vecmat(std::span<const double> v, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> v);
double distance_inf(std::span<const double> a, std::span<const double> b);
/// Max absolute row sum.
double norm_inf(const Matrix& a);
double max_abs_entry(const Matrix& a);

/// Partially pivoted LU factorization; solves A x = b for several right-hand sides.
class LuDecomposition {
 public:
  explicit LuDecomposition(Matrix a);

  bool singular() const { return singular_; }
  Vector solve(std::span<const double> b) const;
  Matrix inverse() const;
  /// ‖A‖₁·‖A⁻¹‖₁, computed exactly from the inverse (fine for small systems).
  double condition_number() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  double norm1_ = 0.0;
  bool singular_ = false;
};

/// Solves A x = b; throws std::runtime_error if A is numerically singular.
Vector solve_linear(const Matrix& a, std::span<const double> b);

}  // namespace vanish

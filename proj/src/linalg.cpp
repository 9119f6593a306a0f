#include "vanish/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vanish {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data size does not match shape");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("Matrix +=: shape mismatch");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix out = b;
  out *= -1.0;
  return out += a;
}

Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

Vector vecmat(std::span<const double> v, const Matrix& a) {
  if (a.rows() != v.size()) throw std::invalid_argument("vecmat: dimension mismatch");
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += v[i] * a(i, j);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double distance_inf(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("distance_inf: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row(i)) s += std::abs(x);
    m = std::max(m, s);
  }
  return m;
}

double max_abs_entry(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

LuDecomposition::LuDecomposition(Matrix a) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw std::invalid_argument("LuDecomposition: matrix not square");
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(lu_(i, j));
    norm1_ = std::max(norm1_, s);
  }
  const double tiny = 1e-300;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
    }
    if (std::abs(lu_(piv, k)) <= tiny) {
      singular_ = true;
      return;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

Vector LuDecomposition::solve(std::span<const double> b) const {
  if (singular_) throw std::runtime_error("LuDecomposition::solve: singular matrix");
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw std::invalid_argument("LuDecomposition::solve: size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Matrix LuDecomposition::inverse() const {
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector col = solve(e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  return inv;
}

double LuDecomposition::condition_number() const {
  if (singular_) return std::numeric_limits<double>::infinity();
  const Matrix inv = inverse();
  double inv_norm1 = 0.0;
  for (std::size_t j = 0; j < inv.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < inv.rows(); ++i) s += std::abs(inv(i, j));
    inv_norm1 = std::max(inv_norm1, s);
  }
  return norm1_ * inv_norm1;
}

Vector solve_linear(const Matrix& a, std::span<const double> b) {
  LuDecomposition lu(a);
  if (lu.singular()) throw std::runtime_error("solve_linear: singular matrix");
  return lu.solve(b);
}

}  // namespace vanish

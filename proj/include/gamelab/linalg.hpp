#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace gamelab {

// Dense column-major matrix, small and owned.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  static Matrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, const std::vector<double>& x);

// Householder QR of an n x k matrix (n >= k). R is k x k upper triangular.
struct QRDecomposition {
  Matrix r;
  // Columns whose diagonal in R vanished relative to the column scale.
  std::vector<std::size_t> deficient_columns;
  // Applies Q^T to y (length n) using the stored reflectors.
  std::vector<double> apply_qt(std::vector<double> y) const;

  Matrix reflectors;  // column j holds the j-th Householder vector
  std::vector<double> betas;
};

QRDecomposition householder_qr(const Matrix& a, double rel_tol = 1e-10);

// Solves R x = b for upper-triangular R.
std::vector<double> back_substitute(const Matrix& r, const std::vector<double>& b);
// (R^T R)^{-1} for upper-triangular invertible R.
Matrix inverse_gram_from_r(const Matrix& r);

// Cholesky factor L (lower) of a symmetric positive-definite matrix, or
// nullopt when the matrix is not numerically positive definite.
std::optional<Matrix> cholesky(const Matrix& a);
std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b);
Matrix cholesky_inverse(const Matrix& l);

}  // namespace gamelab

#include "gamelab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "gamelab/errors.hpp"

namespace gamelab {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvariantViolation("matrix shapes do not conform");
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

std::vector<double> multiply(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw InvariantViolation("matrix and vector do not conform");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += a(i, j) * x[j];
  return y;
}

QRDecomposition householder_qr(const Matrix& a_in, double rel_tol) {
  const std::size_t n = a_in.rows(), k = a_in.cols();
  if (n < k) throw DomainError("fewer observations than regressors");
  Matrix a = a_in;
  QRDecomposition qr;
  qr.reflectors = Matrix(n, k);
  qr.betas.assign(k, 0.0);

  std::vector<double> col_scale(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
    col_scale[j] = std::sqrt(s);
  }

  for (std::size_t j = 0; j < k; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = a(j, j) > 0 ? -norm : norm;
    std::vector<double> v(n, 0.0);
    for (std::size_t i = j; i < n; ++i) v[i] = a(i, j);
    v[j] -= alpha;
    double vtv = 0.0;
    for (std::size_t i = j; i < n; ++i) vtv += v[i] * v[i];
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;
    for (std::size_t c = j; c < k; ++c) {
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += v[i] * a(i, c);
      dot *= beta;
      for (std::size_t i = j; i < n; ++i) a(i, c) -= dot * v[i];
    }
    for (std::size_t i = j; i < n; ++i) qr.reflectors(i, j) = v[i];
    qr.betas[j] = beta;
  }

  qr.r = Matrix(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= j; ++i) qr.r(i, j) = a(i, j);
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(qr.r(j, j)) <= rel_tol * std::max(1.0, col_scale[j])) qr.deficient_columns.push_back(j);
  }
  return qr;
}

std::vector<double> QRDecomposition::apply_qt(std::vector<double> y) const {
  const std::size_t n = reflectors.rows();
  if (y.size() != n) throw InvariantViolation("vector length does not match the decomposition");
  for (std::size_t j = 0; j < reflectors.cols(); ++j) {
    if (betas[j] == 0.0) continue;
    double dot = 0.0;
    for (std::size_t i = j; i < n; ++i) dot += reflectors(i, j) * y[i];
    dot *= betas[j];
    for (std::size_t i = j; i < n; ++i) y[i] -= dot * reflectors(i, j);
  }
  return y;
}

std::vector<double> back_substitute(const Matrix& r, const std::vector<double>& b) {
  const std::size_t k = r.cols();
  std::vector<double> x(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < k; ++j) s -= r(ii, j) * x[j];
    x[ii] = s / r(ii, ii);
  }
  return x;
}

Matrix inverse_gram_from_r(const Matrix& r) {
  const std::size_t k = r.cols();
  // R^{-1} column by column, then R^{-1} R^{-T}.
  Matrix rinv(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> e(k, 0.0);
    e[c] = 1.0;
    const auto x = back_substitute(r, e);
    for (std::size_t i = 0; i < k; ++i) rinv(i, c) = x[i];
  }
  return multiply(rinv, transpose(rinv));
}

std::optional<Matrix> cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
  const std::size_t n = l.rows();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

Matrix cholesky_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> e(n, 0.0);
    e[c] = 1.0;
    const auto x = cholesky_solve(l, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
  }
  return inv;
}

}  // namespace gamelab

// Small dense linear algebra: row-major matrices, LU solve, matrix exponential.
#ifndef DEPMARK_LINALG_HPP
#define DEPMARK_LINALG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"

namespace depmark {

/// Dense square-or-rectangular matrix of doubles, row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  Matrix& operator+=(const Matrix& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  /// Maximum absolute column sum.
  double norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Row vector times matrix: returns v * m.
inline std::vector<double> row_times(std::span<const double> v, const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * m(i, j);
  }
  return out;
}

/// Solves A X = B by LU with partial pivoting. Throws NumericFailure when A
/// is singular to working precision.
inline Matrix solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw NumericFailure("singular matrix in LU solve");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (std::size_t jj = 0; jj < b.cols(); ++jj) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, jj);
      for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * b(j, jj);
      b(ii, jj) = s / a(ii, ii);
    }
  }
  return b;
}

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant (Higham 2005). Lower degrees are used for small norms.
inline Matrix expm(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 0) return a;
  static constexpr std::array<double, 14> b13 = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                  9.504178996162932e-1, 2.097847961257068e0};
  static constexpr std::array<int, 4> degrees = {3, 5, 7, 9};
  static constexpr double theta13 = 5.371920351148152;

  const Matrix ident = Matrix::identity(n);
  const double norm = a.norm1();

  auto pade = [&](const Matrix& u, const Matrix& v) {
    return solve(v - u, v + u);
  };

  for (std::size_t d = 0; d < degrees.size(); ++d) {
    if (norm > theta[d]) continue;
    // Coefficients of the degree-m diagonal Pade approximant.
    int m = degrees[d];
    std::vector<double> c(m + 1);
    c[0] = 1.0;
    for (int k = 0; k < m; ++k)
      c[k + 1] = c[k] * static_cast<double>(m - k) /
                 static_cast<double>((2 * m - k) * (k + 1));
    Matrix a2 = a * a;
    Matrix power = ident;
    Matrix u_even(n, n), v(n, n);
    for (int k = 0; k <= m; k += 2) {
      u_even += power * c[k + 1];
      v += power * c[k];
      power = power * a2;
    }
    return pade(a * u_even, v);
  }

  int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
  Matrix as = a * std::ldexp(1.0, -s);
  Matrix a2 = as * as;
  Matrix a4 = a2 * a2;
  Matrix a6 = a4 * a2;
  Matrix inner_u = a6 * b13[13] + a4 * b13[11] + a2 * b13[9];
  Matrix u = as * (a6 * inner_u + a6 * b13[7] + a4 * b13[5] + a2 * b13[3] + ident * b13[1]);
  Matrix inner_v = a6 * b13[12] + a4 * b13[10] + a2 * b13[8];
  Matrix v = a6 * inner_v + a6 * b13[6] + a4 * b13[4] + a2 * b13[2] + ident * b13[0];
  Matrix r = pade(u, v);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

}  // namespace depmark

#endif  // DEPMARK_LINALG_HPP

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spdgyro/error.hpp"

namespace spdgyro {

// Dense square matrix, row-major, double precision. Everything in this
// project is n x n with n small (<= ~128), so no attempt is made at blocking
// or sparsity.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}
  Mat(int n, std::vector<double> data);

  static Mat identity(int n);
  static Mat diag(const std::vector<double>& d);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  bool all_finite() const;

 private:
  int n_ = 0;
  std::vector<double> a_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);
Mat operator*(const Mat& a, const Mat& b);  // matmul

Mat transpose(const Mat& a);
Mat hadamard(const Mat& a, const Mat& b);
double trace(const Mat& a);
double frobenius(const Mat& a);
double max_abs(const Mat& a);

// Gauss-Jordan with partial pivoting. Throws NumericalError when the pivot
// drops below 1e-12 * max|m|.
Mat matinv(const Mat& m);

// Determinant via LU with partial pivoting (no singularity guard; returns 0
// for singular input).
double det(const Mat& m);

// Real symmetric matrix. Construction symmetrizes (X + X^T)/2 and rejects
// non-finite entries, so downstream code can rely on exact symmetry.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat zero(int n) { return SymMat(Mat(n)); }
  static SymMat identity(int n) { return SymMat(Mat::identity(n)); }
  static SymMat diag(const std::vector<double>& d) { return SymMat(Mat::diag(d)); }

  int dim() const { return m_.dim(); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Mat& mat() const { return m_; }

 private:
  Mat m_;
};

SymMat operator+(const SymMat& a, const SymMat& b);
SymMat operator-(const SymMat& a, const SymMat& b);
SymMat operator*(double s, const SymMat& a);
SymMat hadamard(const SymMat& a, const SymMat& b);

// Length of the packed lower triangle for dimension n.
inline size_t triangular_len(int n) { return static_cast<size_t>(n) * (n + 1) / 2; }

// Inverse of triangular_len. Throws DimensionError when len is not a
// triangular number.
int triangular_dim(size_t len);

// U = X + X^T with X the lower-triangular matrix filled row-wise from x:
// X(0,0)=x[0], X(1,0)=x[1], X(1,1)=x[2], ... Diagonal entries get doubled.
SymMat sym_from_triangular(const std::vector<double>& x);

// K holds eigenvectors in columns; lambda is sorted descending and K's
// columns are permuted to match. Each column is sign-fixed so its
// largest-magnitude entry is positive.
struct EigenDecomp {
  Mat k;
  std::vector<double> lambda;
};

// Cyclic Jacobi (row-cyclic sweeps). Converges when the off-diagonal
// Frobenius norm falls below 1e-12 * ||m||_F; throws NumericalError with the
// residual after max_sweeps sweeps.
EigenDecomp eig_sym(const SymMat& m, int max_sweeps = 100);

enum class MatFun { Exp, Log, Sqrt, InvSqrt, Pow };

const char* matfun_name(MatFun f);
double matfun_scalar(MatFun f, double x, double alpha);
double matfun_scalar_deriv(MatFun f, double x, double alpha);

// K diag(f(lambda_i)) K^T. Log/Sqrt/InvSqrt/Pow require a strictly positive
// spectrum; a violating eigenvalue is reported in the DomainError message.
SymMat matfun(const SymMat& m, MatFun f, double alpha = 0.0);

// matfun on a precomputed decomposition (saves the eig when the caller
// already has one).
SymMat matfun(const EigenDecomp& e, MatFun f, double alpha = 0.0);

}  // namespace spdgyro

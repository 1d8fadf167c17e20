#pragma once

#include <functional>
#include <vector>

#include "spdgyro/isometry.hpp"
#include "spdgyro/linalg.hpp"

namespace spdgyro {

// Divided differences of f over a spectrum: G_ij = (f(l_i)-f(l_j))/(l_i-l_j)
// when the eigenvalues are separated, else f'((l_i+l_j)/2). The switch
// threshold is relative, delta = 1e-7 * (1 + |l_i| + |l_j|), which keeps
// gradients finite through near-degenerate spectra.
Mat loewner_matrix(const std::vector<double>& lambda, MatFun f, double alpha);

// Flat reverse-mode tape over dense matrix, vector and scalar nodes. One
// tape per recorded function; single-owner during recording. reset() keeps
// buffer capacity for reuse across samples.
class Tape {
 public:
  using Id = int;

  Tape();
  ~Tape();
  Tape(Tape&&) noexcept;
  Tape& operator=(Tape&&) noexcept;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Id input(Mat m);
  Id input(double s);

  // matrix -> matrix
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id scale(Id a, double c);
  Id matmul(Id a, Id b);
  Id matinv(Id a);
  Id hadamard(Id a, Id b);
  Id symmetrize(Id a);
  Id transpose(Id a);
  // Symmetrizes its input, then applies K diag(f(lambda)) K^T. The
  // eigendecomposition is cached for the backward pass.
  Id matfun(Id a, MatFun f, double alpha = 0.0);

  // matrix -> vector: log of the (descending) eigenvalues of a symmetric
  // positive definite node.
  Id log_eigvals(Id a);

  // matrix -> scalar
  Id trace(Id a);
  Id frobenius_sq(Id a);

  // scalar -> matrix: the plane transformation R_ij(theta) embedded in I_n.
  Id plane_rotation(Id theta, PlaneKind kind, int i, int j, int n);

  // vector -> scalar
  Id sum_sq(Id v);
  Id sum_abs(Id v);   // subgradient 0 at 0
  Id max_abs(Id v);   // ties: gradient on the first maximal component

  // scalar -> scalar
  Id add_s(Id a, Id b);
  Id sub_s(Id a, Id b);
  Id neg(Id a);
  Id square(Id a);

  double scalar_value(Id id) const;
  const Mat& mat_value(Id id) const;
  const std::vector<double>& vec_value(Id id) const;

  // Seeds the root scalar's adjoint and sweeps the tape in reverse. Throws
  // UsageError on an empty tape or a non-scalar root.
  void backward(Id root, double seed = 1.0);

  double scalar_adjoint(Id id) const;
  const Mat& mat_adjoint(Id id) const;

  void reset();
  size_t size() const;

 private:
  enum class Op;
  struct Node;

  Id push(Node n);
  const Node& at(Id id) const;
  void check_backward_done() const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Central finite differences per coordinate of eval around params, compared
// with a supplied analytic gradient. Returns the max over coordinates of
// |analytic - numeric| / max(1e-8, |numeric|).
double grad_check(const std::function<double(const std::vector<double>&)>& eval,
                  const std::vector<double>& analytic, std::vector<double> params, double h);

}  // namespace spdgyro

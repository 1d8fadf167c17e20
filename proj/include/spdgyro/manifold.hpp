#pragma once

#include <vector>

#include "spdgyro/linalg.hpp"

namespace spdgyro {

struct unchecked_t {};
inline constexpr unchecked_t unchecked{};

// A point of the SPD manifold: symmetric with strictly positive spectrum.
// The checked constructor runs an eigendecomposition and rejects when
// lambda_min <= 1e-10 * lambda_max; operations that produce SPD output by
// construction (congruence, exp) use the unchecked overload.
class SpdPoint {
 public:
  explicit SpdPoint(SymMat m);
  SpdPoint(SymMat m, unchecked_t) : m_(std::move(m)) {}

  static SpdPoint identity(int n) { return SpdPoint(SymMat::identity(n), unchecked); }

  int dim() const { return m_.dim(); }
  double operator()(int i, int j) const { return m_(i, j); }
  const SymMat& sym() const { return m_; }
  const Mat& mat() const { return m_.mat(); }

 private:
  SymMat m_;
};

// Log-eigenvalues of the relative position of a pair of points, sorted
// descending. A complete invariant of the pair under congruence symmetries.
class VvdVector {
 public:
  explicit VvdVector(std::vector<double> v);
  const std::vector<double>& values() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }

 private:
  std::vector<double> v_;
};

SpdPoint exp_at_identity(const SymMat& u);
SymMat log_at_identity(const SpdPoint& p);

// sqrt(base) * exp(inv_sqrt(base) * u * inv_sqrt(base)) * sqrt(base)
SpdPoint exp_at(const SpdPoint& base, const SymMat& u);
SymMat log_at(const SpdPoint& base, const SpdPoint& q);

// Log-spectrum of p^{-1} q, computed on the symmetric conjugate
// inv_sqrt(p) * q * inv_sqrt(p) so the eigensolver only ever sees a
// symmetric positive definite argument.
VvdVector vvd(const SpdPoint& p, const SpdPoint& q);

enum class Metric { Riemannian, F1, FInf, Stein };

const char* metric_name(Metric m);

// Permutation-invariant norms applied to a VVD vector.
double vvd_norm(const VvdVector& v, Metric metric);

double dist(const SpdPoint& p, const SpdPoint& q, Metric metric);

// The scoring functions consume squared distances (smooth at coincident
// points), so the square is exposed directly. For F1 the square applies to
// the F1 value.
double dist_squared(const SpdPoint& p, const SpdPoint& q, Metric metric);

// sqrt(tr(P) + tr(Q) - 2 sqrt(tr(PQ))), clamped at 0 under the outer root.
// Comparison baseline only: this quantity uses tr(PQ) inside the inner root,
// is not congruence-invariant and does not vanish at P == Q in general, so
// it must not be treated as a metric.
double dist_bures_wasserstein(const SpdPoint& p, const SpdPoint& q);

// Frobenius distance of matrix logarithms. Flat; not congruence-invariant.
double dist_log_euclidean(const SpdPoint& p, const SpdPoint& q);

}  // namespace spdgyro

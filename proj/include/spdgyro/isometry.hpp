#pragma once

#include <vector>

#include "spdgyro/manifold.hpp"

namespace spdgyro {

// One angle per coordinate-plane pair (i, j), i < j, in lexicographic order:
// (0,1), (0,2), ..., (0,n-1), (1,2), ... Angles are kept unconstrained
// (no wrapping) so optimization stays smooth.
struct AngleVector {
  std::vector<double> theta;

  size_t size() const { return theta.size(); }
};

// Number of plane pairs for dimension n.
inline size_t angle_len(int n) { return static_cast<size_t>(n) * (n - 1) / 2; }

// Inverse of angle_len; throws DimensionError when len is not of the form
// n(n-1)/2.
int angle_dim(size_t len);

enum class PlaneKind { Rotation, Reflection };

enum class IsoKind { Rotation, Reflection, General };

// An invertible matrix acting on SPD points by congruence. Rotation and
// reflection kinds are validated to be orthogonal (residual <= 1e-9);
// general kind requires |det| >= 1e-10.
class IsometryMatrix {
 public:
  IsometryMatrix(Mat m, IsoKind kind);

  int dim() const { return m_.dim(); }
  IsoKind kind() const { return kind_; }
  const Mat& mat() const { return m_; }

 private:
  Mat m_;
  IsoKind kind_;
};

// 2x2 plane rotation [[cos, -sin], [sin, cos]] or reflection
// [[cos, sin], [sin, -cos]]; det +1 and -1 respectively.
Mat givens(double theta, PlaneKind kind);

// Identity with entries (ii, ij, ji, jj) replaced by givens(theta, kind).
IsometryMatrix embed_plane(double theta, PlaneKind kind, int i, int j, int n);

// Product of the basic plane transformations over all pairs in ascending
// lexicographic order, left-multiplying: M <- R_ij * M. The order is a fixed
// convention recorded in checkpoint metadata; any consistent order gives a
// valid parametrization, but checkpoints depend on this one.
IsometryMatrix build_rotation(const AngleVector& theta);
IsometryMatrix build_reflection(const AngleVector& theta);

inline const char* pair_order_convention() { return "lex(i<j),left-multiply"; }

// M (o) P = M P M^T, symmetrized to kill roundoff.
SpdPoint apply(const IsometryMatrix& m, const SpdPoint& p);

// Reflection of p in the point q: q p^{-1} q. Involutive.
SpdPoint point_reflection(const SpdPoint& q, const SpdPoint& p);

}  // namespace spdgyro

#include "spdgyro/isometry.hpp"

#include <cmath>
#include <sstream>

namespace spdgyro {

int angle_dim(size_t len) {
  const double nd = (1.0 + std::sqrt(8.0 * static_cast<double>(len) + 1.0)) / 2.0;
  const int n = static_cast<int>(std::lround(nd));
  if (n < 2 || angle_len(n) != len) {
    std::ostringstream os;
    os << "angle vector length " << len << " is not of the form n(n-1)/2";
    throw DimensionError(os.str());
  }
  return n;
}

IsometryMatrix::IsometryMatrix(Mat m, IsoKind kind) : m_(std::move(m)), kind_(kind) {
  const int n = m_.dim();
  if (kind_ == IsoKind::General) {
    if (std::fabs(det(m_)) < 1e-10) {
      throw DomainError("IsometryMatrix: general matrix too close to singular");
    }
    return;
  }
  const Mat gram = transpose(m_) * m_;
  if (max_abs(gram - Mat::identity(n)) > 1e-9) {
    throw DomainError("IsometryMatrix: matrix is not orthogonal");
  }
}

Mat givens(double theta, PlaneKind kind) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat m(2);
  m(0, 0) = c;
  m(1, 0) = s;
  if (kind == PlaneKind::Rotation) {
    m(0, 1) = -s;
    m(1, 1) = c;
  } else {
    m(0, 1) = s;
    m(1, 1) = -c;
  }
  return m;
}

IsometryMatrix embed_plane(double theta, PlaneKind kind, int i, int j, int n) {
  if (!(0 <= i && i < j && j < n)) throw DimensionError("embed_plane: need 0 <= i < j < n");
  Mat m = Mat::identity(n);
  const Mat g = givens(theta, kind);
  m(i, i) = g(0, 0);
  m(i, j) = g(0, 1);
  m(j, i) = g(1, 0);
  m(j, j) = g(1, 1);
  return IsometryMatrix(std::move(m),
                        kind == PlaneKind::Rotation ? IsoKind::Rotation : IsoKind::Reflection);
}

namespace {

Mat build_product(const AngleVector& theta, PlaneKind kind) {
  const int n = angle_dim(theta.size());
  Mat m = Mat::identity(n);
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      m = embed_plane(theta.theta[k], kind, i, j, n).mat() * m;
    }
  }
  return m;
}

}  // namespace

IsometryMatrix build_rotation(const AngleVector& theta) {
  return IsometryMatrix(build_product(theta, PlaneKind::Rotation), IsoKind::Rotation);
}

IsometryMatrix build_reflection(const AngleVector& theta) {
  return IsometryMatrix(build_product(theta, PlaneKind::Reflection), IsoKind::Reflection);
}

SpdPoint apply(const IsometryMatrix& m, const SpdPoint& p) {
  if (m.dim() != p.dim()) throw DimensionError("apply: dimension mismatch");
  return SpdPoint(SymMat(m.mat() * p.mat() * transpose(m.mat())), unchecked);
}

SpdPoint point_reflection(const SpdPoint& q, const SpdPoint& p) {
  if (q.dim() != p.dim()) throw DimensionError("point_reflection: dimension mismatch");
  const SymMat pinv = matfun(p.sym(), MatFun::Pow, -1.0);
  return SpdPoint(SymMat(q.mat() * pinv.mat() * q.mat()), unchecked);
}

}  // namespace spdgyro

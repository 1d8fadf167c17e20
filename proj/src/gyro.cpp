#include "spdgyro/gyro.hpp"

#include <cassert>

namespace spdgyro {

SpdPoint gyro_add(const SpdPoint& a, const SpdPoint& b) {
  if (a.dim() != b.dim()) throw DimensionError("gyro_add: dimension mismatch");
  const SymMat root = matfun(a.sym(), MatFun::Sqrt);
  return SpdPoint(SymMat(root.mat() * b.mat() * root.mat()), unchecked);
}

SpdPoint gyro_neg(const SpdPoint& a) {
  return SpdPoint(matfun(a.sym(), MatFun::Pow, -1.0), unchecked);
}

SpdPoint gyration(const SpdPoint& a, const SpdPoint& b, const SpdPoint& c) {
  return gyro_add(gyro_neg(gyro_add(a, b)), gyro_add(a, gyro_add(b, c)));
}

SpdPoint gyro_coadd(const SpdPoint& a, const SpdPoint& b) {
  return gyro_add(a, gyration(a, gyro_neg(b), b));
}

SpdPoint gyro_cosub(const SpdPoint& a, const SpdPoint& b) {
  return gyro_coadd(a, gyro_neg(b));
}

SpdPoint scalar_mul(double alpha, const SpdPoint& p) {
  return SpdPoint(matfun(p.sym(), MatFun::Pow, alpha), unchecked);
}

SpdPoint matrix_scale(const SymMat& a, const SpdPoint& p) {
  if (a.dim() != p.dim()) throw DimensionError("matrix_scale: dimension mismatch");
  return exp_at_identity(hadamard(a, log_at_identity(p)));
}

SpdPoint solve_left(const SpdPoint& a, const SpdPoint& b) {
  return gyro_add(gyro_neg(a), b);
}

SpdPoint solve_right(const SpdPoint& a, const SpdPoint& b) {
  SpdPoint x = gyro_cosub(b, a);
  // The derivation chains several gyro identities; verify the residual.
  assert(frobenius(gyro_add(x, a).mat() - b.mat()) <=
         1e-8 * (1.0 + frobenius(b.mat())));
  return x;
}

}  // namespace spdgyro

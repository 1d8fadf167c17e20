#pragma once

#include "spdgyro/manifold.hpp"

namespace spdgyro {

// Gyrovector operations on SPD points with the identity as basepoint.
// Gyro-addition is neither commutative nor associative; the gyration
// automorphism captures the failure and drives the cancellation laws.

// a (+) b = sqrt(a) b sqrt(a)
SpdPoint gyro_add(const SpdPoint& a, const SpdPoint& b);

// (-) a = a^{-1}
SpdPoint gyro_neg(const SpdPoint& a);

// gyr(a,b)c = ((-)(a(+)b)) (+) (a (+) (b (+) c)), evaluated directly.
SpdPoint gyration(const SpdPoint& a, const SpdPoint& b, const SpdPoint& c);

// a [+] b = a (+) gyr(a, (-)b) b
SpdPoint gyro_coadd(const SpdPoint& a, const SpdPoint& b);

// a [-] b = a [+] ((-)b)
SpdPoint gyro_cosub(const SpdPoint& a, const SpdPoint& b);

// alpha (x) p = p^alpha
SpdPoint scalar_mul(double alpha, const SpdPoint& p);

// a (x) p = exp(a ⊙ log(p)), the Hadamard generalization of scalar powers.
SpdPoint matrix_scale(const SymMat& a, const SpdPoint& p);

// x with a (+) x = b, i.e. x = ((-)a) (+) b
SpdPoint solve_left(const SpdPoint& a, const SpdPoint& b);

// x with x (+) a = b, i.e. x = b [-] a
SpdPoint solve_right(const SpdPoint& a, const SpdPoint& b);

}  // namespace spdgyro

#include "spdgyro/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spdgyro {

SpdPoint::SpdPoint(SymMat m) : m_(std::move(m)) {
  const EigenDecomp e = eig_sym(m_);
  const double lmax = e.lambda.front();
  const double lmin = e.lambda.back();
  if (!(lmin > 1e-10 * lmax) || lmax <= 0.0) {
    std::ostringstream os;
    os << "SpdPoint: spectrum not positive definite (lambda_min=" << lmin
       << ", lambda_max=" << lmax << ")";
    throw DomainError(os.str());
  }
}

VvdVector::VvdVector(std::vector<double> v) : v_(std::move(v)) {
  for (size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i])) throw NumericalError("VvdVector: non-finite entry");
    if (i > 0 && v_[i - 1] < v_[i]) throw DomainError("VvdVector: not sorted descending");
  }
}

SpdPoint exp_at_identity(const SymMat& u) {
  return SpdPoint(matfun(u, MatFun::Exp), unchecked);
}

SymMat log_at_identity(const SpdPoint& p) { return matfun(p.sym(), MatFun::Log); }

SpdPoint exp_at(const SpdPoint& base, const SymMat& u) {
  if (base.dim() != u.dim()) throw DimensionError("exp_at: dimension mismatch");
  const EigenDecomp e = eig_sym(base.sym());
  const SymMat root = matfun(e, MatFun::Sqrt);
  const SymMat iroot = matfun(e, MatFun::InvSqrt);
  const SymMat inner(iroot.mat() * u.mat() * iroot.mat());
  const SymMat expd = matfun(inner, MatFun::Exp);
  return SpdPoint(SymMat(root.mat() * expd.mat() * root.mat()), unchecked);
}

SymMat log_at(const SpdPoint& base, const SpdPoint& q) {
  if (base.dim() != q.dim()) throw DimensionError("log_at: dimension mismatch");
  const EigenDecomp e = eig_sym(base.sym());
  const SymMat root = matfun(e, MatFun::Sqrt);
  const SymMat iroot = matfun(e, MatFun::InvSqrt);
  const SymMat inner(iroot.mat() * q.mat() * iroot.mat());
  const SymMat logd = matfun(inner, MatFun::Log);
  return SymMat(root.mat() * logd.mat() * root.mat());
}

VvdVector vvd(const SpdPoint& p, const SpdPoint& q) {
  if (p.dim() != q.dim()) throw DimensionError("vvd: dimension mismatch");
  const SymMat iroot = matfun(p.sym(), MatFun::InvSqrt);
  const SymMat conj(iroot.mat() * q.mat() * iroot.mat());
  const EigenDecomp e = eig_sym(conj);
  std::vector<double> v(e.lambda.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (e.lambda[i] <= 0.0) {
      throw NumericalError("vvd: conjugate lost positive definiteness", e.lambda[i]);
    }
    v[i] = std::log(e.lambda[i]);  // log is monotone, order survives
  }
  return VvdVector(std::move(v));
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Riemannian: return "riemannian";
    case Metric::F1: return "f1";
    case Metric::FInf: return "f_inf";
    case Metric::Stein: return "stein";
  }
  return "?";
}

namespace {

// log((e^{-x/2} + e^{x/2}) / 2) = log(cosh(x/2)), overflow-safe.
double stein_term(double x) {
  const double h = 0.5 * std::fabs(x);
  return h + std::log1p(std::exp(-2.0 * h)) - std::log(2.0);
}

}  // namespace

double vvd_norm(const VvdVector& v, Metric metric) {
  double acc = 0.0;
  switch (metric) {
    case Metric::Riemannian:
      for (double x : v.values()) acc += x * x;
      return std::sqrt(acc);
    case Metric::F1:
      for (double x : v.values()) acc += std::fabs(x);
      return acc;
    case Metric::FInf:
      for (double x : v.values()) acc = std::max(acc, std::fabs(x));
      return acc;
    case Metric::Stein:
      for (double x : v.values()) acc += stein_term(x);
      return acc;
  }
  return 0.0;
}

double dist(const SpdPoint& p, const SpdPoint& q, Metric metric) {
  return vvd_norm(vvd(p, q), metric);
}

double dist_squared(const SpdPoint& p, const SpdPoint& q, Metric metric) {
  const double d = dist(p, q, metric);
  return d * d;
}

double dist_bures_wasserstein(const SpdPoint& p, const SpdPoint& q) {
  if (p.dim() != q.dim()) throw DimensionError("dist_bures_wasserstein: dimension mismatch");
  const double inner = trace(p.mat() * q.mat());
  const double val = trace(p.mat()) + trace(q.mat()) - 2.0 * std::sqrt(std::max(0.0, inner));
  return std::sqrt(std::max(0.0, val));
}

double dist_log_euclidean(const SpdPoint& p, const SpdPoint& q) {
  if (p.dim() != q.dim()) throw DimensionError("dist_log_euclidean: dimension mismatch");
  return frobenius(log_at_identity(p).mat() - log_at_identity(q).mat());
}

}  // namespace spdgyro

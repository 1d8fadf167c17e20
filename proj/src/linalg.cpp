#include "spdgyro/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spdgyro {

namespace {

void require_same_dim(const Mat& a, const Mat& b, const char* op) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << op << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

Mat::Mat(int n, std::vector<double> data) : n_(n), a_(std::move(data)) {
  if (a_.size() != static_cast<size_t>(n) * n) {
    throw DimensionError("Mat: data size does not match dimension");
  }
}

Mat Mat::identity(int n) {
  Mat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(const std::vector<double>& d) {
  Mat m(static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_dim(*this, o, "add");
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_dim(*this, o, "sub");
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

bool Mat::all_finite() const {
  for (double v : a_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
  require_same_dim(a, b, "matmul");
  const int n = a.dim();
  Mat c(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Mat transpose(const Mat& a) {
  const int n = a.dim();
  Mat t(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(j, i) = a(i, j);
  return t;
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same_dim(a, b, "hadamard");
  Mat c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] *= b.data()[i];
  return c;
}

double trace(const Mat& a) {
  double t = 0.0;
  for (int i = 0; i < a.dim(); ++i) t += a(i, i);
  return t;
}

double frobenius(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Mat& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

Mat matinv(const Mat& m) {
  const int n = m.dim();
  const double guard = 1e-12 * std::max(max_abs(m), 1e-300);
  Mat a = m;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (std::fabs(a(piv, col)) < guard) {
      throw NumericalError("matinv: singular matrix (pivot below guard)", std::fabs(a(piv, col)));
    }
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

double det(const Mat& m) {
  const int n = m.dim();
  Mat a = m;
  double d = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    }
    if (a(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      d = -d;
    }
    d *= a(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return d;
}

SymMat::SymMat(const Mat& m) : m_(m.dim()) {
  const int n = m.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
  if (!m_.all_finite()) throw NumericalError("SymMat: non-finite entry");
}

SymMat operator+(const SymMat& a, const SymMat& b) { return SymMat(a.mat() + b.mat()); }
SymMat operator-(const SymMat& a, const SymMat& b) { return SymMat(a.mat() - b.mat()); }
SymMat operator*(double s, const SymMat& a) { return SymMat(s * a.mat()); }
SymMat hadamard(const SymMat& a, const SymMat& b) { return SymMat(hadamard(a.mat(), b.mat())); }

int triangular_dim(size_t len) {
  // len = n(n+1)/2  =>  n = (sqrt(8 len + 1) - 1) / 2
  const double nd = (std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0;
  const int n = static_cast<int>(std::lround(nd));
  if (n <= 0 || triangular_len(n) != len) {
    std::ostringstream os;
    os << "vector length " << len << " is not a triangular number";
    throw DimensionError(os.str());
  }
  return n;
}

SymMat sym_from_triangular(const std::vector<double>& x) {
  const int n = triangular_dim(x.size());
  Mat u(n);
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j, ++k) {
      u(i, j) += x[k];
      u(j, i) += x[k];  // doubles the diagonal when i == j
    }
  }
  return SymMat(u);
}

EigenDecomp eig_sym(const SymMat& m, int max_sweeps) {
  const int n = m.dim();
  Mat a = m.mat();
  Mat v = Mat::identity(n);
  const double norm = frobenius(a);
  const double tol = 1e-12 * norm;

  auto off_norm = [&a, n]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  double off = off_norm();
  int sweep = 0;
  while (off > tol) {
    if (sweep >= max_sweeps) {
      throw NumericalError("eig_sym: no convergence after sweep cap", off);
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Symmetric Schur rotation annihilating a(p,q).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++sweep;
    off = off_norm();
  }

  EigenDecomp e;
  e.lambda.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(), [&diag](int x, int y) { return diag[x] > diag[y]; });

  e.k = Mat(n);
  for (int col = 0; col < n; ++col) {
    const int src = order[col];
    e.lambda[col] = diag[src];
    // Sign convention: largest-magnitude entry positive.
    int arg = 0;
    for (int r = 1; r < n; ++r) {
      if (std::fabs(v(r, src)) > std::fabs(v(arg, src))) arg = r;
    }
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int r = 0; r < n; ++r) e.k(r, col) = sign * v(r, src);
  }
  return e;
}

const char* matfun_name(MatFun f) {
  switch (f) {
    case MatFun::Exp: return "exp";
    case MatFun::Log: return "log";
    case MatFun::Sqrt: return "sqrt";
    case MatFun::InvSqrt: return "inv_sqrt";
    case MatFun::Pow: return "pow";
  }
  return "?";
}

double matfun_scalar(MatFun f, double x, double alpha) {
  switch (f) {
    case MatFun::Exp: return std::exp(x);
    case MatFun::Log: return std::log(x);
    case MatFun::Sqrt: return std::sqrt(x);
    case MatFun::InvSqrt: return 1.0 / std::sqrt(x);
    case MatFun::Pow: return std::pow(x, alpha);
  }
  return 0.0;
}

double matfun_scalar_deriv(MatFun f, double x, double alpha) {
  switch (f) {
    case MatFun::Exp: return std::exp(x);
    case MatFun::Log: return 1.0 / x;
    case MatFun::Sqrt: return 0.5 / std::sqrt(x);
    case MatFun::InvSqrt: return -0.5 * std::pow(x, -1.5);
    case MatFun::Pow: return alpha * std::pow(x, alpha - 1.0);
  }
  return 0.0;
}

namespace {

bool needs_positive_spectrum(MatFun f) { return f != MatFun::Exp; }

void check_spectrum(const EigenDecomp& e, MatFun f) {
  if (!needs_positive_spectrum(f)) return;
  for (double l : e.lambda) {
    if (l <= 0.0) {
      std::ostringstream os;
      os << "matfun(" << matfun_name(f) << "): non-positive eigenvalue " << l;
      throw DomainError(os.str());
    }
  }
}

}  // namespace

SymMat matfun(const EigenDecomp& e, MatFun f, double alpha) {
  check_spectrum(e, f);
  const int n = e.k.dim();
  // K diag(f(lambda)) K^T without forming the diagonal matrix.
  Mat scaled(n);
  for (int j = 0; j < n; ++j) {
    const double fl = matfun_scalar(f, e.lambda[j], alpha);
    for (int i = 0; i < n; ++i) scaled(i, j) = e.k(i, j) * fl;
  }
  return SymMat(scaled * transpose(e.k));
}

SymMat matfun(const SymMat& m, MatFun f, double alpha) {
  return matfun(eig_sym(m), f, alpha);
}

}  // namespace spdgyro

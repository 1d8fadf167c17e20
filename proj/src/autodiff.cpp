#include "spdgyro/autodiff.hpp"

#include <cmath>
#include <utility>

namespace spdgyro {

Mat loewner_matrix(const std::vector<double>& lambda, MatFun f, double alpha) {
  const int n = static_cast<int>(lambda.size());
  Mat g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double li = lambda[i];
      const double lj = lambda[j];
      const double delta = 1e-7 * (1.0 + std::fabs(li) + std::fabs(lj));
      double v;
      if (std::fabs(li - lj) > delta) {
        v = (matfun_scalar(f, li, alpha) - matfun_scalar(f, lj, alpha)) / (li - lj);
      } else {
        v = matfun_scalar_deriv(f, 0.5 * (li + lj), alpha);
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

enum class Tape::Op {
  InputMat,
  InputScalar,
  Add,
  Sub,
  Scale,
  MatMul,
  MatInv,
  Hadamard,
  Symmetrize,
  Transpose,
  MatFunOp,
  LogEigvals,
  Trace,
  FrobeniusSq,
  PlaneRot,
  SumSq,
  SumAbs,
  MaxAbs,
  AddS,
  SubS,
  Neg,
  Square,
};

struct Tape::Node {
  Op op;
  Id a = -1;
  Id b = -1;
  double c = 0.0;  // scale factor / pow exponent
  MatFun f = MatFun::Exp;
  PlaneKind pk = PlaneKind::Rotation;
  int pi = 0, pj = 0, pn = 0;

  enum class Kind { Scalar, Vector, Matrix } kind = Kind::Scalar;
  double sval = 0.0;
  std::vector<double> vval;
  Mat mval;

  double sadj = 0.0;
  std::vector<double> vadj;
  Mat madj;

  bool has_eig = false;
  EigenDecomp eig;
};

Tape::Tape() = default;
Tape::~Tape() = default;
Tape::Tape(Tape&&) noexcept = default;
Tape& Tape::operator=(Tape&&) noexcept = default;

size_t Tape::size() const { return nodes_.size(); }

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return static_cast<Id>(nodes_.size()) - 1;
}

const Tape::Node& Tape::at(Id id) const {
  if (id < 0 || id >= static_cast<Id>(nodes_.size())) {
    throw UsageError("tape: node id out of range");
  }
  return nodes_[static_cast<size_t>(id)];
}

void Tape::check_backward_done() const {
  if (!backward_done_) throw UsageError("tape: adjoint read before backward");
}

Tape::Id Tape::input(Mat m) {
  Node n;
  n.op = Op::InputMat;
  n.kind = Node::Kind::Matrix;
  n.mval = std::move(m);
  return push(std::move(n));
}

Tape::Id Tape::input(double s) {
  Node n;
  n.op = Op::InputScalar;
  n.kind = Node::Kind::Scalar;
  n.sval = s;
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Matrix;
  n.mval = at(a).mval + at(b).mval;
  return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Matrix;
  n.mval = at(a).mval - at(b).mval;
  return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double c) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.c = c;
  n.kind = Node::Kind::Matrix;
  n.mval = c * at(a).mval;
  return push(std::move(n));
}

Tape::Id Tape::matmul(Id a, Id b) {
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Matrix;
  n.mval = at(a).mval * at(b).mval;
  return push(std::move(n));
}

Tape::Id Tape::matinv(Id a) {
  Node n;
  n.op = Op::MatInv;
  n.a = a;
  n.kind = Node::Kind::Matrix;
  n.mval = spdgyro::matinv(at(a).mval);
  return push(std::move(n));
}

Tape::Id Tape::hadamard(Id a, Id b) {
  Node n;
  n.op = Op::Hadamard;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Matrix;
  n.mval = spdgyro::hadamard(at(a).mval, at(b).mval);
  return push(std::move(n));
}

Tape::Id Tape::symmetrize(Id a) {
  Node n;
  n.op = Op::Symmetrize;
  n.a = a;
  n.kind = Node::Kind::Matrix;
  n.mval = 0.5 * (at(a).mval + spdgyro::transpose(at(a).mval));
  return push(std::move(n));
}

Tape::Id Tape::transpose(Id a) {
  Node n;
  n.op = Op::Transpose;
  n.a = a;
  n.kind = Node::Kind::Matrix;
  n.mval = spdgyro::transpose(at(a).mval);
  return push(std::move(n));
}

Tape::Id Tape::matfun(Id a, MatFun f, double alpha) {
  Node n;
  n.op = Op::MatFunOp;
  n.a = a;
  n.f = f;
  n.c = alpha;
  n.kind = Node::Kind::Matrix;
  n.eig = eig_sym(SymMat(at(a).mval));
  n.has_eig = true;
  n.mval = spdgyro::matfun(n.eig, f, alpha).mat();
  return push(std::move(n));
}

Tape::Id Tape::log_eigvals(Id a) {
  Node n;
  n.op = Op::LogEigvals;
  n.a = a;
  n.kind = Node::Kind::Vector;
  n.eig = eig_sym(SymMat(at(a).mval));
  n.has_eig = true;
  n.vval.resize(n.eig.lambda.size());
  for (size_t i = 0; i < n.eig.lambda.size(); ++i) {
    if (n.eig.lambda[i] <= 0.0) {
      throw DomainError("log_eigvals: non-positive eigenvalue");
    }
    n.vval[i] = std::log(n.eig.lambda[i]);
  }
  return push(std::move(n));
}

Tape::Id Tape::trace(Id a) {
  Node n;
  n.op = Op::Trace;
  n.a = a;
  n.kind = Node::Kind::Scalar;
  n.sval = spdgyro::trace(at(a).mval);
  return push(std::move(n));
}

Tape::Id Tape::frobenius_sq(Id a) {
  Node n;
  n.op = Op::FrobeniusSq;
  n.a = a;
  n.kind = Node::Kind::Scalar;
  const double fr = frobenius(at(a).mval);
  n.sval = fr * fr;
  return push(std::move(n));
}

Tape::Id Tape::plane_rotation(Id theta, PlaneKind kind, int i, int j, int n_dim) {
  Node n;
  n.op = Op::PlaneRot;
  n.a = theta;
  n.pk = kind;
  n.pi = i;
  n.pj = j;
  n.pn = n_dim;
  n.kind = Node::Kind::Matrix;
  n.mval = embed_plane(at(theta).sval, kind, i, j, n_dim).mat();
  return push(std::move(n));
}

Tape::Id Tape::sum_sq(Id v) {
  Node n;
  n.op = Op::SumSq;
  n.a = v;
  n.kind = Node::Kind::Scalar;
  for (double x : at(v).vval) n.sval += x * x;
  return push(std::move(n));
}

Tape::Id Tape::sum_abs(Id v) {
  Node n;
  n.op = Op::SumAbs;
  n.a = v;
  n.kind = Node::Kind::Scalar;
  for (double x : at(v).vval) n.sval += std::fabs(x);
  return push(std::move(n));
}

Tape::Id Tape::max_abs(Id v) {
  Node n;
  n.op = Op::MaxAbs;
  n.a = v;
  n.kind = Node::Kind::Scalar;
  for (double x : at(v).vval) n.sval = std::max(n.sval, std::fabs(x));
  return push(std::move(n));
}

Tape::Id Tape::add_s(Id a, Id b) {
  Node n;
  n.op = Op::AddS;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Scalar;
  n.sval = at(a).sval + at(b).sval;
  return push(std::move(n));
}

Tape::Id Tape::sub_s(Id a, Id b) {
  Node n;
  n.op = Op::SubS;
  n.a = a;
  n.b = b;
  n.kind = Node::Kind::Scalar;
  n.sval = at(a).sval - at(b).sval;
  return push(std::move(n));
}

Tape::Id Tape::neg(Id a) {
  Node n;
  n.op = Op::Neg;
  n.a = a;
  n.kind = Node::Kind::Scalar;
  n.sval = -at(a).sval;
  return push(std::move(n));
}

Tape::Id Tape::square(Id a) {
  Node n;
  n.op = Op::Square;
  n.a = a;
  n.kind = Node::Kind::Scalar;
  n.sval = at(a).sval * at(a).sval;
  return push(std::move(n));
}

double Tape::scalar_value(Id id) const { return at(id).sval; }
const Mat& Tape::mat_value(Id id) const { return at(id).mval; }
const std::vector<double>& Tape::vec_value(Id id) const { return at(id).vval; }

double Tape::scalar_adjoint(Id id) const {
  check_backward_done();
  return at(id).sadj;
}

const Mat& Tape::mat_adjoint(Id id) const {
  check_backward_done();
  return at(id).madj;
}

void Tape::backward(Id root, double seed) {
  if (nodes_.empty()) throw UsageError("tape: backward on empty tape");
  if (root < 0 || root >= static_cast<Id>(nodes_.size())) {
    throw UsageError("tape: backward root out of range");
  }
  if (nodes_[static_cast<size_t>(root)].kind != Node::Kind::Scalar) {
    throw UsageError("tape: backward root must be a scalar node");
  }

  for (Node& n : nodes_) {
    n.sadj = 0.0;
    if (n.kind == Node::Kind::Vector) {
      n.vadj.assign(n.vval.size(), 0.0);
    } else if (n.kind == Node::Kind::Matrix) {
      n.madj = Mat(n.mval.dim());
    }
  }
  nodes_[static_cast<size_t>(root)].sadj = seed;

  for (Id id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    switch (n.op) {
      case Op::InputMat:
      case Op::InputScalar:
        break;
      case Op::Add:
        nodes_[n.a].madj += n.madj;
        nodes_[n.b].madj += n.madj;
        break;
      case Op::Sub:
        nodes_[n.a].madj += n.madj;
        nodes_[n.b].madj -= n.madj;
        break;
      case Op::Scale:
        nodes_[n.a].madj += n.c * n.madj;
        break;
      case Op::MatMul:
        nodes_[n.a].madj += n.madj * spdgyro::transpose(nodes_[n.b].mval);
        nodes_[n.b].madj += spdgyro::transpose(nodes_[n.a].mval) * n.madj;
        break;
      case Op::MatInv: {
        const Mat yt = spdgyro::transpose(n.mval);
        nodes_[n.a].madj -= yt * n.madj * yt;
        break;
      }
      case Op::Hadamard:
        nodes_[n.a].madj += spdgyro::hadamard(n.madj, nodes_[n.b].mval);
        nodes_[n.b].madj += spdgyro::hadamard(n.madj, nodes_[n.a].mval);
        break;
      case Op::Symmetrize:
        nodes_[n.a].madj += 0.5 * (n.madj + spdgyro::transpose(n.madj));
        break;
      case Op::Transpose:
        nodes_[n.a].madj += spdgyro::transpose(n.madj);
        break;
      case Op::MatFunOp: {
        // A_bar += K (G o (K^T sym(Y_bar) K)) K^T, with G the Loewner matrix.
        const Mat ybar = 0.5 * (n.madj + spdgyro::transpose(n.madj));
        const Mat kt = spdgyro::transpose(n.eig.k);
        const Mat w = kt * ybar * n.eig.k;
        const Mat g = loewner_matrix(n.eig.lambda, n.f, n.c);
        nodes_[n.a].madj += n.eig.k * spdgyro::hadamard(g, w) * kt;
        break;
      }
      case Op::LogEigvals: {
        // A_bar += sum_i (y_bar_i / lambda_i) u_i u_i^T
        const int dim = n.eig.k.dim();
        Mat scaled(dim);
        for (int col = 0; col < dim; ++col) {
          const double w = n.vadj[static_cast<size_t>(col)] / n.eig.lambda[static_cast<size_t>(col)];
          for (int r = 0; r < dim; ++r) scaled(r, col) = n.eig.k(r, col) * w;
        }
        nodes_[n.a].madj += scaled * spdgyro::transpose(n.eig.k);
        break;
      }
      case Op::Trace: {
        Mat& tgt = nodes_[n.a].madj;
        for (int i = 0; i < tgt.dim(); ++i) tgt(i, i) += n.sadj;
        break;
      }
      case Op::FrobeniusSq:
        nodes_[n.a].madj += (2.0 * n.sadj) * nodes_[n.a].mval;
        break;
      case Op::PlaneRot: {
        const double th = nodes_[n.a].sval;
        const double c = std::cos(th);
        const double s = std::sin(th);
        const Mat& yb = n.madj;
        double acc = -s * yb(n.pi, n.pi) + c * yb(n.pj, n.pi);
        if (n.pk == PlaneKind::Rotation) {
          acc += -c * yb(n.pi, n.pj) - s * yb(n.pj, n.pj);
        } else {
          acc += c * yb(n.pi, n.pj) + s * yb(n.pj, n.pj);
        }
        nodes_[n.a].sadj += acc;
        break;
      }
      case Op::SumSq: {
        auto& va = nodes_[n.a].vadj;
        const auto& vv = nodes_[n.a].vval;
        for (size_t i = 0; i < vv.size(); ++i) va[i] += 2.0 * n.sadj * vv[i];
        break;
      }
      case Op::SumAbs: {
        auto& va = nodes_[n.a].vadj;
        const auto& vv = nodes_[n.a].vval;
        for (size_t i = 0; i < vv.size(); ++i) {
          if (vv[i] > 0.0) va[i] += n.sadj;
          else if (vv[i] < 0.0) va[i] -= n.sadj;
        }
        break;
      }
      case Op::MaxAbs: {
        auto& va = nodes_[n.a].vadj;
        const auto& vv = nodes_[n.a].vval;
        size_t arg = 0;
        for (size_t i = 1; i < vv.size(); ++i) {
          if (std::fabs(vv[i]) > std::fabs(vv[arg])) arg = i;
        }
        if (!vv.empty() && vv[arg] != 0.0) {
          va[arg] += vv[arg] > 0.0 ? n.sadj : -n.sadj;
        }
        break;
      }
      case Op::AddS:
        nodes_[n.a].sadj += n.sadj;
        nodes_[n.b].sadj += n.sadj;
        break;
      case Op::SubS:
        nodes_[n.a].sadj += n.sadj;
        nodes_[n.b].sadj -= n.sadj;
        break;
      case Op::Neg:
        nodes_[n.a].sadj -= n.sadj;
        break;
      case Op::Square:
        nodes_[n.a].sadj += 2.0 * nodes_[n.a].sval * n.sadj;
        break;
    }
  }
  backward_done_ = true;
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

double grad_check(const std::function<double(const std::vector<double>&)>& eval,
                  const std::vector<double>& analytic, std::vector<double> params, double h) {
  if (analytic.size() != params.size()) {
    throw DimensionError("grad_check: gradient/parameter size mismatch");
  }
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double fp = eval(params);
    params[i] = saved - h;
    const double fm = eval(params);
    params[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double err = std::fabs(analytic[i] - numeric) / std::max(1e-8, std::fabs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace spdgyro

#include "spdgyro/kgmodel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace spdgyro {

int Vocab::get_or_add(const std::string& name) {
  auto it = ids.find(name);
  if (it != ids.end()) return it->second;
  const int id = static_cast<int>(names.size());
  ids.emplace(name, id);
  names.push_back(name);
  return id;
}

int KgDataset::inverse_rel(int r) const {
  if (!augmented) throw UsageError("inverse_rel: dataset not augmented");
  return r < raw_relations ? r + raw_relations : r - raw_relations;
}

const std::vector<int>& KgDataset::true_tails(int head, int rel) const {
  static const std::vector<int> kEmpty;
  auto it = filter.find(filter_key(head, rel));
  return it == filter.end() ? kEmpty : it->second;
}

bool KgDataset::is_true(int head, int rel, int tail) const {
  const auto& tails = true_tails(head, rel);
  return std::binary_search(tails.begin(), tails.end(), tail);
}

std::vector<Triple> load_triples(const std::string& path, Vocab& entities, Vocab& relations) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triple file: " + path);
  std::vector<Triple> triples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.find('\t', t2 + 1) != std::string::npos) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected head<TAB>relation<TAB>tail";
      throw ParseError(os.str());
    }
    const std::string h = line.substr(0, t1);
    const std::string r = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string t = line.substr(t2 + 1);
    if (h.empty() || r.empty() || t.empty()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": empty field";
      throw ParseError(os.str());
    }
    triples.push_back({entities.get_or_add(h), relations.get_or_add(r), entities.get_or_add(t)});
  }
  return triples;
}

KgDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  KgDataset ds;
  const fs::path base(dir);
  if (!fs::exists(base)) throw IoError("data directory does not exist: " + dir);
  ds.train = load_triples((base / "train.txt").string(), ds.entities, ds.relations);
  const int train_entities = ds.entities.size();
  ds.valid = load_triples((base / "valid.txt").string(), ds.entities, ds.relations);
  ds.test = load_triples((base / "test.txt").string(), ds.entities, ds.relations);
  ds.unseen_entities = ds.entities.size() - train_entities;
  ds.raw_relations = ds.relations.size();
  return ds;
}

void augment_inverse(KgDataset& ds) {
  if (ds.augmented) throw UsageError("augment_inverse: already augmented");
  ds.raw_relations = ds.relations.size();
  for (int r = 0; r < ds.raw_relations; ++r) {
    ds.relations.get_or_add("inv_" + ds.relations.names[r]);
  }
  const size_t n_train = ds.train.size();
  ds.train.reserve(2 * n_train);
  for (size_t i = 0; i < n_train; ++i) {
    const Triple& t = ds.train[i];
    ds.train.push_back({t.tail, t.rel + ds.raw_relations, t.head});
  }
  ds.augmented = true;
}

void build_filter_index(KgDataset& ds) {
  if (!ds.augmented) throw UsageError("build_filter_index: augment first");
  ds.filter.clear();
  auto insert = [&ds](const Triple& t) {
    ds.filter[ds.filter_key(t.head, t.rel)].push_back(t.tail);
    ds.filter[ds.filter_key(t.tail, ds.inverse_rel(t.rel))].push_back(t.head);
  };
  for (const Triple& t : ds.train) insert(t);
  for (const Triple& t : ds.valid) insert(t);
  for (const Triple& t : ds.test) insert(t);
  for (auto& [key, tails] : ds.filter) {
    std::sort(tails.begin(), tails.end());
    tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
  }
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Scaling: return "scaling";
    case ModelKind::Rotation: return "rotation";
    case ModelKind::Reflection: return "reflection";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "scaling") return ModelKind::Scaling;
  if (name == "rotation") return ModelKind::Rotation;
  if (name == "reflection") return ModelKind::Reflection;
  throw UsageError("unknown model kind: " + name + " (expected scaling|rotation|reflection)");
}

Metric metric_from_name(const std::string& name) {
  if (name == "riemannian") return Metric::Riemannian;
  if (name == "f1") return Metric::F1;
  if (name == "f_inf") return Metric::FInf;
  if (name == "stein") return Metric::Stein;
  throw UsageError("unknown metric: " + name);
}

size_t KgModel::param_count() const {
  return static_cast<size_t>(entities + relations) * tri_len() +
         static_cast<size_t>(relations) * transform_len() + static_cast<size_t>(entities);
}

KgModel KgModel::shaped(ModelKind kind, Metric metric, int n, int entities, int relations) {
  if (metric != Metric::Riemannian && metric != Metric::F1) {
    throw UsageError("model metric must be riemannian or f1");
  }
  if (n <= 0 || entities <= 0 || relations <= 0) {
    throw DimensionError("KgModel: n, entities and relations must be positive");
  }
  KgModel m;
  m.kind = kind;
  m.metric = metric;
  m.n = n;
  m.entities = entities;
  m.relations = relations;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

KgModel KgModel::init(ModelKind kind, Metric metric, int n, int entities, int relations,
                      Rng& rng) {
  KgModel m = shaped(kind, metric, n, entities, relations);
  const size_t tangent_end = static_cast<size_t>(entities + relations) * m.tri_len();
  for (size_t i = 0; i < tangent_end; ++i) m.params[i] = rng.normal(0.0, 0.05);
  const size_t transform_end = tangent_end + static_cast<size_t>(relations) * m.transform_len();
  if (kind == ModelKind::Scaling) {
    for (size_t i = tangent_end; i < transform_end; ++i) m.params[i] = rng.normal(0.0, 0.05);
  } else {
    for (size_t i = tangent_end; i < transform_end; ++i) m.params[i] = rng.uniform(-M_PI, M_PI);
  }
  // biases stay 0
  return m;
}

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

SymMat tangent_of(std::span<const double> tri) { return sym_from_triangular(to_vec(tri)); }

}  // namespace

SpdPoint embed_entity(const KgModel& m, int e) {
  return exp_at_identity(tangent_of(m.entity_param(e)));
}

SpdPoint embed_rel_add(const KgModel& m, int r) {
  return exp_at_identity(tangent_of(m.rel_add_param(r)));
}

SpdPoint transformed_head(const KgModel& m, int h, int r) {
  const SymMat u_h = tangent_of(m.entity_param(h));
  if (m.kind == ModelKind::Scaling) {
    // A (x) exp(U) = exp(A o U): the tangent parametrization makes log(H)
    // available exactly, no second eigendecomposition needed.
    const SymMat a = tangent_of(m.rel_transform_param(r));
    return exp_at_identity(hadamard(a, u_h));
  }
  AngleVector theta{to_vec(m.rel_transform_param(r))};
  const IsometryMatrix iso =
      m.kind == ModelKind::Rotation ? build_rotation(theta) : build_reflection(theta);
  return apply(iso, exp_at_identity(u_h));
}

SpdPoint query_point(const KgModel& m, int h, int r) {
  return gyro_add(transformed_head(m, h, r), embed_rel_add(m, r));
}

double score_tail(const KgModel& m, const SpdPoint& query, const SpdPoint& tail_point,
                  double bias_head, int t) {
  return -dist_squared(query, tail_point, m.metric) + bias_head + m.bias(t);
}

double score(const KgModel& m, const Triple& triple) {
  return score_tail(m, query_point(m, triple.head, triple.rel), embed_entity(m, triple.tail),
                    m.bias(triple.head), triple.tail);
}

namespace {

// Scatter a symmetric-matrix adjoint back onto the packed triangular
// parameters of U = X + X^T.
void fold_tri_adjoint(const Mat& ubar, double* grad, int n) {
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j, ++k) {
      grad[k] += ubar(i, j) + ubar(j, i);
    }
  }
}

}  // namespace

ScoreRecording record_score(const KgModel& m, const Triple& triple, Tape& tape) {
  const int n = m.n;
  tape.reset();

  ScoreRecording rec;
  rec.model_ = &m;
  rec.tape_ = &tape;
  rec.triple_ = triple;

  rec.u_h_ = tape.input(tangent_of(m.entity_param(triple.head)).mat());
  rec.u_t_ = tape.input(tangent_of(m.entity_param(triple.tail)).mat());
  rec.u_r_ = tape.input(tangent_of(m.rel_add_param(triple.rel)).mat());
  rec.b_h_ = tape.input(m.bias(triple.head));
  rec.b_t_ = tape.input(m.bias(triple.tail));

  Tape::Id transformed;
  if (m.kind == ModelKind::Scaling) {
    rec.a_r_ = tape.input(tangent_of(m.rel_transform_param(triple.rel)).mat());
    transformed = tape.matfun(tape.hadamard(rec.a_r_, rec.u_h_), MatFun::Exp);
  } else {
    const auto angles = m.rel_transform_param(triple.rel);
    const PlaneKind pk =
        m.kind == ModelKind::Rotation ? PlaneKind::Rotation : PlaneKind::Reflection;
    rec.thetas_.reserve(angles.size());
    Tape::Id iso = -1;
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++k) {
        const Tape::Id th = tape.input(angles[k]);
        rec.thetas_.push_back(th);
        const Tape::Id plane = tape.plane_rotation(th, pk, i, j, n);
        iso = (iso < 0) ? plane : tape.matmul(plane, iso);
      }
    }
    const Tape::Id h_pt = tape.matfun(rec.u_h_, MatFun::Exp);
    if (iso < 0) {
      transformed = h_pt;  // n == 1 has no planes
    } else {
      transformed = tape.symmetrize(tape.matmul(tape.matmul(iso, h_pt), tape.transpose(iso)));
    }
  }

  // (+) R, then squared distance to T on the symmetric conjugate.
  const Tape::Id root = tape.matfun(transformed, MatFun::Sqrt);
  const Tape::Id r_pt = tape.matfun(rec.u_r_, MatFun::Exp);
  const Tape::Id y = tape.symmetrize(tape.matmul(tape.matmul(root, r_pt), root));
  const Tape::Id iroot = tape.matfun(y, MatFun::InvSqrt);
  const Tape::Id t_pt = tape.matfun(rec.u_t_, MatFun::Exp);
  const Tape::Id conj = tape.symmetrize(tape.matmul(tape.matmul(iroot, t_pt), iroot));
  const Tape::Id v = tape.log_eigvals(conj);

  Tape::Id d2;
  if (m.metric == Metric::Riemannian) {
    d2 = tape.sum_sq(v);
  } else {
    d2 = tape.square(tape.sum_abs(v));
  }
  rec.phi_ = tape.add_s(tape.add_s(tape.neg(d2), rec.b_h_), rec.b_t_);
  return rec;
}

void ScoreRecording::accumulate_grad(double seed, std::vector<double>& grad) {
  const KgModel& m = *model_;
  if (grad.size() != m.params.size()) {
    throw DimensionError("accumulate_grad: gradient buffer size mismatch");
  }
  Tape& tape = *tape_;
  const int n = m.n;
  tape.backward(phi_, seed);

  fold_tri_adjoint(tape.mat_adjoint(u_h_), grad.data() + m.entity_offset(triple_.head), n);
  fold_tri_adjoint(tape.mat_adjoint(u_t_), grad.data() + m.entity_offset(triple_.tail), n);
  fold_tri_adjoint(tape.mat_adjoint(u_r_), grad.data() + m.rel_add_offset(triple_.rel), n);
  if (m.kind == ModelKind::Scaling) {
    fold_tri_adjoint(tape.mat_adjoint(a_r_), grad.data() + m.rel_transform_offset(triple_.rel),
                     n);
  } else {
    double* tgt = grad.data() + m.rel_transform_offset(triple_.rel);
    for (size_t k = 0; k < thetas_.size(); ++k) tgt[k] += tape.scalar_adjoint(thetas_[k]);
  }
  grad[m.bias_offset(triple_.head)] += tape.scalar_adjoint(b_h_);
  grad[m.bias_offset(triple_.tail)] += tape.scalar_adjoint(b_t_);
}

double score_with_grad(const KgModel& m, const Triple& triple, double seed,
                       std::vector<double>& grad, Tape& tape) {
  ScoreRecording rec = record_score(m, triple, tape);
  rec.accumulate_grad(seed, grad);
  return rec.phi();
}

std::vector<Triple> negative_samples(Rng& rng, std::span<const Triple> batch, int k,
                                     int num_entities) {
  std::vector<Triple> out;
  out.reserve(batch.size() * static_cast<size_t>(std::max(0, k)));
  for (const Triple& t : batch) {
    for (int i = 0; i < k; ++i) {
      out.push_back({t.head, t.rel, static_cast<int>(rng.uniform_int(num_entities))});
    }
  }
  return out;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double loss(const KgModel& m, std::span<const Triple> positives,
            std::span<const Triple> negatives) {
  double total = 0.0;
  for (const Triple& t : positives) total += softplus(-score(m, t));
  for (const Triple& t : negatives) total += softplus(score(m, t));
  return total;
}

}  // namespace spdgyro

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "spdgyro/autodiff.hpp"
#include "spdgyro/gyro.hpp"
#include "spdgyro/rng.hpp"

namespace spdgyro {

struct Triple {
  int head = 0;
  int rel = 0;
  int tail = 0;

  bool operator==(const Triple&) const = default;
};

// String-to-id mapping, ids in first-appearance order.
struct Vocab {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;

  int get_or_add(const std::string& name);
  int size() const { return static_cast<int>(names.size()); }
};

struct KgDataset {
  Vocab entities;
  Vocab relations;
  std::vector<Triple> train, valid, test;

  int raw_relations = 0;   // relation count before inverse augmentation
  bool augmented = false;
  int unseen_entities = 0; // entities first seen in valid/test

  // (head, rel) -> sorted distinct true tails over all splits, both
  // directions. Built by build_filter_index after augmentation.
  std::unordered_map<int64_t, std::vector<int>> filter;

  int num_entities() const { return entities.size(); }
  int num_relations() const { return relations.size(); }

  // Inverse relation id: r + raw for raw relations, r - raw for inverses.
  int inverse_rel(int r) const;

  int64_t filter_key(int head, int rel) const {
    return static_cast<int64_t>(head) * num_relations() + rel;
  }
  const std::vector<int>& true_tails(int head, int rel) const;
  bool is_true(int head, int rel, int tail) const;
};

// One tab-separated triple per line: head<TAB>relation<TAB>tail. Throws
// ParseError with line numbers on malformed input.
std::vector<Triple> load_triples(const std::string& path, Vocab& entities, Vocab& relations);

// Loads train.txt / valid.txt / test.txt from dir, ids assigned in
// first-appearance order over train then valid then test.
KgDataset load_dataset(const std::string& dir);

// Adds (t, r_inv, h) to the train split for every train triple and doubles
// the relation vocabulary; inverse of relation r gets id r + raw count.
// Valid/test are left as stored; evaluation generates their inverses on the
// fly.
void augment_inverse(KgDataset& ds);

void build_filter_index(KgDataset& ds);

enum class ModelKind { Scaling, Rotation, Reflection };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);
Metric metric_from_name(const std::string& name);

// Entity and relation parameters live in the tangent space (packed
// triangular vectors mapped through X + X^T and the exponential), relation
// transforms are triangular vectors (scaling) or angle vectors
// (rotation/reflection), plus one scalar bias per entity. The storage is one
// flat array so the optimizer can treat everything uniformly.
class KgModel {
 public:
  ModelKind kind = ModelKind::Scaling;
  Metric metric = Metric::Riemannian;
  int n = 0;
  int entities = 0;
  int relations = 0;
  std::vector<double> params;

  static KgModel init(ModelKind kind, Metric metric, int n, int entities, int relations,
                      Rng& rng);
  // Zero-filled parameters, shapes only (checkpoint loading).
  static KgModel shaped(ModelKind kind, Metric metric, int n, int entities, int relations);

  size_t tri_len() const { return triangular_len(n); }
  size_t transform_len() const {
    return kind == ModelKind::Scaling ? triangular_len(n) : angle_len(n);
  }
  size_t param_count() const;

  size_t entity_offset(int e) const { return static_cast<size_t>(e) * tri_len(); }
  size_t rel_add_offset(int r) const {
    return static_cast<size_t>(entities) * tri_len() + static_cast<size_t>(r) * tri_len();
  }
  size_t rel_transform_offset(int r) const {
    return static_cast<size_t>(entities + relations) * tri_len() +
           static_cast<size_t>(r) * transform_len();
  }
  size_t bias_offset(int e) const {
    return static_cast<size_t>(entities + relations) * tri_len() +
           static_cast<size_t>(relations) * transform_len() + static_cast<size_t>(e);
  }

  std::span<const double> entity_param(int e) const {
    return {params.data() + entity_offset(e), tri_len()};
  }
  std::span<const double> rel_add_param(int r) const {
    return {params.data() + rel_add_offset(r), tri_len()};
  }
  std::span<const double> rel_transform_param(int r) const {
    return {params.data() + rel_transform_offset(r), transform_len()};
  }
  double bias(int e) const { return params[bias_offset(e)]; }
};

SpdPoint embed_entity(const KgModel& m, int e);
SpdPoint embed_rel_add(const KgModel& m, int r);

// (M_r (x) H) for the scaling model, (M_r (o) H) for isometric models.
SpdPoint transformed_head(const KgModel& m, int h, int r);

// (M_r . H) (+) R — everything of the score that does not depend on the
// tail. Evaluation reuses one query point across all candidate tails.
SpdPoint query_point(const KgModel& m, int h, int r);

double score_tail(const KgModel& m, const SpdPoint& query, const SpdPoint& tail_point,
                  double bias_head, int t);

// phi(h, r, t) = -d((M_r . H) (+) R, T)^2 + b_h + b_t
double score(const KgModel& m, const Triple& triple);

// A recorded score graph. The forward value is available immediately; the
// backward seed usually depends on it (the loss derivative), so the sweep is
// a separate step. References the tape and model it was recorded from.
class ScoreRecording {
 public:
  double phi() const { return tape_->scalar_value(phi_); }
  // Runs backward with the given seed and scatters the parameter adjoints
  // into grad (same layout as model.params).
  void accumulate_grad(double seed, std::vector<double>& grad);

 private:
  friend ScoreRecording record_score(const KgModel& m, const Triple& triple, Tape& tape);
  const KgModel* model_ = nullptr;
  Tape* tape_ = nullptr;
  Triple triple_;
  Tape::Id u_h_ = -1, u_t_ = -1, u_r_ = -1, a_r_ = -1, b_h_ = -1, b_t_ = -1, phi_ = -1;
  std::vector<Tape::Id> thetas_;
};

// Records phi(h, r, t) on the tape (tape is reset first).
ScoreRecording record_score(const KgModel& m, const Triple& triple, Tape& tape);

// Convenience wrapper: record, backward with seed, scatter. Returns phi.
double score_with_grad(const KgModel& m, const Triple& triple, double seed,
                       std::vector<double>& grad, Tape& tape);

// k uniform tail corruptions per positive (head corruption is covered by
// inverse relations). Corruptions are not filtered and may accidentally be
// true triples.
std::vector<Triple> negative_samples(Rng& rng, std::span<const Triple> batch, int k,
                                     int num_entities);

// Cross-entropy with uniform negative sampling: sum of log(1 + exp(Y phi))
// with Y = -1 for positives, +1 for negatives. Stable softplus evaluation.
double loss(const KgModel& m, std::span<const Triple> positives,
            std::span<const Triple> negatives);

// log(1 + exp(x)) without overflow.
double softplus(double x);
double sigmoid(double x);

}  // namespace spdgyro

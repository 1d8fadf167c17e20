#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdgyro/kgmodel.hpp"

namespace spdgyro {

struct TrainConfig {
  int epochs = 5000;
  int batch_size = 4096;
  int negatives = 10;
  double lr = 1e-4;
  double weight_decay = 1e-2;
  int burn_in_epochs = 10;
  double burn_in_factor = 10.0;
  // Patience values are phrased in epochs; the loop converts them to dev
  // evaluation counts, ceil(patience / eval_interval).
  int plateau_patience = 50;
  double plateau_factor = 2.0;
  int early_stop_patience = 500;
  int eval_interval = 20;
  uint64_t seed = 42;
  int n = 14;
  ModelKind model_kind = ModelKind::Scaling;
  Metric metric = Metric::Riemannian;
  bool deterministic = false;
  int threads = 1;
  double grad_clip = 5.0;

  void validate() const;  // throws UsageError on non-positive fields
};

struct AdamWState {
  std::vector<double> m, v;
  int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamWState(size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

// Decoupled weight decay: p <- p - lr * mhat/(sqrt(vhat)+eps) - lr * wd * p.
void adamw_step(std::vector<double>& params, const std::vector<double>& grads, AdamWState& state,
                double lr, double weight_decay);

// Everything needed to restart training exactly where it stopped, plus the
// shape metadata a loader must verify. Serialized as a little-endian u64
// header length, a UTF-8 JSON header, then raw little-endian f64 blocks in
// the order declared by the header.
struct Checkpoint {
  int format_version = 1;
  int n = 0;
  int entities = 0;
  int relations = 0;  // after inverse augmentation
  ModelKind kind = ModelKind::Scaling;
  Metric metric = Metric::Riemannian;
  std::string pair_order;
  int epoch = 0;
  double best_dev_mrr = -1.0;
  double lr = 0.0;
  int plateau_bad = 0;
  int stop_bad = 0;
  int64_t adam_step = 0;
  std::string rng_state;
  std::vector<double> params, adam_m, adam_v;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Builds a model from checkpoint shapes/params; throws DimensionError when
// the checkpoint does not match the dataset vocabulary sizes.
KgModel model_from_checkpoint(const Checkpoint& ck, const KgDataset& ds);

struct HistoryRow {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  // Negative when the epoch had no dev evaluation.
  double dev_mrr = -1.0, dev_h1 = -1.0, dev_h3 = -1.0, dev_h10 = -1.0;
};

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);

struct RelStat {
  double mrr_sum = 0.0;
  int64_t count = 0;
};

struct RankReport {
  double mrr = 0.0;
  double hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
  int64_t evaluated = 0;
  std::map<int, RelStat> per_relation;

  std::string to_text(const KgDataset& ds) const;
  std::string to_json(const KgDataset& ds) const;
};

enum class Split { Train, Valid, Test };
Split split_from_name(const std::string& name);

// Filtered ranking: every entity is scored as tail, known-true tails other
// than the target are dropped to -inf, and the target's rank is the mean
// rank of its tied block. Valid/test triples are evaluated in both
// directions, head prediction through the inverse relation; the train split
// already holds materialized inverses and is scored as stored.
RankReport evaluate_filtered(const KgModel& model, const KgDataset& ds, Split split,
                             int threads = 1);

// Ranks the target against m candidates drawn uniformly (without
// replacement) from the entities absent in the filter set of (head, rel).
// Tail direction only.
RankReport evaluate_sampled(const KgModel& model, const KgDataset& ds, Split split, int m,
                            Rng& rng, int threads = 1);

struct TrainResult {
  Checkpoint best;
  Checkpoint last;
  std::vector<HistoryRow> history;
};

// Runs the full loop: burn-in at lr/burn_in_factor, dev evaluation every
// eval_interval epochs, lr halved after plateau_patience epochs without
// improvement, early stop after early_stop_patience. Writes best.ckpt,
// last.ckpt and history.csv into out_dir. resume_path restarts from a
// last.ckpt written by a previous run.
TrainResult train(const TrainConfig& config, const KgDataset& ds, const std::string& out_dir,
                  const std::string& resume_path = {});

}  // namespace spdgyro

#include "spdgyro/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace spdgyro {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw UsageError(std::string("config: ") + name + " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(lr, "lr");
  positive(burn_in_factor, "burn_in_factor");
  positive(plateau_patience, "plateau_patience");
  positive(plateau_factor, "plateau_factor");
  positive(early_stop_patience, "early_stop_patience");
  positive(eval_interval, "eval_interval");
  positive(n, "n");
  positive(threads, "threads");
  positive(grad_clip, "grad_clip");
  if (epochs < 0) throw UsageError("config: epochs must be >= 0");
  if (negatives < 0) throw UsageError("config: negatives must be >= 0");
  if (weight_decay < 0) throw UsageError("config: weight_decay must be >= 0");
  if (burn_in_epochs < 0) throw UsageError("config: burn_in_epochs must be >= 0");
}

void adamw_step(std::vector<double>& params, const std::vector<double>& grads, AdamWState& state,
                double lr, double weight_decay) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw DimensionError("adamw_step: buffer size mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps) + lr * weight_decay * params[i];
  }
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void put_u64le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_u64le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f64_block(std::string& out, const std::vector<double>& block) {
  for (double d : block) put_u64le(out, std::bit_cast<uint64_t>(d));
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json header;
  header["format_version"] = ck.format_version;
  header["n"] = ck.n;
  header["entities"] = ck.entities;
  header["relations"] = ck.relations;
  header["model"] = model_kind_name(ck.kind);
  header["metric"] = metric_name(ck.metric);
  header["pair_order"] = ck.pair_order;
  header["epoch"] = ck.epoch;
  header["best_dev_mrr"] = ck.best_dev_mrr;
  header["lr"] = ck.lr;
  header["plateau_bad"] = ck.plateau_bad;
  header["stop_bad"] = ck.stop_bad;
  header["adam_step"] = ck.adam_step;
  header["rng_state"] = ck.rng_state;
  header["blocks"] = json::array({json{{"name", "params"}, {"len", ck.params.size()}},
                                  json{{"name", "adam_m"}, {"len", ck.adam_m.size()}},
                                  json{{"name", "adam_v"}, {"len", ck.adam_v.size()}}});
  const std::string head = header.dump();

  std::string out;
  out.reserve(16 + head.size() + 8 * (ck.params.size() + ck.adam_m.size() + ck.adam_v.size()));
  put_u64le(out, head.size());
  out += head;
  put_f64_block(out, ck.params);
  put_f64_block(out, ck.adam_m);
  put_f64_block(out, ck.adam_v);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  f.flush();
  if (!f) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (raw.size() < 8) throw ParseError("checkpoint too short: " + path);
  const uint64_t hlen = get_u64le(reinterpret_cast<const unsigned char*>(raw.data()));
  if (hlen > raw.size() - 8 || hlen > (1u << 24)) {
    throw ParseError("checkpoint header length corrupt: " + path);
  }

  json header;
  try {
    header = json::parse(raw.substr(8, hlen));
  } catch (const json::exception& e) {
    throw ParseError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }

  Checkpoint ck;
  try {
    ck.format_version = header.at("format_version").get<int>();
    if (ck.format_version != 1) {
      throw ParseError("unsupported checkpoint format version " +
                       std::to_string(ck.format_version));
    }
    ck.n = header.at("n").get<int>();
    ck.entities = header.at("entities").get<int>();
    ck.relations = header.at("relations").get<int>();
    ck.kind = model_kind_from_name(header.at("model").get<std::string>());
    ck.metric = metric_from_name(header.at("metric").get<std::string>());
    ck.pair_order = header.at("pair_order").get<std::string>();
    ck.epoch = header.at("epoch").get<int>();
    ck.best_dev_mrr = header.at("best_dev_mrr").get<double>();
    ck.lr = header.at("lr").get<double>();
    ck.plateau_bad = header.at("plateau_bad").get<int>();
    ck.stop_bad = header.at("stop_bad").get<int>();
    ck.adam_step = header.at("adam_step").get<int64_t>();
    ck.rng_state = header.at("rng_state").get<std::string>();

    size_t off = 8 + hlen;
    for (const auto& blk : header.at("blocks")) {
      const std::string name = blk.at("name").get<std::string>();
      const size_t len = blk.at("len").get<size_t>();
      if (off + 8 * len > raw.size()) throw ParseError("checkpoint payload truncated: " + path);
      std::vector<double>* dst = nullptr;
      if (name == "params") dst = &ck.params;
      else if (name == "adam_m") dst = &ck.adam_m;
      else if (name == "adam_v") dst = &ck.adam_v;
      else throw ParseError("unknown checkpoint block: " + name);
      dst->resize(len);
      for (size_t i = 0; i < len; ++i) {
        (*dst)[i] = std::bit_cast<double>(
            get_u64le(reinterpret_cast<const unsigned char*>(raw.data()) + off + 8 * i));
      }
      off += 8 * len;
    }
    if (off != raw.size()) throw ParseError("checkpoint has trailing bytes: " + path);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint header missing field: " + std::string(e.what()));
  }
  return ck;
}

KgModel model_from_checkpoint(const Checkpoint& ck, const KgDataset& ds) {
  if (ck.entities != ds.num_entities() || ck.relations != ds.num_relations()) {
    std::ostringstream os;
    os << "checkpoint vocabulary (" << ck.entities << " entities, " << ck.relations
       << " relations) does not match dataset (" << ds.num_entities() << ", "
       << ds.num_relations() << ")";
    throw DimensionError(os.str());
  }
  KgModel m = KgModel::shaped(ck.kind, ck.metric, ck.n, ck.entities, ck.relations);
  if (ck.params.size() != m.param_count()) {
    throw DimensionError("checkpoint parameter block does not match declared shapes");
  }
  m.params = ck.params;
  return m;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open history file for writing: " + path);
  f << "epoch,lr,loss,dev_mrr,dev_h1,dev_h3,dev_h10\n";
  for (const HistoryRow& r : rows) {
    f << r.epoch << ',' << fmt17(r.lr) << ',' << fmt17(r.loss) << ',';
    if (r.dev_mrr >= 0.0) {
      f << fmt17(r.dev_mrr) << ',' << fmt17(r.dev_h1) << ',' << fmt17(r.dev_h3) << ','
        << fmt17(r.dev_h10);
    } else {
      f << ",,,";
    }
    f << '\n';
  }
  if (!f) throw IoError("history write failed: " + path);
}

std::string RankReport::to_text(const KgDataset& ds) const {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "evaluated %lld rankings\n",
                static_cast<long long>(evaluated));
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "  MRR     %7.4f\n  Hits@1  %7.4f\n  Hits@3  %7.4f\n  Hits@10 %7.4f\n", mrr,
                hits1, hits3, hits10);
  os << buf;
  if (!per_relation.empty()) {
    os << "per-relation MRR:\n";
    size_t width = 0;
    for (const auto& [rel, stat] : per_relation) {
      width = std::max(width, ds.relations.names[static_cast<size_t>(rel)].size());
    }
    for (const auto& [rel, stat] : per_relation) {
      const std::string& name = ds.relations.names[static_cast<size_t>(rel)];
      std::snprintf(buf, sizeof(buf), "  %-*s %7.4f  (%lld)\n", static_cast<int>(width),
                    name.c_str(), stat.mrr_sum / static_cast<double>(stat.count),
                    static_cast<long long>(stat.count));
      os << buf;
    }
  }
  return os.str();
}

std::string RankReport::to_json(const KgDataset& ds) const {
  json j;
  j["mrr"] = mrr;
  j["hits1"] = hits1;
  j["hits3"] = hits3;
  j["hits10"] = hits10;
  j["evaluated"] = evaluated;
  json rels = json::object();
  for (const auto& [rel, stat] : per_relation) {
    rels[ds.relations.names[static_cast<size_t>(rel)]] = {
        {"mrr", stat.mrr_sum / static_cast<double>(stat.count)}, {"count", stat.count}};
  }
  j["per_relation"] = rels;
  return j.dump(2);
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "valid") return Split::Valid;
  if (name == "test") return Split::Test;
  throw UsageError("unknown split: " + name + " (expected train|valid|test)");
}

namespace {

const std::vector<Triple>& split_triples(const KgDataset& ds, Split split) {
  switch (split) {
    case Split::Train: return ds.train;
    case Split::Valid: return ds.valid;
    case Split::Test: return ds.test;
  }
  throw UsageError("bad split");
}

struct EvalQuery {
  int head, rel, target;
};

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min<int>(threads, static_cast<int>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (size_t i = static_cast<size_t>(w); i < count; i += static_cast<size_t>(workers)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<SpdPoint> embed_all_entities(const KgModel& model, int threads) {
  std::vector<SpdPoint> pts(static_cast<size_t>(model.entities), SpdPoint::identity(model.n));
  parallel_for(pts.size(), threads,
               [&](size_t e) { pts[e] = embed_entity(model, static_cast<int>(e)); });
  return pts;
}

// Mean rank of the tied block: #better + (#tied + 1)/2, the target counted
// in the tied block.
double rank_from_counts(int64_t greater, int64_t equal) {
  return static_cast<double>(greater) + (static_cast<double>(equal) + 1.0) / 2.0;
}

RankReport aggregate(const std::vector<double>& ranks, const std::vector<int>& rels) {
  RankReport rep;
  rep.evaluated = static_cast<int64_t>(ranks.size());
  for (size_t i = 0; i < ranks.size(); ++i) {
    const double r = ranks[i];
    const double inv = 1.0 / r;
    rep.mrr += inv;
    rep.hits1 += (r <= 1.0) ? 1.0 : 0.0;
    rep.hits3 += (r <= 3.0) ? 1.0 : 0.0;
    rep.hits10 += (r <= 10.0) ? 1.0 : 0.0;
    RelStat& stat = rep.per_relation[rels[i]];
    stat.mrr_sum += inv;
    stat.count += 1;
  }
  const double denom = std::max<double>(1.0, static_cast<double>(rep.evaluated));
  rep.mrr /= denom;
  rep.hits1 /= denom;
  rep.hits3 /= denom;
  rep.hits10 /= denom;
  return rep;
}

}  // namespace

RankReport evaluate_filtered(const KgModel& model, const KgDataset& ds, Split split,
                             int threads) {
  if (!ds.augmented || ds.filter.empty()) {
    throw UsageError("evaluate_filtered: dataset must be augmented with a filter index");
  }
  const std::vector<Triple>& triples = split_triples(ds, split);
  if (triples.empty()) throw UsageError("evaluate_filtered: empty split");

  std::vector<EvalQuery> queries;
  queries.reserve(triples.size() * 2);
  for (const Triple& t : triples) {
    queries.push_back({t.head, t.rel, t.tail});
    // Head prediction through the inverse relation; the train split already
    // contains materialized inverses.
    if (split != Split::Train) queries.push_back({t.tail, ds.inverse_rel(t.rel), t.head});
  }

  const std::vector<SpdPoint> entity_points = embed_all_entities(model, threads);
  std::vector<double> ranks(queries.size(), 0.0);
  std::vector<int> rels(queries.size(), 0);

  parallel_for(queries.size(), threads, [&](size_t qi) {
    const EvalQuery& q = queries[qi];
    const SpdPoint y = query_point(model, q.head, q.rel);
    const double bh = model.bias(q.head);
    const auto& filtered = ds.true_tails(q.head, q.rel);
    const double target_score =
        score_tail(model, y, entity_points[static_cast<size_t>(q.target)], bh, q.target);
    int64_t greater = 0, equal = 1;  // the target ties with itself
    for (int e = 0; e < model.entities; ++e) {
      if (e == q.target) continue;
      if (std::binary_search(filtered.begin(), filtered.end(), e)) continue;
      const double s = score_tail(model, y, entity_points[static_cast<size_t>(e)], bh, e);
      if (s > target_score) ++greater;
      else if (s == target_score) ++equal;
    }
    ranks[qi] = rank_from_counts(greater, equal);
    rels[qi] = q.rel;
  });

  return aggregate(ranks, rels);
}

RankReport evaluate_sampled(const KgModel& model, const KgDataset& ds, Split split, int m,
                            Rng& rng, int threads) {
  if (!ds.augmented || ds.filter.empty()) {
    throw UsageError("evaluate_sampled: dataset must be augmented with a filter index");
  }
  if (m < 0) throw UsageError("evaluate_sampled: m must be >= 0");
  const std::vector<Triple>& triples = split_triples(ds, split);
  if (triples.empty()) throw UsageError("evaluate_sampled: empty split");

  // Candidates are drawn sequentially so the report depends only on the rng
  // seed, not the thread count.
  std::vector<std::vector<int>> candidates(triples.size());
  std::vector<int> pool;
  for (size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    const auto& filtered = ds.true_tails(t.head, t.rel);
    pool.clear();
    for (int e = 0; e < model.entities; ++e) {
      if (!std::binary_search(filtered.begin(), filtered.end(), e)) pool.push_back(e);
    }
    if (static_cast<int>(pool.size()) <= m) {
      candidates[i] = pool;
    } else {
      // Partial Fisher-Yates for m distinct draws.
      for (int j = 0; j < m; ++j) {
        const size_t pick = static_cast<size_t>(j) +
                            static_cast<size_t>(rng.uniform_int(pool.size() - static_cast<size_t>(j)));
        std::swap(pool[static_cast<size_t>(j)], pool[pick]);
      }
      candidates[i].assign(pool.begin(), pool.begin() + m);
    }
  }

  const std::vector<SpdPoint> entity_points = embed_all_entities(model, threads);
  std::vector<double> ranks(triples.size(), 0.0);
  std::vector<int> rels(triples.size(), 0);

  parallel_for(triples.size(), threads, [&](size_t i) {
    const Triple& t = triples[i];
    const SpdPoint y = query_point(model, t.head, t.rel);
    const double bh = model.bias(t.head);
    const double target_score =
        score_tail(model, y, entity_points[static_cast<size_t>(t.tail)], bh, t.tail);
    int64_t greater = 0, equal = 1;
    for (int e : candidates[i]) {
      const double s = score_tail(model, y, entity_points[static_cast<size_t>(e)], bh, e);
      if (s > target_score) ++greater;
      else if (s == target_score) ++equal;
    }
    ranks[i] = rank_from_counts(greater, equal);
    rels[i] = t.rel;
  });

  return aggregate(ranks, rels);
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

double global_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TrainResult train(const TrainConfig& config, const KgDataset& ds, const std::string& out_dir,
                  const std::string& resume_path) {
  config.validate();
  if (!ds.augmented || ds.filter.empty()) {
    throw UsageError("train: dataset must be augmented with a filter index");
  }
  if (ds.train.empty()) throw UsageError("train: empty train split");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  const int threads = config.deterministic ? 1 : config.threads;
  const int plateau_evals = ceil_div(config.plateau_patience, config.eval_interval);
  const int stop_evals = ceil_div(config.early_stop_patience, config.eval_interval);

  KgModel model;
  AdamWState adam;
  Rng rng(config.seed);
  double base_lr = config.lr;
  double best_mrr = -1.0;
  int start_epoch = 0;
  int plateau_bad = 0, stop_bad = 0;

  if (!resume_path.empty()) {
    Checkpoint ck = load_checkpoint(resume_path);
    model = model_from_checkpoint(ck, ds);
    if (model.kind != config.model_kind || model.metric != config.metric || model.n != config.n) {
      throw UsageError("resume checkpoint disagrees with configured model/metric/n");
    }
    adam = AdamWState(model.params.size());
    if (ck.adam_m.size() != adam.m.size() || ck.adam_v.size() != adam.v.size()) {
      throw DimensionError("resume checkpoint optimizer state has wrong shape");
    }
    adam.m = ck.adam_m;
    adam.v = ck.adam_v;
    adam.step = ck.adam_step;
    rng = Rng::deserialize(ck.rng_state);
    base_lr = ck.lr;
    best_mrr = ck.best_dev_mrr;
    start_epoch = ck.epoch;
    plateau_bad = ck.plateau_bad;
    stop_bad = ck.stop_bad;
  } else {
    model = KgModel::init(config.model_kind, config.metric, config.n, ds.num_entities(),
                          ds.num_relations(), rng);
    adam = AdamWState(model.params.size());
  }

  auto snapshot = [&](int epoch) {
    Checkpoint ck;
    ck.n = model.n;
    ck.entities = model.entities;
    ck.relations = model.relations;
    ck.kind = model.kind;
    ck.metric = model.metric;
    ck.pair_order = pair_order_convention();
    ck.epoch = epoch;
    ck.best_dev_mrr = best_mrr;
    ck.lr = base_lr;
    ck.plateau_bad = plateau_bad;
    ck.stop_bad = stop_bad;
    ck.adam_step = adam.step;
    ck.rng_state = rng.serialize();
    ck.params = model.params;
    ck.adam_m = adam.m;
    ck.adam_v = adam.v;
    return ck;
  };

  TrainResult result;
  bool have_best = false;
  const std::string best_path = (fs::path(out_dir) / "best.ckpt").string();
  const std::string last_path = (fs::path(out_dir) / "last.ckpt").string();
  const std::string history_path = (fs::path(out_dir) / "history.csv").string();

  std::vector<size_t> order(ds.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.params.size(), 0.0);
  Tape tape;
  const int num_entities = ds.num_entities();

  int epoch = start_epoch;
  bool stopped_early = false;
  while (epoch < config.epochs && !stopped_early) {
    ++epoch;
    const double eff_lr =
        epoch <= config.burn_in_epochs ? base_lr / config.burn_in_factor : base_lr;

    // Fisher-Yates from the identity permutation: the epoch's batch order is
    // then a function of the rng state alone, which is what makes resuming
    // from a checkpoint reproduce an uninterrupted run.
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform_int(i));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    const size_t total = order.size();
    int batch_index = 0;
    for (size_t begin = 0; begin < total; begin += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(total, begin + static_cast<size_t>(config.batch_size));
      const double batch_count = static_cast<double>(end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;

      for (size_t i = begin; i < end; ++i) {
        const Triple& pos = ds.train[order[i]];
        try {
          ScoreRecording rec = record_score(model, pos, tape);
          const double phi = rec.phi();
          batch_loss += softplus(-phi);
          rec.accumulate_grad(-sigmoid(-phi) / batch_count, grad);
          for (int k = 0; k < config.negatives; ++k) {
            const Triple neg{pos.head, pos.rel,
                             static_cast<int>(rng.uniform_int(static_cast<uint64_t>(num_entities)))};
            ScoreRecording nrec = record_score(model, neg, tape);
            const double nphi = nrec.phi();
            batch_loss += softplus(nphi);
            nrec.accumulate_grad(sigmoid(nphi) / batch_count, grad);
          }
        } catch (const Error& e) {
          std::ostringstream os;
          os << e.what() << " [epoch " << epoch << ", batch " << batch_index << ", triple ("
             << pos.head << "," << pos.rel << "," << pos.tail << ")]";
          throw NumericalError(os.str());
        }
      }

      if (!std::isfinite(batch_loss)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch << ", batch " << batch_index;
        throw NumericalError(os.str());
      }

      const double gnorm = global_norm(grad);
      if (gnorm > config.grad_clip) {
        const double scale = config.grad_clip / gnorm;
        for (double& g : grad) g *= scale;
      }
      adamw_step(model.params, grad, adam, eff_lr, config.weight_decay);
      loss_sum += batch_loss;
      ++batch_index;
    }

    HistoryRow row;
    row.epoch = epoch;
    row.lr = eff_lr;
    row.loss = loss_sum / static_cast<double>(total);

    bool evaluated = false;
    if (epoch % config.eval_interval == 0 || epoch == config.epochs) {
      evaluated = true;
      const RankReport rep = evaluate_filtered(model, ds, Split::Valid, threads);
      row.dev_mrr = rep.mrr;
      row.dev_h1 = rep.hits1;
      row.dev_h3 = rep.hits3;
      row.dev_h10 = rep.hits10;
      if (rep.mrr > best_mrr) {
        best_mrr = rep.mrr;
        plateau_bad = 0;
        stop_bad = 0;
        result.best = snapshot(epoch);
        save_checkpoint(best_path, result.best);
        have_best = true;
      } else {
        ++plateau_bad;
        ++stop_bad;
        if (plateau_bad >= plateau_evals) {
          base_lr /= config.plateau_factor;
          plateau_bad = 0;
        }
        if (stop_bad >= stop_evals) stopped_early = true;
      }
    }
    result.history.push_back(row);
    if (evaluated) {
      write_history_csv(history_path, result.history);  // keep partial history on disk
    }
  }

  result.last = snapshot(epoch);
  save_checkpoint(last_path, result.last);
  if (!have_best) {
    result.best = result.last;
    save_checkpoint(best_path, result.best);
  }
  write_history_csv(history_path, result.history);
  return result;
}

}  // namespace spdgyro

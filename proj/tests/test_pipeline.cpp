#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdgyro/pipeline.hpp"
#include "test_util.hpp"

using namespace spdgyro;
using namespace spdgyro::testutil;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("pipeline");

namespace {

fs::path make_temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("spdgyro_pipetest_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

KgDataset toy_dataset() {
  KgDataset ds = load_dataset(std::string(SPDGYRO_SOURCE_DIR) + "/data/toy");
  augment_inverse(ds);
  build_filter_index(ds);
  return ds;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p);
  f << content;
}

// Five entities, two relations; small enough to rank by hand.
KgDataset five_entity_dataset() {
  const fs::path dir = make_temp_dir();
  write_file(dir / "train.txt", "a\tr1\tb\nb\tr1\tc\nc\tr1\td\nd\tr1\te\na\tr2\tc\nb\tr2\td\n");
  write_file(dir / "valid.txt", "c\tr2\te\n");
  write_file(dir / "test.txt", "e\tr1\ta\nd\tr2\ta\n");
  KgDataset ds = load_dataset(dir.string());
  augment_inverse(ds);
  build_filter_index(ds);
  return ds;
}

// Mean-tie filtered ranking computed directly from score(), one entity at a
// time; the production evaluator caches query points and entity embeddings,
// so this is an independent route to the same numbers.
RankReport brute_force_filtered(const KgModel& model, const KgDataset& ds,
                                const std::vector<Triple>& triples, bool both_directions) {
  std::vector<double> ranks;
  std::vector<int> rels;
  auto rank_query = [&](int h, int r, int target) {
    const double st = score(model, {h, r, target});
    const auto& filtered = ds.true_tails(h, r);
    int64_t greater = 0, equal = 1;
    for (int e = 0; e < model.entities; ++e) {
      if (e == target) continue;
      bool is_filtered = false;
      for (int f : filtered) {
        if (f == e) is_filtered = true;
      }
      if (is_filtered) continue;
      const double s = score(model, {h, r, e});
      if (s > st) ++greater;
      else if (s == st) ++equal;
    }
    ranks.push_back(static_cast<double>(greater) + (static_cast<double>(equal) + 1.0) / 2.0);
    rels.push_back(r);
  };
  for (const Triple& t : triples) {
    rank_query(t.head, t.rel, t.tail);
    if (both_directions) rank_query(t.tail, ds.inverse_rel(t.rel), t.head);
  }
  RankReport rep;
  rep.evaluated = static_cast<int64_t>(ranks.size());
  for (size_t i = 0; i < ranks.size(); ++i) {
    rep.mrr += 1.0 / ranks[i];
    rep.hits1 += ranks[i] <= 1.0 ? 1.0 : 0.0;
    rep.hits3 += ranks[i] <= 3.0 ? 1.0 : 0.0;
    rep.hits10 += ranks[i] <= 10.0 ? 1.0 : 0.0;
    rep.per_relation[rels[i]].mrr_sum += 1.0 / ranks[i];
    rep.per_relation[rels[i]].count += 1;
  }
  rep.mrr /= static_cast<double>(rep.evaluated);
  rep.hits1 /= static_cast<double>(rep.evaluated);
  rep.hits3 /= static_cast<double>(rep.evaluated);
  rep.hits10 /= static_cast<double>(rep.evaluated);
  return rep;
}

}  // namespace

TEST_CASE("TrainConfig defaults match the documented protocol") {
  const TrainConfig cfg;
  CHECK(cfg.epochs == 5000);
  CHECK(cfg.batch_size == 4096);
  CHECK(cfg.negatives == 10);
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.weight_decay == 1e-2);
  CHECK(cfg.burn_in_epochs == 10);
  CHECK(cfg.burn_in_factor == 10.0);
  CHECK(cfg.plateau_patience == 50);
  CHECK(cfg.plateau_factor == 2.0);
  CHECK(cfg.early_stop_patience == 500);
  CHECK(cfg.eval_interval == 20);
  CHECK_NOTHROW(cfg.validate());

  TrainConfig bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("adamw_step") {
  SUBCASE("zero gradient and zero decay leave parameters unchanged") {
    std::vector<double> p = {1.5, -2.0};
    AdamWState st(2);
    adamw_step(p, {0.0, 0.0}, st, 0.1, 0.0);
    CHECK(p[0] == 1.5);
    CHECK(p[1] == -2.0);
  }
  SUBCASE("single scalar step matches an independent evaluation") {
    std::vector<double> p = {1.0};
    AdamWState st(1);
    adamw_step(p, {1.0}, st, 0.1, 0.0);
    // m = 0.1, v = 1e-3, mhat = 1, vhat = 1: step = 0.1 / (1 + 1e-8)
    const double expect = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
    CHECK(p[0] == doctest::Approx(expect).epsilon(1e-15));
    CHECK(p[0] > 0.899);
    CHECK(p[0] < 0.901);
  }
  SUBCASE("decoupled decay shrinks parameters by exactly (1 - lr wd)") {
    std::vector<double> p = {2.0};
    AdamWState st(1);
    adamw_step(p, {0.0}, st, 0.5, 0.01);
    CHECK(p[0] == doctest::Approx(2.0 * (1.0 - 0.5 * 0.01)).epsilon(1e-15));
  }
}

TEST_CASE("checkpoint roundtrip is byte-exact") {
  const fs::path dir = make_temp_dir();
  Checkpoint ck;
  ck.n = 3;
  ck.entities = 5;
  ck.relations = 4;
  ck.kind = ModelKind::Rotation;
  ck.metric = Metric::F1;
  ck.pair_order = pair_order_convention();
  ck.epoch = 17;
  ck.best_dev_mrr = 0.4375;
  ck.lr = 5e-4;
  ck.adam_step = 123;
  ck.rng_state = Rng(9).serialize();
  Rng rng(1);
  for (int i = 0; i < 50; ++i) ck.params.push_back(rng.normal());
  ck.adam_m.assign(50, 0.25);
  ck.adam_v.assign(50, 0.5);

  const fs::path p1 = dir / "a.ckpt";
  const fs::path p2 = dir / "b.ckpt";
  save_checkpoint(p1.string(), ck);
  const Checkpoint loaded = load_checkpoint(p1.string());
  save_checkpoint(p2.string(), loaded);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(loaded.params == ck.params);
  CHECK(loaded.epoch == 17);
  CHECK(loaded.rng_state == ck.rng_state);
}

TEST_CASE("checkpoint loading rejects corruption and shape mismatches") {
  const fs::path dir = make_temp_dir();
  const fs::path p = dir / "c.ckpt";

  write_file(p, "garbage");
  CHECK_THROWS_AS(load_checkpoint(p.string()), ParseError);

  SUBCASE("unsupported format version") {
    Checkpoint ck;
    ck.n = 2;
    ck.entities = 1;
    ck.relations = 1;
    ck.rng_state = Rng(0).serialize();
    save_checkpoint(p.string(), ck);
    // Flip the version byte inside the JSON header.
    std::string raw = slurp(p);
    const size_t pos = raw.find("\"format_version\":1");
    REQUIRE(pos != std::string::npos);
    raw[pos + 17] = '9';
    std::ofstream(p, std::ios::binary | std::ios::trunc) << raw;
    CHECK_THROWS_AS(load_checkpoint(p.string()), ParseError);
  }

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), IoError);

  KgDataset ds = five_entity_dataset();
  Rng rng(2);
  KgModel m = KgModel::init(ModelKind::Scaling, Metric::Riemannian, 3, ds.num_entities(),
                            ds.num_relations(), rng);
  Checkpoint ck;
  ck.n = m.n;
  ck.entities = m.entities + 1;  // wrong vocabulary
  ck.relations = m.relations;
  ck.kind = m.kind;
  ck.metric = m.metric;
  ck.pair_order = pair_order_convention();
  ck.rng_state = rng.serialize();
  ck.params = m.params;
  ck.adam_m.assign(m.params.size(), 0.0);
  ck.adam_v.assign(m.params.size(), 0.0);
  save_checkpoint(p.string(), ck);
  CHECK_THROWS_AS(model_from_checkpoint(load_checkpoint(p.string()), ds), DimensionError);
}

TEST_CASE("filtered evaluation matches the brute-force oracle exactly") {
  KgDataset ds = five_entity_dataset();
  Rng rng(3);
  const KgModel model = KgModel::init(ModelKind::Scaling, Metric::Riemannian, 3,
                                      ds.num_entities(), ds.num_relations(), rng);

  for (Split split : {Split::Valid, Split::Test}) {
    const auto& triples = split == Split::Valid ? ds.valid : ds.test;
    const RankReport got = evaluate_filtered(model, ds, split);
    const RankReport expect = brute_force_filtered(model, ds, triples, true);
    CHECK(got.evaluated == expect.evaluated);
    CHECK(got.mrr == expect.mrr);
    CHECK(got.hits1 == expect.hits1);
    CHECK(got.hits3 == expect.hits3);
    CHECK(got.hits10 == expect.hits10);
  }
}

TEST_CASE("the mean-tie rule spreads an all-equal model") {
  KgDataset ds = five_entity_dataset();
  // Zero parameters score every candidate identically.
  const KgModel model = KgModel::shaped(ModelKind::Scaling, Metric::Riemannian, 3,
                                        ds.num_entities(), ds.num_relations());
  const RankReport rep = evaluate_filtered(model, ds, Split::Test);
  const RankReport expect = brute_force_filtered(model, ds, ds.test, true);
  CHECK(rep.mrr == expect.mrr);
  // With C tied candidates the rank is (C + 1) / 2, never 1.
  CHECK(rep.hits1 == 0.0);
  CHECK(rep.mrr < 1.0);
  CHECK(rep.mrr > 0.0);
}

TEST_CASE("a uniquely top-scored target contributes rank one") {
  KgDataset ds = five_entity_dataset();
  KgModel model = KgModel::shaped(ModelKind::Scaling, Metric::Riemannian, 3, ds.num_entities(),
                                  ds.num_relations());
  // Huge bias on entity a, the tail target of (e, r1, a); everything else
  // ties below it.
  model.params[model.bias_offset(0)] = 100.0;
  const RankReport rep = evaluate_filtered(model, ds, Split::Test);
  CHECK(rep.hits1 > 0.0);
}

TEST_CASE("filtered evaluation is thread-count independent") {
  KgDataset ds = toy_dataset();
  Rng rng(4);
  const KgModel model = KgModel::init(ModelKind::Scaling, Metric::Riemannian, 4,
                                      ds.num_entities(), ds.num_relations(), rng);
  const RankReport one = evaluate_filtered(model, ds, Split::Valid, 1);
  const RankReport four = evaluate_filtered(model, ds, Split::Valid, 4);
  CHECK(one.mrr == four.mrr);
  CHECK(one.hits10 == four.hits10);
  CHECK(one.evaluated == four.evaluated);

  CHECK(one.mrr >= 0.0);
  CHECK(one.mrr <= 1.0);
  CHECK(one.hits1 <= one.hits3);
  CHECK(one.hits3 <= one.hits10);
}

TEST_CASE("evaluate_filtered rejects an empty split") {
  KgDataset ds = five_entity_dataset();
  ds.valid.clear();
  Rng rng(5);
  const KgModel model = KgModel::init(ModelKind::Scaling, Metric::Riemannian, 3,
                                      ds.num_entities(), ds.num_relations(), rng);
  CHECK_THROWS_AS(evaluate_filtered(model, ds, Split::Valid), UsageError);
}

TEST_CASE("sampled evaluation") {
  KgDataset ds = five_entity_dataset();
  Rng rng(6);
  const KgModel model = KgModel::init(ModelKind::Scaling, Metric::Riemannian, 3,
                                      ds.num_entities(), ds.num_relations(), rng);

  SUBCASE("m = 0 ranks against nothing") {
    Rng r(1);
    const RankReport rep = evaluate_sampled(model, ds, Split::Test, 0, r);
    CHECK(rep.mrr == 1.0);
    CHECK(rep.hits1 == 1.0);
  }
  SUBCASE("identical seeds give identical reports") {
    Rng r1(42), r2(42);
    const RankReport a = evaluate_sampled(model, ds, Split::Test, 2, r1);
    const RankReport b = evaluate_sampled(model, ds, Split::Test, 2, r2);
    CHECK(a.mrr == b.mrr);
    CHECK(a.hits10 == b.hits10);
  }
  SUBCASE("m covering the whole pool equals tail-direction filtered ranking") {
    Rng r(7);
    const RankReport sampled = evaluate_sampled(model, ds, Split::Test, 100, r);
    const RankReport expect = brute_force_filtered(model, ds, ds.test, false);
    CHECK(sampled.mrr == expect.mrr);
    CHECK(sampled.hits1 == expect.hits1);
  }
}

TEST_CASE("training smoke run with burn-in and history") {
  KgDataset ds = toy_dataset();
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 64;
  cfg.negatives = 2;
  cfg.lr = 1e-3;
  cfg.n = 3;
  cfg.eval_interval = 6;
  cfg.seed = 11;
  cfg.deterministic = true;
  const fs::path out = make_temp_dir();
  const TrainResult res = train(cfg, ds, out.string());

  REQUIRE(res.history.size() == 12);
  for (int e = 0; e < 12; ++e) {
    CHECK(res.history[static_cast<size_t>(e)].epoch == e + 1);
    const double expect_lr = e < 10 ? cfg.lr / cfg.burn_in_factor : cfg.lr;
    CHECK(res.history[static_cast<size_t>(e)].lr == expect_lr);
    CHECK(std::isfinite(res.history[static_cast<size_t>(e)].loss));
  }
  // Dev metrics only on evaluation epochs (6 and 12).
  CHECK(res.history[5].dev_mrr >= 0.0);
  CHECK(res.history[0].dev_mrr < 0.0);

  CHECK(fs::exists(out / "best.ckpt"));
  CHECK(fs::exists(out / "last.ckpt"));
  CHECK(fs::exists(out / "history.csv"));
  CHECK(res.last.epoch == 12);

  // Best checkpoint carries the max dev MRR seen.
  double best = -1.0;
  for (const HistoryRow& r : res.history) best = std::max(best, r.dev_mrr);
  CHECK(res.best.best_dev_mrr == best);
}

TEST_CASE("zero-epoch training writes the initial checkpoint") {
  KgDataset ds = five_entity_dataset();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.n = 2;
  cfg.seed = 3;
  const fs::path out = make_temp_dir();
  const TrainResult res = train(cfg, ds, out.string());
  CHECK(res.history.empty());
  CHECK(res.last.epoch == 0);
  const Checkpoint ck = load_checkpoint((out / "last.ckpt").string());
  CHECK(ck.epoch == 0);
  CHECK(ck.params.size() ==
        KgModel::shaped(cfg.model_kind, cfg.metric, cfg.n, ds.num_entities(), ds.num_relations())
            .param_count());
}

TEST_CASE("deterministic training is bitwise reproducible") {
  KgDataset ds = toy_dataset();
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 32;
  cfg.negatives = 2;
  cfg.n = 3;
  cfg.eval_interval = 4;
  cfg.seed = 21;
  cfg.deterministic = true;
  const fs::path out1 = make_temp_dir();
  const fs::path out2 = make_temp_dir();
  const TrainResult a = train(cfg, ds, out1.string());
  const TrainResult b = train(cfg, ds, out2.string());

  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].dev_mrr == b.history[i].dev_mrr);
  }
  CHECK(a.last.params == b.last.params);
  CHECK(slurp(out1 / "history.csv") == slurp(out2 / "history.csv"));
  CHECK(slurp(out1 / "best.ckpt") == slurp(out2 / "best.ckpt"));
  CHECK(slurp(out1 / "last.ckpt") == slurp(out2 / "last.ckpt"));
}

TEST_CASE("resuming reproduces the uninterrupted run") {
  KgDataset ds = toy_dataset();
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.negatives = 2;
  cfg.n = 3;
  cfg.eval_interval = 5;
  cfg.seed = 31;
  cfg.deterministic = true;

  const fs::path full_out = make_temp_dir();
  TrainConfig full_cfg = cfg;
  full_cfg.epochs = 10;
  const TrainResult full = train(full_cfg, ds, full_out.string());

  const fs::path part_out = make_temp_dir();
  const TrainResult part = train(cfg, ds, part_out.string());
  const fs::path resumed_out = make_temp_dir();
  const TrainResult resumed =
      train(full_cfg, ds, resumed_out.string(), (part_out / "last.ckpt").string());

  REQUIRE(resumed.history.size() == 5);  // epochs 6..10
  for (size_t i = 0; i < 5; ++i) {
    CHECK(resumed.history[i].epoch == full.history[i + 5].epoch);
    CHECK(resumed.history[i].loss == full.history[i + 5].loss);
  }
  CHECK(resumed.last.params == full.last.params);
  CHECK(part.last.epoch == 5);
}

TEST_CASE("non-finite losses abort with epoch and batch context") {
  KgDataset ds = five_entity_dataset();
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.n = 2;
  cfg.lr = 1e25;  // blows the parameters past exp() range
  cfg.seed = 13;
  cfg.grad_clip = 1e30;
  const fs::path out = make_temp_dir();
  try {
    train(cfg, ds, out.string());
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("history csv formatting") {
  const fs::path dir = make_temp_dir();
  std::vector<HistoryRow> rows(2);
  rows[0] = {1, 0.001, 2.5, -1, -1, -1, -1};
  rows[1] = {2, 0.001, 2.25, 0.5, 0.25, 0.5, 1.0};
  write_history_csv((dir / "h.csv").string(), rows);
  const std::string text = slurp(dir / "h.csv");
  CHECK(text.find("epoch,lr,loss,dev_mrr,dev_h1,dev_h3,dev_h10\n") == 0);
  CHECK(text.find("1,0.001,2.5,,,,\n") != std::string::npos);
  CHECK(text.find("2,0.001,2.25,0.5,0.25,0.5,1\n") != std::string::npos);
}

TEST_SUITE_END();

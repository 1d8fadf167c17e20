#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdgyro/analysis.hpp"
#include "spdgyro/bench.hpp"
#include "spdgyro/cliconfig.hpp"
#include "spdgyro/pipeline.hpp"

namespace {

using namespace spdgyro;

void log_line(const std::string& msg) {
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S", std::localtime(&now));
  std::fprintf(stderr, "[%s] %s\n", stamp, msg.c_str());
}

int threads_from_env() {
  const char* env = std::getenv("SPD_GYRO_THREADS");
  if (env == nullptr) return 1;
  try {
    const int v = std::stoi(env);
    return v > 0 ? v : 1;
  } catch (const std::exception&) {
    throw UsageError("SPD_GYRO_THREADS is not an integer");
  }
}

KgDataset load_and_index(const std::string& data_dir) {
  KgDataset ds = load_dataset(data_dir);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "loaded %d entities, %d relations, %zu/%zu/%zu triples",
                ds.num_entities(), ds.num_relations(), ds.train.size(), ds.valid.size(),
                ds.test.size());
  log_line(buf);
  if (ds.unseen_entities > 0) {
    std::snprintf(buf, sizeof(buf), "%d entities first seen outside the train split",
                  ds.unseen_entities);
    log_line(buf);
  }
  augment_inverse(ds);
  build_filter_index(ds);
  return ds;
}

struct TrainCli {
  std::string config_path, data_dir, out_dir, resume;
  TrainConfig flags;  // values bound to CLI11 options
  CLI::App* cmd = nullptr;
  CLI::Option *o_seed, *o_n, *o_model, *o_metric, *o_epochs, *o_batch, *o_neg, *o_lr, *o_wd,
      *o_burn_e, *o_burn_f, *o_plat_p, *o_plat_f, *o_stop, *o_eval_int, *o_threads, *o_clip,
      *o_det;
  std::string model_name = "scaling";
  std::string metric_name = "riemannian";
};

void setup_train_cmd(CLI::App& app, TrainCli& t) {
  CLI::App* c = app.add_subcommand("train", "Train a KG embedding model");
  t.cmd = c;
  c->add_option("--config", t.config_path, "Config file (key = value lines)");
  c->add_option("--data-dir", t.data_dir, "Directory with train.txt/valid.txt/test.txt")
      ->required();
  c->add_option("--out-dir", t.out_dir, "Output directory for checkpoints and history")
      ->required();
  c->add_option("--resume", t.resume, "Resume from a last.ckpt of a previous run");
  t.o_seed = c->add_option("--seed", t.flags.seed, "RNG seed")->capture_default_str();
  t.o_n = c->add_option("--n", t.flags.n, "Matrix rank n")->capture_default_str();
  t.o_model = c->add_option("--model", t.model_name, "scaling|rotation|reflection")
                  ->capture_default_str();
  t.o_metric = c->add_option("--metric", t.metric_name, "riemannian|f1")->capture_default_str();
  t.o_epochs = c->add_option("--epochs", t.flags.epochs, "Training epochs")->capture_default_str();
  t.o_batch =
      c->add_option("--batch-size", t.flags.batch_size, "Batch size")->capture_default_str();
  t.o_neg = c->add_option("--negatives", t.flags.negatives, "Negative samples per positive")
                ->capture_default_str();
  t.o_lr = c->add_option("--lr", t.flags.lr, "Learning rate")->capture_default_str();
  t.o_wd = c->add_option("--weight-decay", t.flags.weight_decay, "Decoupled weight decay")
               ->capture_default_str();
  t.o_burn_e = c->add_option("--burn-in-epochs", t.flags.burn_in_epochs, "Burn-in epochs")
                   ->capture_default_str();
  t.o_burn_f = c->add_option("--burn-in-factor", t.flags.burn_in_factor, "Burn-in lr divisor")
                   ->capture_default_str();
  t.o_plat_p = c->add_option("--plateau-patience", t.flags.plateau_patience,
                             "Epochs without dev improvement before lr reduction")
                   ->capture_default_str();
  t.o_plat_f = c->add_option("--plateau-factor", t.flags.plateau_factor, "Lr reduction divisor")
                   ->capture_default_str();
  t.o_stop = c->add_option("--early-stop-patience", t.flags.early_stop_patience,
                           "Epochs without dev improvement before stopping")
                 ->capture_default_str();
  t.o_eval_int = c->add_option("--eval-interval", t.flags.eval_interval,
                               "Epochs between dev evaluations")
                     ->capture_default_str();
  t.o_threads = c->add_option("--threads", t.flags.threads,
                              "Worker threads for evaluation (SPD_GYRO_THREADS as fallback)")
                    ->capture_default_str();
  t.o_clip = c->add_option("--grad-clip", t.flags.grad_clip, "Global gradient norm clip")
                 ->capture_default_str();
  t.o_det = c->add_flag("--deterministic", t.flags.deterministic,
                        "Single-threaded reductions, bitwise reproducible runs");
}

int run_train(const TrainCli& t) {
  TrainConfig cfg;
  if (!t.config_path.empty()) apply_config(parse_config_file(t.config_path), cfg);

  // Flags win over config file values.
  if (t.o_seed->count()) cfg.seed = t.flags.seed;
  if (t.o_n->count()) cfg.n = t.flags.n;
  if (t.o_model->count()) cfg.model_kind = model_kind_from_name(t.model_name);
  if (t.o_metric->count()) cfg.metric = metric_from_name(t.metric_name);
  if (t.o_epochs->count()) cfg.epochs = t.flags.epochs;
  if (t.o_batch->count()) cfg.batch_size = t.flags.batch_size;
  if (t.o_neg->count()) cfg.negatives = t.flags.negatives;
  if (t.o_lr->count()) cfg.lr = t.flags.lr;
  if (t.o_wd->count()) cfg.weight_decay = t.flags.weight_decay;
  if (t.o_burn_e->count()) cfg.burn_in_epochs = t.flags.burn_in_epochs;
  if (t.o_burn_f->count()) cfg.burn_in_factor = t.flags.burn_in_factor;
  if (t.o_plat_p->count()) cfg.plateau_patience = t.flags.plateau_patience;
  if (t.o_plat_f->count()) cfg.plateau_factor = t.flags.plateau_factor;
  if (t.o_stop->count()) cfg.early_stop_patience = t.flags.early_stop_patience;
  if (t.o_eval_int->count()) cfg.eval_interval = t.flags.eval_interval;
  if (t.o_clip->count()) cfg.grad_clip = t.flags.grad_clip;
  if (t.o_det->count()) cfg.deterministic = true;
  if (t.o_threads->count()) cfg.threads = t.flags.threads;
  else if (cfg.threads == 1) cfg.threads = threads_from_env();
  cfg.validate();

  KgDataset ds = load_and_index(t.data_dir);
  log_line("training " + std::string(model_kind_name(cfg.model_kind)) + " model, metric " +
           metric_name(cfg.metric) + ", n=" + std::to_string(cfg.n));
  const TrainResult result = train(cfg, ds, t.out_dir, t.resume);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "done: best dev MRR %.4f at epoch %d",
                result.best.best_dev_mrr, result.best.epoch);
  log_line(buf);
  log_line("checkpoints and history written to " + t.out_dir);
  return 0;
}

struct EvalCli {
  std::string checkpoint, data_dir, split = "test", mode = "filtered", json_out = "eval.json";
  int sampled_m = 100;
  int threads = 1;
  uint64_t seed = 42;
  CLI::Option* o_threads = nullptr;
};

void setup_eval_cmd(CLI::App& app, EvalCli& e) {
  CLI::App* c = app.add_subcommand("eval", "Rank test triples and report MRR / Hits@K");
  c->add_option("--checkpoint", e.checkpoint, "Model checkpoint")->required();
  c->add_option("--data-dir", e.data_dir, "Directory with train.txt/valid.txt/test.txt")
      ->required();
  c->add_option("--split", e.split, "train|valid|test")->capture_default_str();
  c->add_option("--mode", e.mode, "filtered|sampled")->capture_default_str();
  c->add_option("--sampled-m", e.sampled_m, "Sampled-mode candidate count")
      ->capture_default_str();
  c->add_option("--json-out", e.json_out, "Report JSON output path")->capture_default_str();
  c->add_option("--seed", e.seed, "Sampled-mode RNG seed")->capture_default_str();
  e.o_threads =
      c->add_option("--threads", e.threads, "Worker threads (SPD_GYRO_THREADS as fallback)")
          ->capture_default_str();
}

int run_eval(const EvalCli& e) {
  const int threads = e.o_threads->count() ? e.threads : threads_from_env();
  KgDataset ds = load_and_index(e.data_dir);
  const Checkpoint ck = load_checkpoint(e.checkpoint);
  const KgModel model = model_from_checkpoint(ck, ds);
  const Split split = split_from_name(e.split);

  RankReport rep;
  if (e.mode == "filtered") {
    rep = evaluate_filtered(model, ds, split, threads);
  } else if (e.mode == "sampled") {
    Rng rng(e.seed);
    rep = evaluate_sampled(model, ds, split, e.sampled_m, rng, threads);
  } else {
    throw UsageError("unknown eval mode: " + e.mode + " (expected filtered|sampled)");
  }

  std::cout << rep.to_text(ds);
  std::ofstream out(e.json_out, std::ios::trunc);
  if (!out) throw IoError("cannot open JSON output: " + e.json_out);
  out << rep.to_json(ds) << '\n';
  log_line("report written to " + e.json_out);
  return 0;
}

struct AnalyzeCli {
  std::string checkpoint, data_dir, out = "analysis.csv";
  int negatives = 1;
  uint64_t seed = 42;
};

void setup_analyze_cmd(CLI::App& app, AnalyzeCli& a) {
  CLI::App* c = app.add_subcommand(
      "analyze", "Export per-triple VVD norm/angle records for visualization");
  c->add_option("--checkpoint", a.checkpoint, "Model checkpoint")->required();
  c->add_option("--data-dir", a.data_dir, "Directory with train.txt/valid.txt/test.txt")
      ->required();
  c->add_option("--out", a.out, "CSV output path")->capture_default_str();
  c->add_option("--negatives-per-positive", a.negatives, "Sampled negatives per train triple")
      ->capture_default_str();
  c->add_option("--seed", a.seed, "Negative-sampling seed")->capture_default_str();
}

int run_analyze(const AnalyzeCli& a) {
  KgDataset ds = load_and_index(a.data_dir);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const KgModel model = model_from_checkpoint(ck, ds);
  export_analysis(model, ds, a.negatives, a.out, a.seed);
  log_line("analysis written to " + a.out);
  return 0;
}

struct CheckGradCli {
  int n = 4;
  std::string model = "scaling";
  std::string metric = "riemannian";
  uint64_t seed = 42;
  double h = 1e-5;
  bool corrupt = false;
};

void setup_check_grad_cmd(CLI::App& app, CheckGradCli& g) {
  CLI::App* c = app.add_subcommand(
      "check-grad", "Compare the score gradient against central finite differences");
  c->add_option("--n", g.n, "Matrix rank n")->capture_default_str();
  c->add_option("--model", g.model, "scaling|rotation|reflection")->capture_default_str();
  c->add_option("--metric", g.metric, "riemannian|f1")->capture_default_str();
  c->add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  c->add_option("--fd-step", g.h, "Finite-difference step")->capture_default_str();
  c->add_flag("--corrupt-adjoint", g.corrupt,
              "Perturb one analytic gradient entry (negative control; must fail)");
}

int run_check_grad(const CheckGradCli& g) {
  Rng rng(g.seed);
  KgModel model =
      KgModel::init(model_kind_from_name(g.model), metric_from_name(g.metric), g.n, 3, 2, rng);
  const Triple triple{0, 1, 2};

  std::vector<double> analytic(model.params.size(), 0.0);
  Tape tape;
  score_with_grad(model, triple, 1.0, analytic, tape);
  if (g.corrupt) analytic[model.params.size() / 2] += 1e-2;

  KgModel probe = model;
  const auto eval = [&probe, &triple](const std::vector<double>& p) {
    probe.params = p;
    return score(probe, triple);
  };
  const double err = grad_check(eval, analytic, model.params, g.h);
  std::printf("max relative gradient error: %.3e (model=%s metric=%s n=%d)\n", err,
              g.model.c_str(), g.metric.c_str(), g.n);
  return err <= 1e-4 ? 0 : 1;
}

struct BenchCli {
  std::string op = "dist";
  std::vector<int> sizes = {8, 16, 32, 64};
  int reps = 9;
  uint64_t seed = 42;
  std::string out = "bench.csv";
};

void setup_bench_cmd(CLI::App& app, BenchCli& b) {
  CLI::App* c = app.add_subcommand("bench", "Micro-benchmark core operations over matrix sizes");
  c->add_option("--op", b.op, "dist|gyro_add|exp|log|matrix_scale")->capture_default_str();
  c->add_option("--sizes", b.sizes, "Comma-separated matrix sizes")
      ->delimiter(',')
      ->capture_default_str();
  c->add_option("--reps", b.reps, "Repetitions per size (median kept)")->capture_default_str();
  c->add_option("--seed", b.seed, "Input RNG seed")->capture_default_str();
  c->add_option("--out", b.out, "CSV output path")->capture_default_str();
}

int run_bench_cmd(const BenchCli& b) {
  const BenchResult res = run_bench(b.op, b.sizes, b.reps, b.seed);
  write_bench_csv(res, b.out);
  for (const BenchRow& r : res.rows) {
    std::fprintf(stderr, "  n=%3d  median %.6fs\n", r.n, r.median_seconds);
  }
  std::printf("op=%s fitted log-log slope: %.3f\n", res.op.c_str(), res.slope);
  log_line("timings written to " + b.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPD manifold geometry, gyrocalculus and KG embedding toolkit"};
  app.require_subcommand(1);

  TrainCli train_cli;
  EvalCli eval_cli;
  AnalyzeCli analyze_cli;
  CheckGradCli grad_cli;
  BenchCli bench_cli;
  setup_train_cmd(app, train_cli);
  setup_eval_cmd(app, eval_cli);
  setup_analyze_cmd(app, analyze_cli);
  setup_check_grad_cmd(app, grad_cli);
  setup_bench_cmd(app, bench_cli);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("train")) return run_train(train_cli);
    if (app.got_subcommand("eval")) return run_eval(eval_cli);
    if (app.got_subcommand("analyze")) return run_analyze(analyze_cli);
    if (app.got_subcommand("check-grad")) return run_check_grad(grad_cli);
    if (app.got_subcommand("bench")) return run_bench_cmd(bench_cli);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 2;
}

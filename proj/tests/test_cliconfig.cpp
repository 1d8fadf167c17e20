#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spdgyro/cliconfig.hpp"

using namespace spdgyro;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cliconfig");

namespace {

fs::path write_config(const std::string& content) {
  static int counter = 0;
  const fs::path p =
      fs::temp_directory_path() / ("spdgyro_cfg_" + std::to_string(counter++) + ".conf");
  std::ofstream f(p);
  f << content;
  return p;
}

}  // namespace

TEST_CASE("parses key = value lines with comments") {
  const fs::path p = write_config(
      "# training setup\n"
      "epochs = 100\n"
      "\n"
      "lr = 5e-4   # tuned\n"
      "model = rotation\n"
      "deterministic = true\n");
  TrainConfig cfg;
  apply_config(parse_config_file(p.string()), cfg);
  CHECK(cfg.epochs == 100);
  CHECK(cfg.lr == 5e-4);
  CHECK(cfg.model_kind == ModelKind::Rotation);
  CHECK(cfg.deterministic);
  CHECK(cfg.batch_size == 4096);  // untouched default
}

TEST_CASE("every TrainConfig field is reachable") {
  const fs::path p = write_config(
      "epochs = 7\nbatch_size = 8\nnegatives = 3\nlr = 0.25\nweight_decay = 0.125\n"
      "burn_in_epochs = 2\nburn_in_factor = 4\nplateau_patience = 9\nplateau_factor = 3\n"
      "early_stop_patience = 11\neval_interval = 5\nseed = 77\nn = 6\nmodel = reflection\n"
      "metric = f1\ndeterministic = yes\nthreads = 2\ngrad_clip = 1.5\n");
  TrainConfig cfg;
  apply_config(parse_config_file(p.string()), cfg);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.batch_size == 8);
  CHECK(cfg.negatives == 3);
  CHECK(cfg.lr == 0.25);
  CHECK(cfg.weight_decay == 0.125);
  CHECK(cfg.burn_in_epochs == 2);
  CHECK(cfg.burn_in_factor == 4.0);
  CHECK(cfg.plateau_patience == 9);
  CHECK(cfg.plateau_factor == 3.0);
  CHECK(cfg.early_stop_patience == 11);
  CHECK(cfg.eval_interval == 5);
  CHECK(cfg.seed == 77);
  CHECK(cfg.n == 6);
  CHECK(cfg.model_kind == ModelKind::Reflection);
  CHECK(cfg.metric == Metric::F1);
  CHECK(cfg.deterministic);
  CHECK(cfg.threads == 2);
  CHECK(cfg.grad_clip == 1.5);
}

TEST_CASE("unknown keys are rejected by name") {
  const fs::path p = write_config("learning_rate = 0.1\n");
  TrainConfig cfg;
  try {
    apply_config(parse_config_file(p.string()), cfg);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
  }
}

TEST_CASE("malformed lines and values") {
  const fs::path p1 = write_config("no equals sign here\n");
  CHECK_THROWS_AS(parse_config_file(p1.string()), ParseError);

  const fs::path p2 = write_config("epochs = soon\n");
  TrainConfig cfg;
  CHECK_THROWS_AS(apply_config(parse_config_file(p2.string()), cfg), UsageError);

  const fs::path p3 = write_config("metric = euclidean\n");
  CHECK_THROWS_AS(apply_config(parse_config_file(p3.string()), cfg), UsageError);

  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.conf"), IoError);
}

TEST_SUITE_END();

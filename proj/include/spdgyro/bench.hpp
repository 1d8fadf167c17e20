#pragma once

#include <string>
#include <vector>

namespace spdgyro {

struct BenchRow {
  int n = 0;
  double median_seconds = 0.0;
};

struct BenchResult {
  std::string op;
  std::vector<BenchRow> rows;
  // Least-squares slope of log(time) against log(n); ~3 for the
  // eigendecomposition-bound operations at these sizes.
  double slope = 0.0;
};

// op is one of dist | gyro_add | exp | log | matrix_scale. Each size is
// timed `reps` times (auto-calibrated inner loop) and the median is kept.
BenchResult run_bench(const std::string& op, const std::vector<int>& sizes, int reps,
                      uint64_t seed);

// CSV with header `op,n,median_seconds`. The slope is printed by the caller.
void write_bench_csv(const BenchResult& result, const std::string& path);

}  // namespace spdgyro

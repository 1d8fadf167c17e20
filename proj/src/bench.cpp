#include "spdgyro/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "spdgyro/gyro.hpp"
#include "spdgyro/rng.hpp"

namespace spdgyro {

namespace {

using Clock = std::chrono::steady_clock;

SymMat random_sym(int n, Rng& rng, double scale) {
  Mat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = rng.normal(0.0, scale);
      m(i, j) = v;
      m(j, i) = v;
    }
  return SymMat(m);
}

double time_loop(const std::function<void()>& fn, int iters) {
  const auto t0 = Clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(iters);
}

}  // namespace

BenchResult run_bench(const std::string& op, const std::vector<int>& sizes, int reps,
                      uint64_t seed) {
  if (reps < 1) throw UsageError("bench: reps must be >= 1");
  if (sizes.empty()) throw UsageError("bench: no sizes given");
  for (int n : sizes) {
    if (n < 1) throw UsageError("bench: sizes must be >= 1");
  }

  BenchResult result;
  result.op = op;
  Rng rng(seed);
  volatile double sink = 0.0;  // keep the optimizer honest

  for (int n : sizes) {
    const SymMat u = random_sym(n, rng, 0.4);
    const SymMat w = random_sym(n, rng, 0.4);
    const SpdPoint p = exp_at_identity(u);
    const SpdPoint q = exp_at_identity(w);
    const SymMat a = random_sym(n, rng, 0.5);

    std::function<void()> body;
    if (op == "dist") {
      body = [&]() { sink = sink + dist(p, q, Metric::Riemannian); };
    } else if (op == "gyro_add") {
      body = [&]() { sink = sink + trace(gyro_add(p, q).mat()); };
    } else if (op == "exp") {
      body = [&]() { sink = sink + trace(exp_at_identity(u).mat()); };
    } else if (op == "log") {
      body = [&]() { sink = sink + trace(log_at_identity(p).mat()); };
    } else if (op == "matrix_scale") {
      body = [&]() { sink = sink + trace(matrix_scale(a, p).mat()); };
    } else {
      throw UsageError("bench: unknown op '" + op +
                       "' (expected dist|gyro_add|exp|log|matrix_scale)");
    }

    // Calibrate the inner loop to ~2ms so timer resolution is irrelevant.
    body();  // warm up
    const double t1 = std::max(time_loop(body, 1), 1e-9);
    const int iters = std::max(1, static_cast<int>(std::lround(2e-3 / t1)));

    std::vector<double> samples(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) samples[static_cast<size_t>(r)] = time_loop(body, iters);
    std::sort(samples.begin(), samples.end());
    const size_t mid = samples.size() / 2;
    const double median = samples.size() % 2 == 1
                              ? samples[mid]
                              : 0.5 * (samples[mid - 1] + samples[mid]);
    result.rows.push_back({n, median});
  }

  // Least-squares fit of log t = slope * log n + c.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(result.rows.size());
  for (const BenchRow& r : result.rows) {
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  result.slope = denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
  return result;
}

void write_bench_csv(const BenchResult& result, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open bench output file: " + path);
  f << "op,n,median_seconds\n";
  char buf[64];
  for (const BenchRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.9g", r.median_seconds);
    f << result.op << ',' << r.n << ',' << buf << '\n';
  }
  if (!f) throw IoError("bench write failed: " + path);
}

}  // namespace spdgyro

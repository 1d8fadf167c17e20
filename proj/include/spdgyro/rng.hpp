#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace spdgyro {

// mt19937_64 with hand-rolled output distributions. The standard pins down
// the engine but not the distributions, so uniform/normal sampling is spelled
// out here to keep runs reproducible across standard libraries.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling kills the modulo bias.
  uint64_t uniform_int(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Box-Muller, one cached value.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_cache_) {
      has_cache_ = false;
      return mean + stddev * cache_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return mean + stddev * r * std::cos(a);
  }

  // Engine + Box-Muller cache, round-trippable through text.
  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << ' ' << (has_cache_ ? 1 : 0);
    if (has_cache_) {
      os << ' ';
      os.precision(17);
      os << cache_;
    }
    return os.str();
  }

  static Rng deserialize(const std::string& state) {
    Rng r;
    std::istringstream is(state);
    int flag = 0;
    is >> r.engine_ >> flag;
    r.has_cache_ = (flag != 0);
    if (r.has_cache_) is >> r.cache_;
    return r;
  }

 private:
  std::mt19937_64 engine_;
  bool has_cache_ = false;
  double cache_ = 0.0;
};

}  // namespace spdgyro

#pragma once

#include <cstdint>
#include <vector>

namespace scoreforge {

// Deterministic splittable generator built on splitmix64. All randomness in
// the pipeline flows through this class so corpora are reproducible across
// platforms and worker counts; std::uniform_int_distribution is avoided on
// purpose (its output is not pinned by the standard).
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent stream from a master seed and a stream index,
  // e.g. one stream per puzzle instance and retry attempt.
  static Rng child(uint64_t master, uint64_t stream, uint64_t salt = 0) {
    Rng mixer(master);
    uint64_t a = mixer.next_u64();
    Rng s(a ^ (stream * 0x9E3779B97F4A7C15ULL) ^ (salt * 0xBF58476D1CE4E5B9ULL));
    s.next_u64();
    return s;
  }

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased in [0, n). n must be > 0.
  uint64_t uniform(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t v = next_u64();
      if (v >= threshold) return v % n;
    }
  }

  // In [0, 1).
  double uniform_real() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform_real() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform(i);
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

private:
  uint64_t state_;
};

}  // namespace scoreforge

#pragma once

#include <cstdint>
#include <vector>

namespace crdt {

/// splitmix64 (Steele, Lea, Flood). The exact constants are part of the
/// contract: runs must be reproducible from a seed across builds and
/// platforms, so the standard library engines are deliberately not used.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform-ish value in [0, n). Plain modulo; the bias is irrelevant for
  /// simulation purposes and keeps the mapping trivially portable.
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  /// True with probability ppm / 1'000'000.
  bool chance_ppm(uint32_t ppm) { return below(1000000) < ppm; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  uint64_t state_;
};

}  // namespace crdt

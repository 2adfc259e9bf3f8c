#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mimick {

// Seeded random stream. Built on std::mt19937_64, whose output sequence is
// fixed by the standard; the derived distributions below are implemented here
// so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Independent child stream; advances this stream by one draw.
  Rng fork() { return Rng(next()); }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 engine_;
};

// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
// 1/(1-rate). Rate 0 yields all ones without consuming randomness.
std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng);

}  // namespace mimick

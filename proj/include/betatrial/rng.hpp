// Counter-based random streams for reproducible, schedule-independent
// simulation. Every draw is a pure function of
// (master_seed, scenario_index, replicate_index, look, arm, counter), so
// replicates can be distributed across workers in any order and still
// produce identical results.

#pragma once

#include <cstdint>

namespace betatrial {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t key_chain(std::uint64_t h, std::uint64_t k) {
  return mix64(h ^ (k + 0x9E3779B97F4A7C15ull));
}

// One replicate's stream within one scenario.
class ReplicateStream {
 public:
  ReplicateStream(std::uint64_t master_seed, std::uint64_t scenario_index,
                  std::uint64_t replicate_index)
      : base_(key_chain(key_chain(key_chain(0x42u, master_seed), scenario_index),
                        replicate_index)) {}

  // Uniform in [0, 1) at a (look, arm, counter) coordinate.
  double uniform(std::uint64_t look, std::uint64_t arm, std::uint64_t counter) const {
    const std::uint64_t h = key_chain(key_chain(key_chain(base_, look), arm), counter);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  // Binomial draw as n indexed Bernoulli trials; deterministic and
  // independent of any other (look, arm) coordinate.
  int binomial(std::uint64_t look, std::uint64_t arm, int n, double p) const {
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (uniform(look, arm, static_cast<std::uint64_t>(i)) < p) ++count;
    return count;
  }

 private:
  std::uint64_t base_;
};

}  // namespace betatrial

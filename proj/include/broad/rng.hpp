#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace broad {

/// Seeded generator with a platform-stable output sequence: mt19937_64
/// seeded through std::seed_seq (both fully specified by the standard), with
/// the conversion to doubles done here rather than by the library
/// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Independent streams inside one replication, so that changing the learner
/// never perturbs the environment's randomness.
enum class Substream : std::uint32_t {
  kLearner = 1,
  kEnvironment = 2,
  kOpponent = 3,
  kEnvironmentBuild = 4,
};

Rng rng_stream(std::uint64_t master_seed, std::uint64_t replication,
               Substream substream = Substream::kLearner);

}  // namespace broad

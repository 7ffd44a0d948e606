#pragma once

#include <cstdint>

namespace dvit {

/// Counter-based pseudo-random generator.
///
/// Sample k of a stream is `mix(seed + (k + 1) * golden)` where `mix` is the
/// SplitMix64 finalizer, so the stream depends only on (seed, k). All derived
/// quantities (uniform reals, normals, integers) are computed with
/// integer arithmetic and IEEE-754 double operations only, never through
/// <random> distributions whose output differs between standard libraries.
///
/// Behaviour is versioned by kVersion; any change to the sample stream must
/// bump it.
class SeededGenerator {
 public:
  static constexpr std::uint32_t kVersion = 1;

  explicit SeededGenerator(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double low, double high);
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_int(std::uint64_t bound);
  bool bernoulli(double p);
  /// Standard normal via Box-Muller; consumes two samples.
  double normal();
  double normal(double mean, double stddev);

  /// Independent generator for a sub-stream, e.g. per (epoch, sample) pair.
  SeededGenerator derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dvit

#include "dvit/rng.hpp"

#include <cmath>
#include <numbers>

#include "dvit/errors.hpp"

namespace dvit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t SeededGenerator::next_u64() {
  ++counter_;
  return splitmix64(seed_ + counter_ * kGolden);
}

double SeededGenerator::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededGenerator::uniform(double low, double high) {
  return low + (high - low) * uniform();
}

std::uint64_t SeededGenerator::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw ContractError("uniform_int: bound must be positive");
  // Rejection keeps the distribution exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

bool SeededGenerator::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

double SeededGenerator::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SeededGenerator::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

SeededGenerator SeededGenerator::derive(std::uint64_t stream) const {
  return SeededGenerator(splitmix64(seed_ ^ splitmix64(stream + kGolden)));
}

}  // namespace dvit

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dvit/rng.hpp"

using namespace dvit;

namespace {

// Independent SplitMix64 reference (published constants).
std::uint64_t reference_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST(Rng, StreamIsCounterBasedSplitMix) {
  const std::uint64_t seed = 1234567;
  SeededGenerator g(seed);
  for (std::uint64_t k = 0; k < 50; ++k)
    EXPECT_EQ(g.next_u64(), reference_mix(seed + (k + 1) * 0x9e3779b97f4a7c15ULL)) << k;
  EXPECT_EQ(g.counter(), 50u);
}

TEST(Rng, KnownSplitMixOutput) {
  // First output of the canonical SplitMix64 sequence seeded with 0.
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
}

TEST(Rng, SameSeedSameStream) {
  SeededGenerator a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRange) {
  SeededGenerator g(5);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_LT(lo, 0.001);
  EXPECT_GT(hi, 0.999);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.uniform(0.2, 1.0);
    ASSERT_GE(v, 0.2);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Rng, UniformIntCoversBoundAndStaysBelow) {
  SeededGenerator g(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = g.uniform_int(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(g.uniform_int(1), 0u);
}

TEST(Rng, NormalMoments) {
  SeededGenerator g(77);
  const int n = 40000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(s2 / n - mean * mean, 1.0, 0.03);
  EXPECT_NEAR(g.normal(3.0, 0.0), 3.0, 0.0);
}

TEST(Rng, BernoulliExtremes) {
  SeededGenerator g(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(g.bernoulli(0.0));
    EXPECT_TRUE(g.bernoulli(1.0));
  }
}

TEST(Rng, DeriveIsDeterministicAndIndependentOfParentPosition) {
  SeededGenerator a(100);
  const SeededGenerator d1 = a.derive(5);
  a.next_u64();
  a.next_u64();
  SeededGenerator d2 = a.derive(5);
  SeededGenerator d1c = d1;
  EXPECT_EQ(d1c.next_u64(), d2.next_u64());
  SeededGenerator other = a.derive(6);
  SeededGenerator d3 = a.derive(5);
  EXPECT_NE(other.next_u64(), d3.next_u64());
}

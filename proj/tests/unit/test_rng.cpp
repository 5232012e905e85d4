#include <gtest/gtest.h>

#include <set>

#include "nora/rng.hpp"

using namespace nora;

TEST(Rng, ReferenceStreams) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  Rng r(5489);
  EXPECT_EQ(r.next(), 14514284786278117030ULL);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(Rng, RangesAndEdgeCases) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(r.below(7), 7u);
    const auto v = r.between(-3, 3);
    EXPECT_GE(v, -3);
    EXPECT_LE(v, 3);
    const double u = r.unit();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(r.below(0), 0u);
  EXPECT_EQ(r.below(1), 0u);
  EXPECT_EQ(r.between(5, 5), 5);
  EXPECT_FALSE(r.chance(0.0));
  EXPECT_TRUE(r.chance(1.0));
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng r(99);
  const int n = 6, draws = 60000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) ++counts[r.below(n)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - draws / n) * (c - draws / n) / double(draws / n);
  EXPECT_LT(chi2, 20.5);  // df 5, p = 0.001
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(123), b(123);
  const std::vector<int> v{1, 2, 3, 4, 5};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.pick(v), b.pick(v));
    EXPECT_EQ(a.unit(), b.unit());
  }
}

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "qentropy/instances.hpp"

using namespace qentropy;

TEST(Families, UniformAndPoint) {
  auto u = uniform_distribution(8);
  EXPECT_EQ(u.S(), 8u);
  EXPECT_EQ(u.counts(), std::vector<std::uint64_t>(8, 1));
  auto p = point_distribution(8);
  EXPECT_EQ(p.S(), 8u);
  EXPECT_EQ(p.count(0), 8u);
  EXPECT_EQ(p.support_size(), 1u);
}

TEST(Families, Zipf) {
  auto z = zipf_distribution(1.5, 16);
  EXPECT_EQ(z.count(0), 64u);  // 16^1.5
  EXPECT_EQ(z.count(3), 8u);   // 64 * 4^-1.5
  for (std::size_t i = 1; i < z.n(); ++i) EXPECT_LE(z.count(i), z.count(i - 1));
  EXPECT_EQ(zipf_distribution(0, 5), uniform_distribution(5));
}

TEST(Families, TwoValued) {
  // n = 4, S = 40, d = 2: one bin at 1/4 + 3*2/40, three at 1/4 - 2/40
  auto t = two_valued_distribution(1, 2, 40, 4);
  EXPECT_EQ(t.count(0), 16u);
  EXPECT_EQ(t.count(1), 8u);
  EXPECT_EQ(t.exact(0), boost::rational<std::int64_t>(1, 4) + boost::rational<std::int64_t>(3 * 2, 40));
  EXPECT_THROW(two_valued_distribution(1, 2, 41, 4), std::invalid_argument);
}

TEST(HardPairs, ShannonGapIsExact) {
  EXPECT_EQ(hard_pair_shannon_l(64, 0.1), 10u);
  auto [p1, p2] = hard_pair_shannon(64, 0.1);
  EXPECT_EQ(p1, uniform_distribution(64));
  EXPECT_EQ(p2.support_size(), 54u);
  // H(p1) - H(p2) = (2l/n) ln 2 in exact arithmetic
  auto gap = precise::shannon_entropy(p1) - precise::shannon_entropy(p2);
  precise::real expect = precise::real(20) / 64 * log(precise::real(2));
  EXPECT_LT(static_cast<double>(abs(gap - expect)), 1e-40);
  EXPECT_GE(static_cast<double>(gap), 2 * 0.1);
}

TEST(HardPairs, Boundary) {
  auto two = pair_shape(16, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(two.exact(i), boost::rational<std::int64_t>(1, 8));
  EXPECT_EQ(two.support_size(), 8u);
}

TEST(HardPairs, Coverage) {
  EXPECT_EQ(hard_pair_coverage_l(1024, 0.01), 62u);
  auto [p1, p2] = hard_pair_coverage(1024, 0.01);
  const double gap = (support_coverage(p1, 1024) - support_coverage(p2, 1024)) / 1024;
  EXPECT_NEAR(gap, 0.024198853791018166, 1e-13);
  // l = 1: close to (1 - 1/e)^2 / n
  auto one = pair_shape(1024, 1);
  const double g1 = (support_coverage(p1, 1024) - support_coverage(one, 1024)) / 1024;
  const double asym = std::pow(1 - std::exp(-1.0), 2) / 1024;
  EXPECT_NEAR(g1, asym, 1e-3 * asym);
  EXPECT_NEAR(support_coverage(p1, 1024) / 1024, 0.632300260588728799159, 1e-13);  // 1024 summed terms
}

TEST(LPairs, Structure) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto seq = lpairs_sequence(32, 5, seed);
    ASSERT_EQ(seq.size(), 32u);
    std::map<std::uint32_t, int> m;
    for (auto x : seq) ++m[x];
    int pairs = 0, singles = 0;
    for (auto& [x, c] : m) {
      EXPECT_LE(c, 2);
      (c == 2 ? pairs : singles)++;
    }
    EXPECT_EQ(pairs, 5);
    EXPECT_EQ(singles, 22);
  }
  EXPECT_EQ(lpairs_distribution(32, 5, 4).S(), 32u);
}

TEST(Generate, Shorthand) {
  EXPECT_EQ(generate("uniform:8"), uniform_distribution(8));
  EXPECT_EQ(generate("zipf:1.5:256"), zipf_distribution(1.5, 256));
  EXPECT_EQ(generate("hard-shannon:0.1:64"), pair_shape(64, 10));
  EXPECT_EQ(generate("random:100:10", 3), generate("random:100:10", 3));
  EXPECT_EQ(generate("random:100:10", 3).S(), 100u);
  EXPECT_THROW(generate("uniform"), std::invalid_argument);
  EXPECT_THROW(generate("nosuch:3"), std::invalid_argument);
  EXPECT_THROW(generate("uniform:x"), std::invalid_argument);
}

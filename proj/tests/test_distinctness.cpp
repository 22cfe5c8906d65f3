#include <cmath>

#include <gtest/gtest.h>

#include "qentropy/distinctness.hpp"
#include "qentropy/estimators.hpp"
#include "qentropy/instances.hpp"
#include "qentropy/verify.hpp"

using namespace qentropy;

TEST(Exponent, Values) {
  EXPECT_NEAR(distinctness_exponent(2), 2.0 / 3, 1e-15);
  EXPECT_NEAR(distinctness_exponent(3), 1 - 2.0 / 7, 1e-15);
  EXPECT_LT(distinctness_exponent(10), 1.0);
}

TEST(CostModel, Presets) {
  DistinctnessCostModel b{CostPreset::belovs, 1.0};
  EXPECT_NEAR(b.raw(2, 1000, 0.5), 16 * std::pow(1000.0, 2.0 / 3), 1e-9);
  EXPECT_NEAR(b.raw(2, 1000, 1e-3), 16 * std::pow(1000.0, 2.0 / 3) * std::log(1e3), 1e-8);
  DistinctnessCostModel a{CostPreset::ambainis, 2.0};
  EXPECT_NEAR(a.raw(3, 4096, 0.1), 2 * 9 * std::pow(4096.0, 0.75), 1e-8);
  DistinctnessCostModel f{CostPreset::flat34, 1.0};
  EXPECT_NEAR(f.raw(5, 16, 0.1), 8.0, 1e-12);
  EXPECT_EQ(f.charge(5, 17, 0.1), 9u);
  EXPECT_EQ(parse_cost_preset("ambainis"), CostPreset::ambainis);
  EXPECT_THROW(parse_cost_preset("grover"), std::invalid_argument);
}

TEST(Collisions, Counts) {
  EXPECT_EQ(count_alpha_collisions({1, 1, 1, 2}, 2).value, 3u);
  EXPECT_EQ(count_alpha_collisions({1, 1, 1, 2}, 3).value, 1u);
  EXPECT_EQ(count_alpha_collisions({1, 2, 3, 4, 5}, 2).value, 0u);
  EXPECT_EQ(count_alpha_collisions({}, 2).value, 0u);
  EXPECT_EQ(binomial_coefficient(10, 3), 120u);
  EXPECT_NEAR(binomial_coefficient_real(10, 3), 120.0, 1e-9);
  EXPECT_THROW(count_alpha_collisions({1, 1}, 1), std::invalid_argument);
}

TEST(Collisions, BruteForceAgrees) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::size_t L = 1 + uniform_below(rng, 12);
    std::vector<std::uint32_t> seq(L);
    for (auto& x : seq) x = static_cast<std::uint32_t>(uniform_below(rng, 4));
    for (unsigned a = 2; a <= 5; ++a)
      EXPECT_EQ(verify::brute_force_collisions(seq, a), count_alpha_collisions(seq, a).value);
  }
}

TEST(Collisions, ExpectationMatchesPowerSum) {
  auto o = build_oracle(uniform_distribution(4), 1);
  Rng rng(4);
  const int N = 100000;
  double s = 0, sq = 0;
  for (int k = 0; k < N; ++k) {
    double x = static_cast<double>(count_alpha_collisions(o.draw_sequence(3, rng), 2).value);
    s += x;
    sq += x * x;
  }
  double mean = s / N, se = std::sqrt((sq / N - mean * mean) / (N - 1));
  EXPECT_LT(std::fabs(mean - 0.75), 5 * se);
}

TEST(KDistinctness, Verdicts) {
  Rng rng(5);
  DistinctnessCostModel cost;
  EXPECT_FALSE(k_distinctness({1, 2, 3, 4}, 2, 0.0, cost, rng).has_value());
  EXPECT_EQ(k_distinctness({5, 5, 5}, 3, 0.0, cost, rng), std::optional<std::uint32_t>(5));
  EXPECT_FALSE(k_distinctness({5, 5, 6}, 3, 0.0, cost, rng).has_value());

  auto o = build_oracle(uniform_distribution(4), 1);
  k_distinctness({1, 1}, 2, 0.1, cost, rng, &o);
  EXPECT_EQ(o.ledger()->get("p", phase::distinctness), cost.charge(2, 2, 0.1));

  const int T = 1000;
  int wrong = 0;
  for (int t = 0; t < T; ++t)
    if (k_distinctness({7, 3, 7, 1}, 2, 0.2, cost, rng) != std::optional<std::uint32_t>(7)) ++wrong;
  EXPECT_LE(static_cast<double>(wrong) / T, 0.2 + 3 * std::sqrt(0.2 * 0.8 / T));
}

TEST(IntegerPowerSum, PointMass) {
  EstimatorConfig cfg;
  auto o = build_oracle(point_distribution(16), 1);
  Rng rng(6);
  for (double a : {2.0, 3.0}) {
    auto r = estimate_power_sum_integer(o, a, cfg, rng);
    EXPECT_NEAR(r.estimate, 1.0, 1e-9);
  }
}

TEST(IntegerPowerSum, UniformSixteen) {
  EstimatorConfig cfg;
  const int T = 200;
  int ok = 0;
  for (int t = 0; t < T; ++t) {
    auto o = build_oracle(uniform_distribution(16), derive_seed(7, t, 1));
    Rng rng(derive_seed(7, t, 2));
    auto r = estimate_power_sum_integer(o, 2.0, cfg, rng);
    ok += r.success;
    EXPECT_EQ(r.ledger.get("p", phase::sample), 0u);
    EXPECT_GT(r.ledger.get("p", phase::collision_counting), 0u);
  }
  const double p = 2.0 / 3;
  EXPECT_GE(static_cast<double>(ok) / T, p - 3 * std::sqrt(p * (1 - p) / T));
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/poisson.hpp>

#include "distinctness.hpp"
#include "distributions.hpp"
#include "instances.hpp"
#include "mean_estimation.hpp"
#include "quantum_counting.hpp"
#include "rng.hpp"

namespace qentropy::verify {

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline bool all_pass(const std::vector<Check>& v) {
  return std::all_of(v.begin(), v.end(), [](const Check& c) { return c.pass; });
}

// Normalization, one-window mass >= 8/pi^2, wider windows, and y <-> M-y symmetry.
inline std::vector<Check> estamp(std::uint64_t seed = 11, int per_M = 200) {
  Rng rng(seed);
  double worst_norm = 0, min_k1 = 1, min_margin_wide = 1, worst_sym = 0;
  const double bound1 = 8 / (std::numbers::pi * std::numbers::pi);
  for (std::uint64_t M = 2; M <= 256; M *= 2) {
    for (int t = 0; t < per_M; ++t) {
      double a = uniform01(rng);
      if (a == 0) a = 0.5;
      auto d = estamp_distribution(a, M);
      worst_norm = std::max(worst_norm, std::fabs(d.raw_total - 1));
      min_k1 = std::min(min_k1, d.window_mass(1));
      for (int k = 2; k <= 4; ++k)
        min_margin_wide = std::min(min_margin_wide, d.window_mass(k) - (1 - 1.0 / (2 * (k - 1))));
      for (std::uint64_t y = 1; y < M; ++y)
        worst_sym = std::max(worst_sym, std::fabs(d.y_probability[y] - d.y_probability[M - y]));
    }
  }
  return {
      {"estamp.normalization", worst_norm <= 1e-9, "max |sum - 1| = " + fmt(worst_norm)},
      {"estamp.k1-window", min_k1 >= bound1, "min mass " + fmt(min_k1) + " vs 8/pi^2 = " + fmt(bound1)},
      {"estamp.k2to4-windows", min_margin_wide > 0, "min margin " + fmt(min_margin_wide)},
      {"estamp.symmetry", worst_sym <= 1e-12, "max |P(y) - P(M-y)| = " + fmt(worst_sym)},
  };
}

inline RationalDistribution random_rational(Rng& rng, std::size_t max_n = 64, std::uint64_t max_count = 50) {
  std::size_t n = 2 + uniform_below(rng, max_n - 1);
  std::vector<std::uint64_t> c(n);
  for (auto& x : c) x = uniform_below(rng, max_count + 1);
  if (std::all_of(c.begin(), c.end(), [](auto x) { return x == 0; })) c[0] = 1;
  return RationalDistribution::from_counts(std::move(c));
}

// P_b^{a/b} <= P_a <= n^{1-a/b} P_b^{a/b} for a < b.
inline std::vector<Check> sandwich(std::uint64_t seed = 12, int instances = 1000) {
  Rng rng(seed);
  double worst_lo = -1, worst_hi = -1;
  int violations = 0;
  for (int t = 0; t < instances; ++t) {
    auto p = random_rational(rng);
    double a1 = 0.2 + 4.8 * uniform01(rng), a2 = 0.2 + 4.8 * uniform01(rng);
    if (a1 > a2) std::swap(a1, a2);
    if (a1 == a2) a2 += 1e-3;
    const double P1 = power_sum(p, a1), P2 = power_sum(p, a2);
    const double lo = std::pow(P2, a1 / a2);
    const double hi = std::pow(static_cast<double>(p.n()), 1 - a1 / a2) * lo;
    // relative excess, positive means violated
    double e_lo = (lo - P1) / P1, e_hi = (P1 - hi) / P1;
    worst_lo = std::max(worst_lo, e_lo);
    worst_hi = std::max(worst_hi, e_hi);
    if (e_lo > 1e-12 || e_hi > 1e-12) ++violations;
  }
  return {{"sandwich.lower", worst_lo <= 1e-12, "max relative excess " + fmt(worst_lo)},
          {"sandwich.upper", worst_hi <= 1e-12, "max relative excess " + fmt(worst_hi)},
          {"sandwich.instances", violations == 0, std::to_string(violations) + " violating instances"}};
}

// Pr[X >= t] for X ~ Poisson(mu), exact.
inline double poisson_tail(double mu, double t) {
  boost::math::poisson_distribution<double> d(mu);
  double k = std::ceil(t);
  if (k <= 0) return 1.0;
  return boost::math::cdf(boost::math::complement(d, k - 1));
}

inline std::vector<Check> poisson(bool relaxed_only_from_64 = true) {
  double min_upper = 1, worst_ratio = 0;
  std::string worst_at;
  for (std::uint64_t n = 16; n <= 1024; n *= 2) {
    for (double eps : {0.5, 1.0}) {
      const double t = 16 * std::log(static_cast<double>(n)) / (eps * eps);
      for (double scale : {1.0, 1.05, 1.25, 2.0}) min_upper = std::min(min_upper, poisson_tail(t * scale, t));
      if (relaxed_only_from_64 && n < 64) continue;
      // The tail grows with mu, so the supremum over mu < t/sqrt(1+eps) sits at the endpoint.
      const double tail = poisson_tail(t / std::sqrt(1 + eps), t);
      const double ratio = tail / (2.0 / (static_cast<double>(n) * n));
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_at = "n=" + std::to_string(n) + " eps=" + fmt(eps) + " tail=" + fmt(tail);
      }
    }
  }
  return {{"poisson.upper-tail", min_upper > 0.15, "min Pr[X >= t] = " + fmt(min_upper)},
          {"poisson.lower-tail", worst_ratio <= 1, "worst tail/(2/n^2) = " + fmt(worst_ratio) + " at " + worst_at}};
}

inline std::uint64_t brute_force_collisions(const std::vector<std::uint32_t>& seq, unsigned alpha) {
  const std::size_t L = seq.size();
  std::uint64_t count = 0;
  // enumerate alpha-subsets of positions
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
    if (static_cast<unsigned>(__builtin_popcountll(mask)) != alpha) continue;
    std::optional<std::uint32_t> v;
    bool same = true;
    for (std::size_t i = 0; i < L && same; ++i)
      if (mask >> i & 1) {
        if (v && *v != seq[i]) same = false;
        v = seq[i];
      }
    if (same) ++count;
  }
  return count;
}

// Mean collision count against C(l, alpha) P_alpha, and brute force against the formula.
inline std::vector<Check> collision(std::uint64_t seed = 13, std::uint64_t sequences = 100000) {
  std::vector<Check> out;
  Rng rng(seed);
  struct Case {
    std::size_t n, l;
    unsigned alpha;
  };
  for (auto c : {Case{4, 3, 2}, Case{8, 5, 2}, Case{8, 6, 3}}) {
    auto p = uniform_distribution(c.n);
    auto o = build_oracle(p, seed + c.n);
    double sum = 0, sq = 0;
    for (std::uint64_t k = 0; k < sequences; ++k) {
      double x = static_cast<double>(count_alpha_collisions(o.draw_sequence(c.l, rng), c.alpha).value);
      sum += x;
      sq += x * x;
    }
    const double N = static_cast<double>(sequences);
    const double mean = sum / N;
    const double se = std::sqrt((sq / N - mean * mean) / (N - 1));
    const double expect = static_cast<double>(binomial_coefficient(c.l, c.alpha)) * power_sum(p, c.alpha);
    const double z = std::fabs(mean - expect) / se;
    out.push_back({"collision.mean(n=" + std::to_string(c.n) + ",l=" + std::to_string(c.l) +
                       ",alpha=" + std::to_string(c.alpha) + ")",
                   z <= 5, "mean " + fmt(mean) + " vs " + fmt(expect) + ", z = " + fmt(z)});
  }
  int mismatches = 0, cases = 0;
  for (int t = 0; t < 300; ++t) {
    std::size_t L = 1 + uniform_below(rng, 12);
    std::uint32_t alphabet = 1 + static_cast<std::uint32_t>(uniform_below(rng, 5));
    std::vector<std::uint32_t> seq(L);
    for (auto& x : seq) x = static_cast<std::uint32_t>(uniform_below(rng, alphabet));
    for (unsigned a = 2; a <= 4; ++a) {
      ++cases;
      if (brute_force_collisions(seq, a) != count_alpha_collisions(seq, a).value) ++mismatches;
    }
  }
  out.push_back({"collision.brute-force", mismatches == 0,
                 std::to_string(mismatches) + " mismatches in " + std::to_string(cases) + " cases"});
  return out;
}

// Multiplicative mean estimation on two-point subroutines with relative variance sigma^2.
inline std::vector<Check> meanest(std::uint64_t seed = 14, int trials = 1000) {
  std::vector<Check> out;
  Rng rng(seed);
  for (double s2 : {0.04, 0.25}) {
    const double s = std::sqrt(s2);
    const double mean = 1.0;
    // X in {1 - s, 1 + s} equiprobable: E = 1, var = s^2
    auto A = Subroutine::from_law({{mean - s, 0.5}, {mean + s, 0.5}});
    const double a = 0.5, b = 2.0, eps = 0.1;
    int fails = 0;
    double worst_identity = 0;
    for (int t = 0; t < trials; ++t) {
      auto m = qmean_multiplicative(A, s, a, b, eps, rng);
      if (std::fabs(m.value - mean) >= eps * mean) ++fails;
      double recon = m.scale * (m.m_tilde - 6 * m.mu_minus + 6 * m.mu_plus);
      worst_identity = std::max(worst_identity, std::fabs(recon - m.value) / std::max(1.0, std::fabs(m.value)));
    }
    const double rate = static_cast<double>(fails) / trials;
    const double limit = 0.1 + 3 * std::sqrt(0.1 * 0.9 / trials);
    out.push_back({"meanest.multiplicative(sigma^2=" + fmt(s2) + ")", rate <= limit,
                   "failure rate " + fmt(rate) + " vs " + fmt(limit)});
    out.push_back({"meanest.identity(sigma^2=" + fmt(s2) + ")", worst_identity <= 1e-12,
                   "max relative gap " + fmt(worst_identity)});
  }
  {
    auto A = Subroutine::from_law({{0.0, 0.5}, {1.0, 0.5}});
    int fails = 0;
    const int T = 500;
    for (int t = 0; t < T; ++t)
      if (std::fabs(qmean_additive(A, 0.5, 0.1, rng).value - 0.5) >= 0.1) ++fails;
    const double rate = static_cast<double>(fails) / T;
    const double limit = 0.2 + 3 * std::sqrt(0.2 * 0.8 / T);
    out.push_back({"meanest.additive", rate <= limit, "failure rate " + fmt(rate) + " vs " + fmt(limit)});
  }
  return out;
}

}  // namespace qentropy::verify

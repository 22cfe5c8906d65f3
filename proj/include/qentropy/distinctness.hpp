#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"

namespace qentropy {

// nu(k) = 1 - 2^{k-2} / (2^k - 1)
inline double distinctness_exponent(unsigned k) {
  return 1.0 - std::ldexp(1.0, static_cast<int>(k) - 2) / (std::ldexp(1.0, static_cast<int>(k)) - 1.0);
}

enum class CostPreset { belovs, ambainis, flat34 };

inline CostPreset parse_cost_preset(const std::string& s) {
  if (s == "belovs") return CostPreset::belovs;
  if (s == "ambainis") return CostPreset::ambainis;
  if (s == "flat34") return CostPreset::flat34;
  throw std::invalid_argument("unknown distinctness cost model '" + s + "'");
}

inline std::string to_string(CostPreset p) {
  switch (p) {
    case CostPreset::belovs: return "belovs";
    case CostPreset::ambainis: return "ambainis";
    case CostPreset::flat34: return "flat34";
  }
  return "?";
}

// Charged queries of a simulated k-distinctness run on len elements.
struct DistinctnessCostModel {
  CostPreset preset = CostPreset::belovs;
  double c = 1.0;

  bool uses_failure_probability() const { return preset == CostPreset::belovs; }

  double raw(unsigned k, std::uint64_t len, double fail_prob) const {
    const double L = static_cast<double>(std::max<std::uint64_t>(len, 1));
    const double kd = static_cast<double>(k);
    switch (preset) {
      case CostPreset::belovs: {
        double log_term = std::max(std::log(1.0 / fail_prob), 1.0);
        return c * std::exp2(kd * kd) * std::pow(L, distinctness_exponent(k)) * log_term;
      }
      case CostPreset::ambainis:
        return c * kd * kd * std::pow(L, kd / (kd + 1));
      case CostPreset::flat34:
        return c * std::pow(L, 0.75);
    }
    return 0;
  }

  std::uint64_t charge(unsigned k, std::uint64_t len, double fail_prob) const {
    double x = std::ceil(raw(k, len, fail_prob));
    if (!(x < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(x);
  }
};

struct CollisionCount {
  std::uint64_t value = 0;
  std::uint64_t sequence_length = 0;
  unsigned order = 0;
};

inline std::uint64_t binomial_coefficient(std::uint64_t m, unsigned k) {
  if (k > m) return 0;
  std::uint64_t r = 1;
  for (unsigned j = 1; j <= k; ++j) {
    // r * (m - k + j) / j stays integral at every step
    r = saturating_mul(r, m - k + j) / j;
  }
  return r;
}

inline double binomial_coefficient_real(double m, unsigned k) {
  if (static_cast<double>(k) > m) return 0;
  return std::exp(std::lgamma(m + 1) - std::lgamma(static_cast<double>(k) + 1) -
                  std::lgamma(m - k + 1));
}

inline std::unordered_map<std::uint32_t, std::uint64_t> multiplicities(
    const std::vector<std::uint32_t>& seq) {
  std::unordered_map<std::uint32_t, std::uint64_t> m;
  for (auto x : seq) ++m[x];
  return m;
}

inline CollisionCount count_alpha_collisions(const std::vector<std::uint32_t>& seq, unsigned alpha) {
  if (alpha < 2) throw std::invalid_argument("collision order must be >= 2");
  CollisionCount c{0, seq.size(), alpha};
  for (auto& [x, m] : multiplicities(seq)) c.value = saturating_add(c.value, binomial_coefficient(m, alpha));
  return c;
}

// Simulated quantum k-distinctness: the truthful answer is computed classically and
// flipped with probability fail_prob. Charges the cost model under "distinctness".
inline std::optional<std::uint32_t> k_distinctness(const std::vector<std::uint32_t>& seq,
                                                   unsigned k, double fail_prob,
                                                   const DistinctnessCostModel& cost, Rng& rng,
                                                   const DistributionOracle* charge_to = nullptr) {
  if (k < 2) throw std::invalid_argument("k-distinctness needs k >= 2");
  if (fail_prob < 0 || fail_prob >= 1) throw std::invalid_argument("fail_prob must lie in [0,1)");
  if (charge_to) charge_to->charge(phase::distinctness, cost.charge(k, seq.size(), std::max(fail_prob, 1e-300)));
  std::optional<std::uint32_t> best;
  std::uint64_t best_count = 0;
  for (auto& [x, m] : multiplicities(seq))
    if (m > best_count || (m == best_count && best && x < *best)) {
      best = x;
      best_count = m;
    }
  const bool found = best && best_count >= k;
  const bool flip = bernoulli(rng, fail_prob);
  if (found != flip) return best;
  return std::nullopt;
}

}  // namespace qentropy

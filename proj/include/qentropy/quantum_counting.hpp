#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"

namespace qentropy {

inline bool is_power_of_two(std::uint64_t M) { return M != 0 && (M & (M - 1)) == 0; }

inline std::uint64_t pow2(int e) {
  if (e < 0) return 1;
  if (e >= 63) throw std::overflow_error("query budget exceeds 2^62");
  return std::uint64_t{1} << e;
}

// 2^ceil(log2 x) as an exponent, guarding against x <= 1.
inline int ceil_log2(double x) {
  if (!(x > 1)) return 0;
  int e = static_cast<int>(std::ceil(std::log2(x)));
  // log2 can land a hair above an exact power of two
  if (e > 0 && std::ldexp(1.0, e - 1) >= x) --e;
  return e;
}

inline double grid_value(std::uint64_t l, std::uint64_t M) {
  if (l > M) throw std::invalid_argument("grid index out of range");
  if (2 * l == M) return 1.0;
  if (l == 0 || l == M) return 0.0;
  if (4 * l == M || 4 * l == 3 * M) return 0.5;
  double s = std::sin(static_cast<double>(l) * std::numbers::pi / static_cast<double>(M));
  return s * s;
}

inline double estamp_prime_floor(std::uint64_t M) {
  double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(M)));
  return s * s;
}

// Output law of amplitude estimation with M queries on amplitude a.
struct EstAmpDistribution {
  std::uint64_t M = 0;
  double a = 0;
  double omega = 0;
  std::vector<double> y_probability;  // measurement outcomes y = 0..M-1, unmerged
  double raw_total = 0;               // sum before renormalization
  std::vector<std::pair<double, double>> outcomes;  // (sin^2(l pi/M), prob), l = 0..M/2
  std::vector<double> cdf;

  std::size_t size() const { return outcomes.size(); }

  double mean() const {
    double m = 0;
    for (auto& [v, p] : outcomes) m += v * p;
    return m;
  }

  std::size_t sample_index(Rng& rng) const {
    double u = uniform01(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    if (k >= outcomes.size()) k = outcomes.size() - 1;
    while (outcomes[k].second == 0.0 && k > 0) --k;
    return k;
  }

  double sample(Rng& rng) const { return outcomes[sample_index(rng)].first; }

  // Analytic mass within 2 pi k sqrt(a(1-a))/M + k^2 pi^2/M^2 of a.
  double window_mass(int k) const {
    const double Md = static_cast<double>(M);
    const double w = 2 * std::numbers::pi * k * std::sqrt(a * (1 - a)) / Md +
                     k * k * std::numbers::pi * std::numbers::pi / (Md * Md);
    double mass = 0;
    for (auto& [v, p] : outcomes)
      if (std::fabs(v - a) <= w * (1 + 1e-12) + 1e-15) mass += p;
    return mass;
  }

  void write_csv(std::ostream& os) const {
    os << "value,probability\n";
    os.precision(17);
    for (auto& [v, p] : outcomes) os << v << ',' << p << '\n';
  }
};

namespace detail {

inline double fejer(double delta, std::uint64_t M) {
  if (delta < 1e-14) return 1.0;
  const double Md = static_cast<double>(M);
  // delta on the 1/M lattice: the numerator vanishes exactly
  if (std::floor(Md * delta) == Md * delta) return 0.0;
  double num = std::sin(Md * delta * std::numbers::pi);
  double den = std::sin(delta * std::numbers::pi);
  return (num * num) / (Md * Md * den * den);
}

inline double circular_distance(double x, double y) {
  double d = std::fmod(std::fabs(x - y), 1.0);
  return std::min(d, 1.0 - d);
}

}  // namespace detail

// The phase register sees the eigenphases +omega and -omega with equal weight, so
// outcome y gets the average of the two Fejer kernels; y and M-y then share a grid value.
inline EstAmpDistribution estamp_distribution(double a, std::uint64_t M) {
  if (!is_power_of_two(M) || M < 2)
    throw std::invalid_argument("amplitude estimation needs M a power of two >= 2");
  if (std::isnan(a) || a < 0 || a > 1) throw std::invalid_argument("amplitude must lie in [0,1]");
  EstAmpDistribution d;
  d.M = M;
  d.a = a;
  d.omega = std::asin(std::sqrt(a)) / std::numbers::pi;
  d.y_probability.assign(M, 0.0);
  const double Md = static_cast<double>(M);
  if (a == 0.0) {
    d.y_probability[0] = 1.0;
  } else {
    for (std::uint64_t y = 0; y < M; ++y) {
      double t = static_cast<double>(y) / Md;
      d.y_probability[y] = 0.5 * (detail::fejer(detail::circular_distance(d.omega, t), M) +
                                  detail::fejer(detail::circular_distance(-d.omega, t), M));
    }
  }
  const std::uint64_t half = M / 2;
  std::vector<double> merged(half + 1, 0.0);
  for (std::uint64_t y = 0; y < M; ++y) merged[std::min(y, M - y)] += d.y_probability[y];
  d.raw_total = 0;
  for (double p : merged) d.raw_total += p;
  if (std::fabs(d.raw_total - 1.0) > 1e-9)
    throw std::runtime_error("amplitude estimation law failed to normalize");
  d.outcomes.reserve(half + 1);
  double c = 0;
  for (std::uint64_t l = 0; l <= half; ++l) {
    double p = merged[l] / d.raw_total;
    d.outcomes.emplace_back(grid_value(l, M), p);
    c += p;
    d.cdf.push_back(c);
  }
  d.cdf.back() = 1.0;
  return d;
}

inline double estamp_sample(const DistributionOracle& oracle, std::size_t i, std::uint64_t M,
                            Rng& rng) {
  auto law = estamp_distribution(oracle.probability(i), M);
  oracle.charge(phase::estamp, M);
  return law.sample(rng);
}

inline double estamp_prime_sample(const DistributionOracle& oracle, std::size_t i,
                                  std::uint64_t M, Rng& rng) {
  double v = estamp_sample(oracle, i, M, rng);
  return v == 0.0 ? estamp_prime_floor(M) : v;
}

// Smallest power-of-two M >= 2 whose one-window deviation bound is within eps * p_floor.
inline std::uint64_t multiplicative_budget(double epsilon, double p_floor) {
  if (!(epsilon > 0) || !(p_floor > 0)) throw std::invalid_argument("need epsilon, p_floor > 0");
  const double pi = std::numbers::pi;
  for (int e = 1; e < 62; ++e) {
    double M = std::ldexp(1.0, e);
    if (2 * pi * std::sqrt(p_floor) / M + pi * pi / (M * M) <= epsilon * p_floor) return pow2(e);
  }
  throw std::overflow_error("multiplicative budget too large");
}

struct MultiplicativeEstimate {
  double value;
  std::uint64_t M;
};

inline MultiplicativeEstimate estamp_multiplicative(const DistributionOracle& oracle,
                                                    std::size_t i, double epsilon,
                                                    double p_floor, Rng& rng) {
  std::uint64_t M = multiplicative_budget(epsilon, p_floor);
  return {estamp_sample(oracle, i, M, rng), M};
}

}  // namespace qentropy

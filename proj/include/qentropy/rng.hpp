#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qentropy {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

// 53-bit uniform in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  std::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
  return d(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  return uniform01(rng) < p;
}

namespace detail {

inline std::uint64_t poisson_inversion(Rng& rng, double mu) {
  double u = uniform01(rng);
  double p = std::exp(-mu);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mu / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) break;  // rounding left a sliver of mass
  }
  return k;
}

// Hormann's transformed rejection with squeeze (PTRS).
inline std::uint64_t poisson_ptrs(Rng& rng, double mu) {
  const double slam = std::sqrt(mu);
  const double loglam = std::log(mu);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    double U = uniform01(rng) - 0.5;
    double V = uniform01(rng);
    double us = 0.5 - std::fabs(U);
    double k = std::floor((2 * a / us + b) * U + mu + 0.43);
    if (us >= 0.07 && V <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mu + k * loglam - std::lgamma(k + 1))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace detail

inline std::uint64_t poisson(Rng& rng, double mu) {
  if (!(mu > 0)) return 0;
  return mu <= 30 ? detail::poisson_inversion(rng, mu) : detail::poisson_ptrs(rng, mu);
}

inline std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0) return 0;
  if (p >= 1) return trials;
  std::binomial_distribution<std::uint64_t> d(trials, p);
  return d(rng);
}

// Multinomial counts by sequential conditional binomials.
inline std::vector<std::uint64_t> multinomial(Rng& rng, std::uint64_t trials,
                                              const std::vector<double>& probs) {
  std::vector<std::uint64_t> out(probs.size(), 0);
  double rest = 0;
  for (double p : probs) rest += p;
  std::uint64_t left = trials;
  for (std::size_t k = 0; k < probs.size() && left > 0; ++k) {
    if (probs[k] <= 0) continue;
    if (k + 1 == probs.size() || probs[k] >= rest) {
      out[k] = left;
      left = 0;
      break;
    }
    out[k] = binomial(rng, left, probs[k] / rest);
    left -= out[k];
    rest -= probs[k];
  }
  if (left > 0) {
    // Trailing zero-probability categories: give the remainder to the last positive one.
    for (std::size_t k = probs.size(); k-- > 0;)
      if (probs[k] > 0) { out[k] += left; break; }
  }
  return out;
}

}  // namespace qentropy

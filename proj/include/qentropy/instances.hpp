#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "distributions.hpp"
#include "rng.hpp"

namespace qentropy {

inline RationalDistribution uniform_distribution(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform needs n >= 1");
  return RationalDistribution(n, std::vector<std::uint64_t>(n, 1));
}

inline RationalDistribution point_distribution(std::size_t n) {
  if (n == 0) throw std::invalid_argument("point needs n >= 1");
  std::vector<std::uint64_t> c(n, 0);
  c[0] = n;
  return RationalDistribution(n, std::move(c));
}

// m_i = max(1, round(n^s i^{-s})), S = sum of the m_i.
inline RationalDistribution zipf_distribution(double s, std::size_t n) {
  if (n == 0 || !(s >= 0)) throw std::invalid_argument("zipf needs n >= 1 and s >= 0");
  const double top = std::pow(static_cast<double>(n), s);
  if (top > 1e15) throw std::invalid_argument("zipf counts too large for exact representation");
  std::vector<std::uint64_t> c(n);
  for (std::size_t i = 0; i < n; ++i)
    c[i] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(top * std::pow(static_cast<double>(i + 1), -s))));
  return RationalDistribution::from_counts(std::move(c));
}

// n - c bins at 1/n - d/S and c bins at 1/n + (n-c)d/(cS).
inline RationalDistribution two_valued_distribution(std::uint64_t c, std::uint64_t d, std::uint64_t S,
                                                    std::size_t n) {
  if (n == 0 || c == 0 || c >= n) throw std::invalid_argument("two-valued needs 0 < c < n");
  if (S % n != 0) throw std::invalid_argument("two-valued needs n | S");
  const std::uint64_t base = S / n;
  if (d > base) throw std::invalid_argument("two-valued needs d <= S/n");
  if (((n - c) * d) % c != 0) throw std::invalid_argument("two-valued needs c | (n-c)d");
  std::vector<std::uint64_t> counts(n, base - d);
  for (std::uint64_t k = 0; k < c; ++k) counts[k] = base + (n - c) * d / c;
  return RationalDistribution(S, std::move(counts));
}

// l bins at 2/n, n - 2l bins at 1/n, the remaining l bins empty.
inline RationalDistribution pair_shape(std::size_t n, std::size_t l) {
  if (2 * l > n) throw std::invalid_argument("need 2l <= n");
  std::vector<std::uint64_t> c(n, 0);
  for (std::size_t i = 0; i < l; ++i) c[i] = 2;
  for (std::size_t i = l; i < n - l; ++i) c[i] = 1;
  return RationalDistribution(n, std::move(c));
}

inline std::size_t hard_pair_shannon_l(std::size_t n, double eps) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) * eps / std::log(2.0)));
}

inline std::size_t hard_pair_coverage_l(std::size_t n, double eps) {
  return static_cast<std::size_t>(std::ceil(6.0 * static_cast<double>(n) * eps));
}

inline std::pair<RationalDistribution, RationalDistribution> hard_pair_shannon(std::size_t n, double eps) {
  auto l = hard_pair_shannon_l(n, eps);
  if (2 * l > n) throw std::invalid_argument("hard Shannon pair needs ceil(n eps / ln 2) <= n/2");
  return {uniform_distribution(n), pair_shape(n, l)};
}

inline std::pair<RationalDistribution, RationalDistribution> hard_pair_coverage(std::size_t n, double eps) {
  auto l = hard_pair_coverage_l(n, eps);
  if (2 * l > n) throw std::invalid_argument("hard coverage pair needs ceil(6 n eps) <= n/2");
  return {uniform_distribution(n), pair_shape(n, l)};
}

// Values of a 2-to-1-on-l-pairs function [n] -> [n], positions and labels shuffled by seed.
inline std::vector<std::uint32_t> lpairs_sequence(std::size_t n, std::size_t l, std::uint64_t seed) {
  if (2 * l > n) throw std::invalid_argument("lpairs needs 2l <= n");
  std::vector<std::uint32_t> labels(n);
  std::iota(labels.begin(), labels.end(), 0u);
  Rng rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<std::uint32_t> seq;
  seq.reserve(n);
  for (std::size_t i = 0; i < l; ++i) {
    seq.push_back(labels[i]);
    seq.push_back(labels[i]);
  }
  for (std::size_t i = l; i < n - l; ++i) seq.push_back(labels[i]);
  std::shuffle(seq.begin(), seq.end(), rng);
  return seq;
}

inline RationalDistribution lpairs_distribution(std::size_t n, std::size_t l, std::uint64_t seed) {
  std::vector<std::uint64_t> c(n, 0);
  for (auto x : lpairs_sequence(n, l, seed)) ++c[x];
  return RationalDistribution(n, std::move(c));
}

// S balls thrown uniformly into n bins.
inline RationalDistribution random_distribution(std::uint64_t S, std::size_t n, std::uint64_t seed) {
  if (n == 0 || S == 0) throw std::invalid_argument("random needs S, n >= 1");
  Rng rng(seed);
  std::vector<double> probs(n, 1.0 / static_cast<double>(n));
  return RationalDistribution(S, multinomial(rng, S, probs));
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-')
    throw std::invalid_argument("expected a non-negative integer for " + what + ", got '" + s + "'");
  return v;
}

inline double parse_real(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw std::invalid_argument("expected a number for " + what + ", got '" + s + "'");
  return v;
}

}  // namespace detail

// Shorthand: uniform:n, point:n, zipf:s:n, two-valued:c:d:S:n, hard-shannon:eps:n,
// hard-coverage:eps:n, lpairs:l:n, random:S:n; anything else is read as a JSON file.
inline RationalDistribution generate(const std::string& spec, std::uint64_t seed = 0) {
  using detail::parse_real;
  using detail::parse_uint;
  auto parts = detail::split(spec, ':');
  const std::string& fam = parts.empty() ? spec : parts[0];
  auto need = [&](std::size_t k) {
    if (parts.size() != k + 1)
      throw std::invalid_argument("instance '" + fam + "' takes " + std::to_string(k) + " parameters");
  };
  if (fam == "uniform") { need(1); return uniform_distribution(parse_uint(parts[1], "n")); }
  if (fam == "point") { need(1); return point_distribution(parse_uint(parts[1], "n")); }
  if (fam == "zipf") { need(2); return zipf_distribution(parse_real(parts[1], "s"), parse_uint(parts[2], "n")); }
  if (fam == "two-valued") {
    need(4);
    return two_valued_distribution(parse_uint(parts[1], "c"), parse_uint(parts[2], "d"),
                                   parse_uint(parts[3], "S"), parse_uint(parts[4], "n"));
  }
  if (fam == "hard-shannon") { need(2); return hard_pair_shannon(parse_uint(parts[2], "n"), parse_real(parts[1], "eps")).second; }
  if (fam == "hard-coverage") { need(2); return hard_pair_coverage(parse_uint(parts[2], "n"), parse_real(parts[1], "eps")).second; }
  if (fam == "lpairs") { need(2); return lpairs_distribution(parse_uint(parts[2], "n"), parse_uint(parts[1], "l"), seed); }
  if (fam == "random") { need(2); return random_distribution(parse_uint(parts[1], "S"), parse_uint(parts[2], "n"), seed); }
  if (std::filesystem::exists(spec)) return load_distribution(spec);
  throw std::invalid_argument("unknown instance '" + spec + "'");
}

}  // namespace qentropy

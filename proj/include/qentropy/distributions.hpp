#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <json.hpp>

namespace qentropy {

// p_i = counts[i] / S, elements indexed from 0.
class RationalDistribution {
 public:
  RationalDistribution() = default;

  RationalDistribution(std::uint64_t S, std::vector<std::uint64_t> counts)
      : S_(S), counts_(std::move(counts)) {
    if (counts_.empty()) throw std::invalid_argument("distribution needs n >= 1");
    if (S_ == 0) throw std::invalid_argument("distribution needs S >= 1");
    std::uint64_t sum = 0;
    for (auto c : counts_) {
      if (c > std::numeric_limits<std::uint64_t>::max() - sum)
        throw std::invalid_argument("counts overflow");
      sum += c;
    }
    if (sum != S_)
      throw std::invalid_argument("sum of counts (" + std::to_string(sum) +
                                  ") must equal S (" + std::to_string(S_) + ")");
  }

  static RationalDistribution from_counts(std::vector<std::uint64_t> counts) {
    std::uint64_t s = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    return RationalDistribution(s, std::move(counts));
  }

  std::size_t n() const { return counts_.size(); }
  std::uint64_t S() const { return S_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(std::size_t i) const { return counts_.at(i); }

  double p(std::size_t i) const {
    return static_cast<double>(counts_.at(i)) / static_cast<double>(S_);
  }

  boost::rational<std::int64_t> exact(std::size_t i) const {
    return {static_cast<std::int64_t>(counts_.at(i)), static_cast<std::int64_t>(S_)};
  }

  std::size_t support_size() const {
    return static_cast<std::size_t>(
        std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
  }

  std::uint64_t max_count() const {
    return *std::max_element(counts_.begin(), counts_.end());
  }

  bool operator==(const RationalDistribution&) const = default;

 private:
  std::uint64_t S_ = 0;
  std::vector<std::uint64_t> counts_;
};

inline double shannon_entropy(const RationalDistribution& p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    double pi = p.p(i);
    h -= pi * std::log(pi);
  }
  return h;
}

inline double power_sum(const RationalDistribution& p, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("power_sum needs alpha > 0");
  double s = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i)
    if (p.count(i) > 0) s += std::pow(p.p(i), alpha);
  return s;
}

inline double max_probability(const RationalDistribution& p) {
  return static_cast<double>(p.max_count()) / static_cast<double>(p.S());
}

inline bool is_infinite_order(double alpha) { return std::isinf(alpha) && alpha > 0; }

inline double renyi_entropy(const RationalDistribution& p, double alpha) {
  if (std::isnan(alpha) || alpha < 0) throw std::invalid_argument("renyi order must be in [0, inf]");
  if (alpha == 0.0) return std::log(static_cast<double>(p.support_size()));
  if (alpha == 1.0) return shannon_entropy(p);
  if (is_infinite_order(alpha)) return -std::log(max_probability(p));
  return std::log(power_sum(p, alpha)) / (1.0 - alpha);
}

// Expected number of distinct elements seen in n_samples draws.
inline double support_coverage(const RationalDistribution& p, std::uint64_t n_samples) {
  if (n_samples == 0) throw std::invalid_argument("support_coverage needs n_samples >= 1");
  double s = 0.0;
  const double N = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    if (p.count(i) == p.S()) { s += 1.0; continue; }
    s += -std::expm1(N * std::log1p(-p.p(i)));
  }
  return s;
}

inline double kl_divergence(const RationalDistribution& p, const RationalDistribution& q) {
  if (p.n() != q.n()) throw std::invalid_argument("kl_divergence needs equal n");
  double d = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    if (q.count(i) == 0)
      throw std::domain_error("p is not absolutely continuous w.r.t. q at element " +
                              std::to_string(i));
    d += p.p(i) * (std::log(p.p(i)) - std::log(q.p(i)));
  }
  return d;
}

// Slower cross-check path with 50 decimal digits.
namespace precise {

using real = boost::multiprecision::cpp_dec_float_50;
using rational = boost::multiprecision::cpp_rational;

inline real prob(const RationalDistribution& p, std::size_t i) {
  return real(p.count(i)) / real(p.S());
}

inline real shannon_entropy(const RationalDistribution& p) {
  real h = 0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    real pi = prob(p, i);
    h -= pi * log(pi);
  }
  return h;
}

inline real power_sum(const RationalDistribution& p, const real& alpha) {
  real s = 0;
  for (std::size_t i = 0; i < p.n(); ++i)
    if (p.count(i) > 0) s += pow(prob(p, i), alpha);
  return s;
}

inline rational power_sum(const RationalDistribution& p, unsigned alpha) {
  rational s = 0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    rational pi(boost::multiprecision::cpp_int(p.count(i)), boost::multiprecision::cpp_int(p.S()));
    rational t = 1;
    for (unsigned k = 0; k < alpha; ++k) t *= pi;
    s += t;
  }
  return s;
}

inline real support_coverage(const RationalDistribution& p, std::uint64_t n_samples) {
  real s = 0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    s += 1 - pow(1 - prob(p, i), n_samples);
  }
  return s;
}

}  // namespace precise

inline nlohmann::json to_json(const RationalDistribution& p) {
  return {{"S", p.S()}, {"counts", p.counts()}};
}

inline RationalDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("S") || !j.contains("counts"))
    throw std::invalid_argument("distribution JSON needs fields S and counts");
  auto S = j.at("S").get<std::uint64_t>();
  auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
  return RationalDistribution(S, std::move(counts));
}

inline RationalDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed distribution file " + path + ": " + e.what());
  }
  return distribution_from_json(j);
}

}  // namespace qentropy

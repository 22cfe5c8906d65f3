#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "rng.hpp"

namespace qentropy {

using DiscreteLaw = std::vector<std::pair<double, double>>;  // (value, probability)

struct Charge {
  std::string oracle;
  std::string phase;
  std::uint64_t amount;
};

struct Moments {
  double mean;
  double variance;
};

inline Moments exact_expectation(const DiscreteLaw& law) {
  double m = 0;
  for (auto& [v, p] : law) m += p * v;
  double var = 0;
  for (auto& [v, p] : law) var += p * (v - m) * (v - m);
  return {m, var};
}

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A classical stand-in for a quantum algorithm with real output. If the exact output
// law is known and finite, large batches are drawn as multinomial counts over it.
class Subroutine {
 public:
  using Runner = std::function<double(Rng&)>;

  Subroutine(Runner run, std::optional<DiscreteLaw> law = std::nullopt,
             std::vector<Charge> charges = {{"subroutine", phase::mean_estimation, 1}})
      : run_(std::move(run)), charges_(std::move(charges)) {
    if (law) set_law(std::move(*law));
  }

  static Subroutine from_law(DiscreteLaw law, std::vector<Charge> charges = {
                                                  {"subroutine", phase::mean_estimation, 1}}) {
    auto cdf = std::make_shared<std::vector<double>>();
    auto vals = std::make_shared<std::vector<double>>();
    double c = 0;
    for (auto& [v, p] : law) {
      c += p;
      cdf->push_back(c);
      vals->push_back(v);
    }
    if (!cdf->empty()) cdf->back() = std::numeric_limits<double>::infinity();
    Runner r = [cdf, vals](Rng& rng) {
      double u = uniform01(rng);
      auto k = static_cast<std::size_t>(std::upper_bound(cdf->begin(), cdf->end(), u) - cdf->begin());
      return (*vals)[std::min(k, vals->size() - 1)];
    };
    return Subroutine(std::move(r), std::move(law), std::move(charges));
  }

  static Subroutine constant(double c, std::vector<Charge> charges = {
                                           {"subroutine", phase::mean_estimation, 1}}) {
    return Subroutine([c](Rng&) { return c; }, DiscreteLaw{{c, 1.0}}, std::move(charges));
  }

  double run(Rng& rng) const { return run_(rng); }
  const std::optional<DiscreteLaw>& law() const { return law_; }
  const std::vector<Charge>& charges() const { return charges_; }

  bool is_constant() const {
    if (!law_) return false;
    std::optional<double> seen;
    for (auto& [v, p] : *law_) {
      if (p <= 0) continue;
      if (seen && *seen != v) return false;
      seen = v;
    }
    return true;
  }

  Subroutine map(std::function<double(double)> f) const {
    auto inner = run_;
    Runner r = [inner, f](Rng& rng) { return f(inner(rng)); };
    std::optional<DiscreteLaw> l;
    if (law_) {
      l = *law_;
      for (auto& [v, p] : *l) v = f(v);
    }
    return Subroutine(std::move(r), std::move(l), charges_);
  }

  Subroutine scaled(double s) const {
    return map([s](double x) { return x * s; });
  }
  Subroutine shifted(double c) const {
    return map([c](double x) { return x + c; });
  }
  Subroutine positive_part() const {
    return map([](double x) { return std::max(x, 0.0); });
  }
  Subroutine negative_part() const {
    return map([](double x) { return std::min(x, 0.0); });
  }

  // Mean of N classical executions.
  double sample_mean(std::uint64_t N, Rng& rng) const {
    if (N == 0) throw std::invalid_argument("sample_mean needs N >= 1");
    if (law_ && N > 2 * law_->size()) {
      auto counts = multinomial(rng, N, probs_);
      double m = 0;
      const double Nd = static_cast<double>(N);
      for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k]) m += (static_cast<double>(counts[k]) / Nd) * (*law_)[k].first;
      return m;
    }
    double m = run_(rng);
    for (std::uint64_t k = 2; k <= N; ++k) m += (run_(rng) - m) / static_cast<double>(k);
    return m;
  }

 private:
  void set_law(DiscreteLaw law) {
    law_ = std::move(law);
    probs_.clear();
    for (auto& [v, p] : *law_) probs_.push_back(p);
  }

  Runner run_;
  std::optional<DiscreteLaw> law_;
  std::vector<double> probs_;
  std::vector<Charge> charges_;
};

// Hidden constants of the mean estimators.
struct MeanEstimationConstants {
  std::uint64_t c_q = 1;        // charged executions per unit of the cost formula
  double c_cl = 4;              // classical runs per group, in units of sigma^2/eps^2
  int groups = 3;               // median-of-means groups
  double c_second_moment = 8;           // second-moment estimator, runs in units of s/eps^2
  std::uint64_t pilot = 64;     // warm-up runs for the second moment
};

enum class MeanMode { contract, exact };

struct MeanEstimate {
  double value = 0;
  std::uint64_t charged_executions = 0;
  std::uint64_t classical_executions = 0;
  MeanMode mode = MeanMode::contract;
  bool out_of_contract = false;
  // Filled by the multiplicative estimator only.
  double m_tilde = std::numeric_limits<double>::quiet_NaN();
  double mu_minus = std::numeric_limits<double>::quiet_NaN();
  double mu_plus = std::numeric_limits<double>::quiet_NaN();
  double scale = std::numeric_limits<double>::quiet_NaN();
};

// x log^{3/2} x loglog x, with the logs clamped at 1 so small x stays sensible.
inline double query_cost(double x) {
  if (!(x > 0)) return 1.0;
  double l = std::max(std::log(x), 1.0);
  double ll = std::max(std::log(std::max(std::log(x), 1.0)), 1.0);
  return x * std::pow(l, 1.5) * ll;
}

inline std::uint64_t charged_executions(double x, const MeanEstimationConstants& c) {
  double L = std::ceil(query_cost(x));
  if (L >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
  return saturating_mul(c.c_q, std::max<std::uint64_t>(1, static_cast<std::uint64_t>(L)));
}

inline void charge_executions(QueryLedger* ledger, const Subroutine& sub, std::uint64_t count) {
  if (!ledger) return;
  for (auto& ch : sub.charges()) ledger->charge(ch.oracle, ch.phase, saturating_mul(ch.amount, count));
}

namespace detail {

inline std::uint64_t ceil_count(double x) {
  if (!(x > 0)) return 1;
  if (x >= 9.0e18) return std::numeric_limits<std::uint64_t>::max() / 2;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(x)));
}

inline double median_of(std::vector<double> v) {
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

struct CoreResult {
  double value;
  std::uint64_t runs;
};

inline CoreResult median_of_means(const Subroutine& A, double sigma, double epsilon, Rng& rng,
                                  const MeanEstimationConstants& c) {
  if (A.is_constant()) return {A.run(rng), 1};
  std::uint64_t per_group = ceil_count(c.c_cl * sigma * sigma / (epsilon * epsilon));
  std::vector<double> means;
  std::uint64_t runs = 0;
  for (int g = 0; g < std::max(1, c.groups); ++g) {
    means.push_back(A.sample_mean(per_group, rng));
    runs = saturating_add(runs, per_group);
  }
  return {median_of(std::move(means)), runs};
}

// |estimate - E[X]| < eps (sqrt(E[X^2]) + 1)^2 with high probability.
inline CoreResult second_moment_core(const Subroutine& A, double epsilon, Rng& rng,
                              const MeanEstimationConstants& c) {
  if (A.is_constant()) return {A.run(rng), 1};
  double s = A.map([](double x) { return x * x; }).sample_mean(c.pilot, rng);
  double s_safe = std::max(2 * s, epsilon);
  std::uint64_t N = std::max<std::uint64_t>(c.pilot, ceil_count(c.c_second_moment * s_safe / (epsilon * epsilon)));
  return {A.sample_mean(N, rng), saturating_add(N, c.pilot)};
}

}  // namespace detail

inline MeanEstimate qmean_additive(const Subroutine& A, double sigma, double epsilon, Rng& rng,
                                   QueryLedger* ledger = nullptr,
                                   const MeanEstimationConstants& c = {}) {
  if (!(epsilon > 0)) throw std::invalid_argument("qmean_additive needs epsilon > 0");
  if (!(sigma > 0) && !A.is_constant())
    throw ContractViolation("sigma <= 0 declared for a subroutine that is not constant");
  MeanEstimate r;
  r.out_of_contract = !(sigma > 0) || !(epsilon < 4 * sigma);
  r.charged_executions = r.out_of_contract ? c.c_q : charged_executions(sigma / epsilon, c);
  auto core = detail::median_of_means(A, std::max(sigma, 0.0), epsilon, rng, c);
  r.value = core.value;
  r.classical_executions = core.runs;
  charge_executions(ledger, A, r.charged_executions);
  if (ledger) ledger->add_classical(core.runs);
  return r;
}

inline MeanEstimate second_moment_estimate(const Subroutine& A, double epsilon, Rng& rng,
                                    QueryLedger* ledger = nullptr,
                                    const MeanEstimationConstants& c = {}) {
  if (!(epsilon > 0)) throw std::invalid_argument("second_moment_estimate needs epsilon > 0");
  MeanEstimate r;
  r.out_of_contract = !(epsilon < 0.5);
  r.charged_executions = charged_executions(1.0 / epsilon, c);
  auto core = detail::second_moment_core(A, epsilon, rng, c);
  r.value = core.value;
  r.classical_executions = core.runs;
  charge_executions(ledger, A, r.charged_executions);
  if (ledger) ledger->add_classical(core.runs);
  return r;
}

// Relative-error estimate given E[X] in [a, b] and var X <= sigma^2 E[X]^2.
inline MeanEstimate qmean_multiplicative(const Subroutine& A, double sigma, double a, double b,
                                         double epsilon, Rng& rng, QueryLedger* ledger = nullptr,
                                         const MeanEstimationConstants& c = {}) {
  if (!(a > 0)) throw std::invalid_argument("qmean_multiplicative needs a > 0");
  if (a > b) throw std::invalid_argument("qmean_multiplicative needs a <= b");
  if (!(epsilon > 0)) throw std::invalid_argument("qmean_multiplicative needs epsilon > 0");
  if (!(sigma > 0) && !A.is_constant())
    throw ContractViolation("sigma <= 0 declared for a subroutine that is not constant");
  const double sig = sigma > 0 ? sigma : 1.0;
  MeanEstimate r;
  r.out_of_contract = !(sigma > 0) || !(epsilon < 24 * sigma);
  r.scale = sig * b;

  const double raw = A.run(rng);
  r.m_tilde = raw / r.scale;
  const double scale = r.scale, mt = r.m_tilde;
  Subroutine B = A.map([scale, mt](double x) { return x / scale - mt; });
  Subroutine lower = B.negative_part().scaled(-1.0 / 6.0);
  Subroutine upper = B.positive_part().scaled(1.0 / 6.0);
  const double inner_eps = epsilon * a / (48 * sig * b);
  auto lo = detail::second_moment_core(lower, inner_eps, rng, c);
  auto hi = detail::second_moment_core(upper, inner_eps, rng, c);
  r.mu_minus = lo.value;
  r.mu_plus = hi.value;
  // Equal to scale * (m_tilde - 6 mu_minus + 6 mu_plus), but keeps a constant input exact.
  r.value = raw + r.scale * (6 * r.mu_plus - 6 * r.mu_minus);
  r.classical_executions = saturating_add(1, saturating_add(lo.runs, hi.runs));
  r.charged_executions = charged_executions(sig * b / (epsilon * a), c);
  charge_executions(ledger, A, r.charged_executions);
  if (ledger) ledger->add_classical(r.classical_executions);
  return r;
}

}  // namespace qentropy

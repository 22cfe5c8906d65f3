#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distinctness.hpp"
#include "distributions.hpp"
#include "mean_estimation.hpp"
#include "oracle.hpp"
#include "quantum_counting.hpp"
#include "report.hpp"
#include "rng.hpp"

namespace qentropy {

// Amplitude-estimation laws for one budget M, keyed by pre-image size.
class EstAmpCache {
 public:
  EstAmpCache(std::uint64_t M, std::uint64_t S) : M_(M), S_(S) {}

  const EstAmpDistribution& law(std::uint64_t m) {
    auto it = laws_.find(m);
    if (it != laws_.end()) return it->second;
    return laws_.emplace(m, estamp_distribution(static_cast<double>(m) / static_cast<double>(S_), M_))
        .first->second;
  }

  std::uint64_t M() const { return M_; }

 private:
  std::uint64_t M_;
  std::uint64_t S_;
  std::unordered_map<std::uint64_t, EstAmpDistribution> laws_;
};

using Payoff = std::function<double(double)>;

// Output law of "draw i ~ p, run EstAmp (or EstAmp') on p_i with budget M, return f".
// All p_i share the grid sin^2(l pi/M), so the mixture has M/2 + 1 atoms.
inline DiscreteLaw master_law(const RationalDistribution& p, std::uint64_t M, const Payoff& f,
                              bool prime) {
  EstAmpCache cache(M, p.S());
  std::vector<double> mass(M / 2 + 1, 0.0);
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    const auto& law = cache.law(p.count(i));
    const double w = p.p(i);
    for (std::size_t l = 0; l < law.outcomes.size(); ++l) mass[l] += w * law.outcomes[l].second;
  }
  DiscreteLaw out;
  out.reserve(mass.size());
  const double floor = estamp_prime_floor(M);
  for (std::uint64_t l = 0; l < mass.size(); ++l) {
    double v = grid_value(l, M);
    if (prime && v == 0.0) v = floor;
    out.emplace_back(f(v), mass[l]);
  }
  return out;
}

inline Subroutine master_subroutine(const DistributionOracle& oracle, std::uint64_t M,
                                    Payoff f, bool prime) {
  auto cache = std::make_shared<EstAmpCache>(M, oracle.S());
  const DistributionOracle* o = &oracle;
  const double floor = estamp_prime_floor(M);
  Subroutine::Runner run = [o, cache, f, prime, floor](Rng& rng) {
    auto i = o->simulate_draw(rng);
    double v = cache->law(o->source().count(i)).sample(rng);
    if (prime && v == 0.0) v = floor;
    return f(v);
  };
  std::vector<Charge> charges{{oracle.id(), phase::sample, 1}, {oracle.id(), phase::estamp, M}};
  return Subroutine(std::move(run), master_law(oracle.source(), M, f, prime), std::move(charges));
}

namespace detail {

inline void begin_report(EstimateReport& r, const std::string& algo, const DistributionOracle& o,
                         const EstimatorConfig& cfg) {
  r.algo = algo;
  r.n = o.n();
  r.S = o.S();
  r.epsilon = cfg.epsilon;
  r.seed = cfg.seed;
  r.mode = cfg.mode;
  if (cfg.mode == EstimatorMode::exact_expectation) r.flag("exact-expectation");
}

inline void end_report(EstimateReport& r, const DistributionOracle& o) {
  r.ledger = *o.ledger();
  r.score();
}

inline void require_epsilon(double eps, double max_eps, const std::string& who) {
  if (!(eps > 0) || eps > max_eps)
    throw std::invalid_argument(who + " needs 0 < eps <= " + std::to_string(max_eps));
}

inline void note_mean(EstimateReport& r, const MeanEstimate& m) {
  if (m.out_of_contract) r.flag("out-of-contract");
}

}  // namespace detail

inline double log_payoff(double v) { return -std::log(v); }

inline std::uint64_t shannon_budget(std::size_t n, double eps, int shift) {
  return pow2(ceil_log2(std::sqrt(static_cast<double>(n)) / eps) + shift);
}

inline EstimateReport estimate_shannon(const DistributionOracle& oracle, const EstimatorConfig& cfg,
                                       Rng& rng) {
  detail::require_epsilon(cfg.epsilon, 4.0, "shannon");
  EstimateReport r;
  detail::begin_report(r, "shannon", oracle, cfg);
  r.alpha = 1;
  const double n = static_cast<double>(oracle.n());
  const double eps = cfg.epsilon;
  const std::uint64_t M = std::max<std::uint64_t>(2, shannon_budget(oracle.n(), eps, cfg.shannon_m_shift));
  // p~ >= sin^2(pi/2M) >= 1/M^2 and M <= 2^{1+shift} sqrt(n)/eps
  const double sigma = std::log(std::ldexp(4.0, 2 * cfg.shannon_m_shift) * n / (eps * eps));
  auto sub = master_subroutine(oracle, M, log_payoff, true);
  r.truth = shannon_entropy(oracle.source());
  r.details["M"] = M;
  r.details["sigma"] = sigma;
  r.details["target"] = eps / 2;
  if (cfg.mode == EstimatorMode::exact_expectation) {
    r.estimate = exact_expectation(*sub.law()).mean;
  } else {
    auto m = qmean_additive(sub, sigma, eps / 2, rng, oracle.ledger().get(), cfg.mean);
    detail::note_mean(r, m);
    r.estimate = m.value;
    r.details["executions"] = m.charged_executions;
    r.details["classical_executions"] = m.classical_executions;
  }
  r.entropy_estimate = r.estimate;
  r.entropy_truth = r.truth;
  detail::end_report(r, oracle);
  return r;
}

inline void check_kl_promise(const RationalDistribution& p, const RationalDistribution& q, double f) {
  if (p.n() != q.n()) throw std::invalid_argument("kl needs p and q on the same n");
  for (std::size_t i = 0; i < p.n(); ++i) {
    long double lhs = static_cast<long double>(p.count(i)) * q.S();
    long double rhs = static_cast<long double>(f) * q.count(i) * p.S();
    if (lhs > rhs * (1 + 1e-15L))
      throw std::invalid_argument("promise violation: p_" + std::to_string(i) + " > f * q_" +
                                  std::to_string(i));
  }
}

inline EstimateReport estimate_kl(const DistributionOracle& op, const DistributionOracle& oq,
                                  double f, const EstimatorConfig& cfg, Rng& rng) {
  detail::require_epsilon(cfg.epsilon, 4.0, "kl");
  if (!(f >= 1)) throw std::invalid_argument("kl needs f >= 1");
  check_kl_promise(op.source(), oq.source(), f);
  if (op.id() == oq.id()) throw std::invalid_argument("kl needs distinct oracle ids");
  EstimateReport r;
  detail::begin_report(r, "kl", op, cfg);
  const double n = static_cast<double>(op.n());
  const double eps = cfg.epsilon;
  const std::uint64_t Mp = std::max<std::uint64_t>(2, pow2(ceil_log2(std::sqrt(n) / eps) + cfg.kl_m_shift));
  const std::uint64_t Mq = std::max<std::uint64_t>(2, pow2(ceil_log2(std::sqrt(n) * f / eps) + cfg.kl_m_shift));
  const double fp = estamp_prime_floor(Mp), fq = estamp_prime_floor(Mq);
  // |ln p~ - ln q~| <= -ln of the smaller floor
  const double sigma = -std::log(std::min(fp, fq));

  auto cp = std::make_shared<EstAmpCache>(Mp, op.S());
  auto cq = std::make_shared<EstAmpCache>(Mq, oq.S());
  const DistributionOracle* P = &op;
  const DistributionOracle* Q = &oq;
  Subroutine::Runner run = [P, Q, cp, cq, fp, fq](Rng& rng) {
    auto i = P->simulate_draw(rng);
    double vp = cp->law(P->source().count(i)).sample(rng);
    double vq = cq->law(Q->source().count(i)).sample(rng);
    if (vp == 0.0) vp = fp;
    if (vq == 0.0) vq = fq;
    return std::log(vp) - std::log(vq);
  };
  std::optional<DiscreteLaw> law;
  const std::size_t kp = Mp / 2 + 1, kq = Mq / 2 + 1;
  if (kp * kq <= cfg.max_product_law) {
    std::vector<double> mass(kp * kq, 0.0);
    for (std::size_t i = 0; i < op.n(); ++i) {
      if (op.source().count(i) == 0) continue;
      const auto& lp = cp->law(op.source().count(i));
      const auto& lq = cq->law(oq.source().count(i));
      const double w = op.probability(i);
      for (std::size_t a = 0; a < kp; ++a) {
        double wa = w * lp.outcomes[a].second;
        if (wa == 0) continue;
        for (std::size_t b = 0; b < kq; ++b) mass[a * kq + b] += wa * lq.outcomes[b].second;
      }
    }
    DiscreteLaw l;
    l.reserve(mass.size());
    for (std::size_t a = 0; a < kp; ++a) {
      double vp = a == 0 ? fp : grid_value(a, Mp);
      for (std::size_t b = 0; b < kq; ++b) {
        double vq = b == 0 ? fq : grid_value(b, Mq);
        l.emplace_back(std::log(vp) - std::log(vq), mass[a * kq + b]);
      }
    }
    law = std::move(l);
  }
  std::vector<Charge> charges{{op.id(), phase::sample, 1}, {op.id(), phase::estamp, Mp},
                              {oq.id(), phase::estamp, Mq}};
  Subroutine sub(std::move(run), std::move(law), std::move(charges));

  r.truth = kl_divergence(op.source(), oq.source());
  r.details["M_p"] = Mp;
  r.details["M_q"] = Mq;
  r.details["f"] = f;
  r.details["sigma"] = sigma;
  if (cfg.mode == EstimatorMode::exact_expectation) {
    if (!sub.law()) throw std::runtime_error("kl exact mode: product law too large");
    r.estimate = exact_expectation(*sub.law()).mean;
  } else {
    // Both oracles' charges land in the p-oracle's ledger, keyed by oracle id.
    auto m = qmean_additive(sub, sigma, eps / 2, rng, op.ledger().get(), cfg.mean);
    detail::note_mean(r, m);
    r.estimate = m.value;
    r.details["executions"] = m.charged_executions;
  }
  r.ledger = *op.ledger();
  if (oq.ledger() != op.ledger()) r.ledger.merge(*oq.ledger());
  r.score();
  return r;
}

// Exponent chain from alpha toward 1; the base-case exponent is last.
inline std::vector<double> annealing_schedule(double alpha, std::size_t n) {
  if (n < 3) throw std::invalid_argument("annealing schedule needs n >= 3");
  if (!(alpha > 0) || alpha == 1.0) throw std::invalid_argument("annealing schedule needs alpha > 0, alpha != 1");
  const double ln = std::log(static_cast<double>(n));
  std::vector<double> s{alpha};
  if (alpha > 1) {
    const double r = 1 + 1 / ln;
    while (s.back() >= r) s.push_back(s.back() / r);
  } else {
    const double r = 1 - 1 / ln;
    while (s.back() <= r) s.push_back(s.back() / r);
  }
  return s;
}

inline std::uint64_t median_repetitions(double delta, double c = 48) {
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("median amplification needs 0 < delta < 1");
  return static_cast<std::uint64_t>(std::ceil(c * std::log(1 / delta)));
}

struct MedianResult {
  double median;
  std::vector<double> values;
};

inline MedianResult median_amplify(const std::function<double(Rng&)>& run, double delta, Rng& rng,
                                   double c = 48) {
  std::uint64_t reps = median_repetitions(delta, c);
  MedianResult m;
  m.values.reserve(reps);
  for (std::uint64_t k = 0; k < reps; ++k) m.values.push_back(run(rng));
  m.median = detail::median_of(m.values);
  return m;
}

namespace detail {

struct PowerSumLevel {
  Subroutine sub;
  std::uint64_t M;
  double sigma;
};

inline PowerSumLevel power_sum_level(const DistributionOracle& o, double alpha, double eps,
                                     const EstimatorConfig& cfg) {
  const double n = static_cast<double>(o.n());
  const double beta = alpha - 1;
  if (alpha > 1) {
    double x = std::max(std::sqrt(n) / eps, std::numbers::e);
    std::uint64_t M = pow2(ceil_log2(x * std::log(x)) + 1 + cfg.renyi_large_m_shift);
    Payoff f = [beta](double v) { return v > 0 ? std::pow(v, beta) : 0.0; };
    return {master_subroutine(o, M, f, false), M, std::sqrt(5 * std::pow(n, 1 - 1 / alpha))};
  }
  double x = std::max(std::pow(n, 1 / (2 * alpha)) / eps, std::numbers::e);
  std::uint64_t M = pow2(ceil_log2(x * std::log(x)) + 1 + cfg.renyi_small_m_shift);
  Payoff f = [beta](double v) { return std::pow(v, beta); };
  return {master_subroutine(o, M, f, true), M, std::sqrt(2 * std::pow(n, 1 / alpha - 1))};
}

inline bool is_integer_order(double alpha) {
  return std::isfinite(alpha) && alpha >= 2 && std::floor(alpha) == alpha;
}

}  // namespace detail

// Non-integer power sums: bounds [a, b] are bootstrapped level by level up the annealing
// schedule, each level a median of multiplicative mean estimates.
inline EstimateReport estimate_power_sum_noninteger(const DistributionOracle& oracle, double alpha,
                                                    const EstimatorConfig& cfg, Rng& rng) {
  const bool large = alpha > 1;
  if (!(alpha > 0) || alpha == 1.0 || !std::isfinite(alpha))
    throw std::invalid_argument("non-integer power sum needs alpha in (0,1) or (1,inf)");
  if (large && std::floor(alpha) == alpha)
    throw std::invalid_argument("integer alpha goes to the collision-counting estimator");
  if (large) detail::require_epsilon(cfg.epsilon, 0.25, "power sum (alpha > 1)");
  else detail::require_epsilon(cfg.epsilon, 1.0, "power sum (alpha < 1)");
  if (!(cfg.delta > 0 && cfg.delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");

  EstimateReport r;
  detail::begin_report(r, large ? "renyi-large" : "renyi-small", oracle, cfg);
  r.alpha = alpha;
  r.delta = cfg.delta;
  r.error_mode = ErrorMode::multiplicative;
  const auto& dist = oracle.source();
  r.truth = power_sum(dist, alpha);
  r.entropy_truth = renyi_entropy(dist, alpha);

  const std::size_t n_eff = std::max<std::size_t>(dist.n(), 3);
  const double ln = std::log(static_cast<double>(n_eff));
  r.schedule = annealing_schedule(alpha, n_eff);

  if (cfg.mode == EstimatorMode::exact_expectation) {
    auto lvl = detail::power_sum_level(oracle, alpha, cfg.epsilon, cfg);
    auto mom = exact_expectation(*lvl.sub.law());
    r.estimate = mom.mean;
    r.details["M"] = lvl.M;
    r.details["sigma"] = lvl.sigma;
    r.details["relative_variance"] = mom.variance / (mom.mean * mom.mean);
  } else {
    const double inner_eps = large ? 0.25 : 0.5;
    const double inner_delta =
        std::min(0.5, 1.0 / (12 * ln * std::fabs(std::log(alpha))));
    nlohmann::json levels = nlohmann::json::array();
    double P = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = r.schedule.size(); k-- > 0;) {
      const double al = r.schedule[k];
      const bool last = k == 0;
      const double eps_l = last ? cfg.epsilon : inner_eps;
      const double delta_l = last ? cfg.delta : inner_delta;
      double a, b;
      if (k + 1 == r.schedule.size()) {
        a = large ? 1 / std::numbers::e : 1.0;
        b = large ? 1.0 : std::numbers::e;
      } else {
        double Pp = P;
        if (!(Pp > 0)) {
          r.flag("nonpositive-intermediate");
          Pp = std::numeric_limits<double>::min();
        }
        if (large) {
          const double e = 1 + 1 / ln;
          a = std::pow(0.75 * Pp, e) / std::numbers::e;
          b = std::pow(1.25 * Pp, e);
        } else {
          const double e = 1 - 1 / ln;
          a = std::pow(Pp / 2, e);
          b = std::numbers::e * std::pow(2 * Pp, e);
        }
      }
      auto lvl = detail::power_sum_level(oracle, al, eps_l, cfg);
      auto mom = exact_expectation(*lvl.sub.law());
      const double relvar = mom.variance / (mom.mean * mom.mean);
      if (relvar > lvl.sigma * lvl.sigma) r.flag("variance-bound-exceeded");
      const double Pl = power_sum(dist, al);
      if (Pl < a || Pl > b) r.flag("bounds-miss");
      bool ooc = false;
      auto med = median_amplify(
          [&](Rng& g) {
            auto m = qmean_multiplicative(lvl.sub, lvl.sigma, a, b, eps_l, g,
                                          oracle.ledger().get(), cfg.mean);
            ooc = ooc || m.out_of_contract;
            return m.value;
          },
          delta_l, rng, cfg.median_constant);
      if (ooc) r.flag("out-of-contract");
      P = med.median;
      levels.push_back({{"alpha", al},
                        {"eps", eps_l},
                        {"delta", delta_l},
                        {"a", a},
                        {"b", b},
                        {"M", lvl.M},
                        {"sigma", lvl.sigma},
                        {"repetitions", med.values.size()},
                        {"estimate", P},
                        {"truth", Pl}});
    }
    r.estimate = P;
    r.details["levels"] = levels;
  }
  if (r.estimate > 0) r.entropy_estimate = std::log(r.estimate) / (1 - alpha);
  detail::end_report(r, oracle);
  return r;
}

inline EstimateReport estimate_power_sum_large(const DistributionOracle& oracle, double alpha,
                                               const EstimatorConfig& cfg, Rng& rng) {
  if (!(alpha > 1)) throw std::invalid_argument("estimate_power_sum_large needs alpha > 1");
  return estimate_power_sum_noninteger(oracle, alpha, cfg, rng);
}

inline EstimateReport estimate_power_sum_small(const DistributionOracle& oracle, double alpha,
                                               const EstimatorConfig& cfg, Rng& rng) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("estimate_power_sum_small needs 0 < alpha < 1");
  return estimate_power_sum_noninteger(oracle, alpha, cfg, rng);
}

// Two loops: doubling until an alpha-collision shows up, then averaging collision counts.
inline EstimateReport estimate_power_sum_integer(const DistributionOracle& oracle, double alpha_real,
                                                 const EstimatorConfig& cfg, Rng& rng) {
  if (!detail::is_integer_order(alpha_real))
    throw std::invalid_argument("integer power sum needs an integer alpha >= 2");
  detail::require_epsilon(cfg.epsilon, 4.0, "integer power sum");
  const auto alpha = static_cast<unsigned>(alpha_real);
  EstimateReport r;
  detail::begin_report(r, "renyi-integer", oracle, cfg);
  r.alpha = alpha_real;
  r.error_mode = ErrorMode::multiplicative;
  const auto& dist = oracle.source();
  r.truth = power_sum(dist, alpha_real);
  r.entropy_truth = renyi_entropy(dist, alpha_real);
  if (cfg.mode == EstimatorMode::exact_expectation) r.flag("contract-mode-only");

  const double an = static_cast<double>(alpha) * static_cast<double>(dist.n());
  const int top = std::max(1, ceil_log2(an));
  const std::uint64_t l_max = pow2(top);
  const double fail = 1.0 / (10.0 * top);
  const int first = ceil_log2(static_cast<double>(alpha));  // shorter sequences cannot collide
  std::uint64_t l = l_max;
  bool found = false;
  for (int i = first; i <= top; ++i) {
    const std::uint64_t len = pow2(i);
    r.schedule.push_back(static_cast<double>(len));
    auto seq = oracle.draw_sequence(len, rng);
    if (k_distinctness(seq, alpha, fail, cfg.integer_cost, rng, &oracle)) {
      l = len;
      found = true;
      break;
    }
  }
  if (!found) r.flag("doubling-loop-exhausted");

  const double eps = cfg.epsilon;
  const std::uint64_t reps = static_cast<std::uint64_t>(std::ceil(cfg.integer_K / (eps * eps)));
  const double per_fail = std::min(0.5, eps * eps / static_cast<double>(l));
  std::uint64_t per_seq = cfg.integer_cost.charge(alpha, l, per_fail);
  if (!cfg.integer_cost.uses_failure_probability()) {
    double lg = std::max(std::log(static_cast<double>(l) / (eps * eps)), 1.0);
    per_seq = static_cast<std::uint64_t>(std::ceil(static_cast<double>(per_seq) * lg));
  }
  const double norm = binomial_coefficient_real(static_cast<double>(l), alpha);
  double sum = 0, sum_sq = 0;
  for (std::uint64_t k = 0; k < reps; ++k) {
    auto seq = oracle.draw_sequence(l, rng);
    double c = static_cast<double>(count_alpha_collisions(seq, alpha).value);
    sum += c;
    sum_sq += c * c;
    oracle.charge(phase::collision_counting, per_seq);
  }
  const double mean_c = sum / static_cast<double>(reps);
  const double var_c = reps > 1 ? (sum_sq - reps * mean_c * mean_c) / static_cast<double>(reps - 1) : 0;
  if (mean_c > 0 && var_c / (mean_c * mean_c) > cfg.collision_variance_flag)
    r.flag("collision-variance-high");
  r.estimate = sum / (static_cast<double>(reps) * norm);
  if (r.estimate > 0) r.entropy_estimate = std::log(r.estimate) / (1 - alpha_real);
  r.details["l"] = l;
  r.details["sequences"] = reps;
  r.details["per_sequence_charge"] = per_seq;
  r.details["nu"] = distinctness_exponent(alpha);
  r.details["collision_relative_variance"] = mean_c > 0 ? var_c / (mean_c * mean_c) : 0.0;
  detail::end_report(r, oracle);
  return r;
}

inline EstimateReport estimate_min_entropy(const DistributionOracle& oracle, const EstimatorConfig& cfg,
                                           Rng& rng) {
  detail::require_epsilon(cfg.epsilon, 1.0, "min-entropy");
  const double eps = cfg.epsilon;
  EstimateReport r;
  detail::begin_report(r, "min-entropy", oracle, cfg);
  r.alpha = std::numeric_limits<double>::infinity();
  r.error_mode = ErrorMode::multiplicative;
  const auto& dist = oracle.source();
  r.truth = max_probability(dist);
  r.entropy_truth = -std::log(r.truth);
  if (cfg.mode == EstimatorMode::exact_expectation) r.flag("contract-mode-only");

  const double n = static_cast<double>(dist.n());
  const double ln = std::log(std::max(n, 2.0));
  const auto k = static_cast<unsigned>(std::ceil(16 * ln / (eps * eps)));
  const double fail = eps / (2 * ln);
  double lambda = 1;
  std::optional<double> out;
  while (lambda <= n) {
    r.schedule.push_back(lambda);
    auto count = poisson(rng, 16 * lambda * ln / (eps * eps));
    auto seq = oracle.draw_sequence(count, rng);
    auto hit = k_distinctness(seq, std::max(2u, k), fail, cfg.min_entropy_cost, rng, &oracle);
    if (hit) {
      auto est = estamp_multiplicative(oracle, *hit, eps, 1.0 / n, rng);
      r.details["element"] = *hit;
      r.details["M"] = est.M;
      out = est.value;
      break;
    }
    lambda *= std::sqrt(1 + eps);
  }
  if (!out) {
    r.flag("fallback-uniform");
    out = 1.0 / n;
  }
  r.estimate = *out;
  r.details["k"] = k;
  if (r.estimate > 0) r.entropy_estimate = -std::log(r.estimate);
  detail::end_report(r, oracle);
  return r;
}

inline double coverage_payoff(double v, double N) {
  if (v <= 0) return N;
  if (v >= 1) return 1.0;
  return -std::expm1(N * std::log1p(-v)) / v;
}

inline EstimateReport estimate_support_coverage(const DistributionOracle& oracle, std::uint64_t n_samples,
                                                const EstimatorConfig& cfg, Rng& rng) {
  detail::require_epsilon(cfg.epsilon, 4.0, "support coverage");
  if (n_samples == 0) throw std::invalid_argument("support coverage needs n_samples >= 1");
  EstimateReport r;
  detail::begin_report(r, "coverage", oracle, cfg);
  const double N = static_cast<double>(n_samples);
  const double eps = cfg.epsilon;
  const std::uint64_t M =
      std::max<std::uint64_t>(2, pow2(ceil_log2(std::sqrt(N / eps)) + cfg.coverage_m_shift));
  Payoff f = [N](double v) { return coverage_payoff(v, N); };
  auto sub = master_subroutine(oracle, M, f, false);
  r.truth = support_coverage(oracle.source(), n_samples) / N;
  r.details["M"] = M;
  r.details["n_samples"] = n_samples;
  if (cfg.mode == EstimatorMode::exact_expectation) {
    r.estimate = exact_expectation(*sub.law()).mean / N;
  } else {
    auto m = qmean_additive(sub, N, eps * N / 2, rng, oracle.ledger().get(), cfg.mean);
    detail::note_mean(r, m);
    r.estimate = m.value / N;
    r.details["executions"] = m.charged_executions;
  }
  detail::end_report(r, oracle);
  return r;
}

inline void check_support_promise(const RationalDistribution& p, std::uint64_t m) {
  for (std::size_t i = 0; i < p.n(); ++i) {
    auto c = p.count(i);
    if (c != 0 && static_cast<long double>(c) * m < static_cast<long double>(p.S()))
      throw std::invalid_argument("promise violation: 0 < p_" + std::to_string(i) + " < 1/m");
  }
}

inline EstimateReport estimate_support_size(const DistributionOracle& oracle, std::uint64_t m,
                                            const EstimatorConfig& cfg, Rng& rng) {
  detail::require_epsilon(cfg.epsilon, 1.0, "support size");
  if (m == 0) throw std::invalid_argument("support size needs m >= 1");
  check_support_promise(oracle.source(), m);
  const double eps = cfg.epsilon;
  const double lg = std::log(2 / eps);
  const auto N = static_cast<std::uint64_t>(std::ceil(static_cast<double>(m) * lg));
  EstimatorConfig inner = cfg;
  inner.epsilon = eps / (2 * lg);
  auto cov = estimate_support_coverage(oracle, std::max<std::uint64_t>(N, 1), inner, rng);
  EstimateReport r;
  detail::begin_report(r, "support-size", oracle, cfg);
  r.alpha = 0;
  r.flags = cov.flags;
  const double S_tilde = cov.estimate * static_cast<double>(N);
  r.estimate = std::ceil(S_tilde) / static_cast<double>(m);
  r.truth = static_cast<double>(oracle.source().support_size()) / static_cast<double>(m);
  r.details = cov.details;
  r.details["N"] = N;
  r.details["inner_eps"] = inner.epsilon;
  r.details["m"] = m;
  if (r.estimate > 0) r.entropy_estimate = std::log(std::ceil(S_tilde));
  r.entropy_truth = std::log(static_cast<double>(oracle.source().support_size()));
  detail::end_report(r, oracle);
  return r;
}

}  // namespace qentropy

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "distributions.hpp"
#include "estimators.hpp"
#include "instances.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "rng.hpp"

namespace qentropy {

// One estimator run, fully described.
struct EstimateRequest {
  std::string algo = "shannon";  // shannon kl renyi min-entropy coverage support-size plugin
  std::string dist = "uniform:16";
  std::string dist_q;            // kl only
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double f = std::numeric_limits<double>::quiet_NaN();  // kl ratio bound; derived when absent
  std::uint64_t n_samples = 0;   // coverage: default n; plugin: required
  std::uint64_t m = 0;           // support size floor; derived when absent
  std::string measure;           // plugin only
  EstimatorConfig cfg;
};

inline void apply_constants(EstimatorConfig& c, const nlohmann::json& j) {
  for (auto& [k, v] : j.items()) {
    if (k == "c_q") c.mean.c_q = v.get<std::uint64_t>();
    else if (k == "c_cl") c.mean.c_cl = v.get<double>();
    else if (k == "groups") c.mean.groups = v.get<int>();
    else if (k == "c_second_moment") c.mean.c_second_moment = v.get<double>();
    else if (k == "pilot") c.mean.pilot = v.get<std::uint64_t>();
    else if (k == "shannon_m_shift") c.shannon_m_shift = v.get<int>();
    else if (k == "kl_m_shift") c.kl_m_shift = v.get<int>();
    else if (k == "renyi_large_m_shift") c.renyi_large_m_shift = v.get<int>();
    else if (k == "renyi_small_m_shift") c.renyi_small_m_shift = v.get<int>();
    else if (k == "coverage_m_shift") c.coverage_m_shift = v.get<int>();
    else if (k == "median_constant") c.median_constant = v.get<double>();
    else if (k == "integer_K") c.integer_K = v.get<double>();
    else if (k == "distinctness_cost") c.integer_cost.preset = parse_cost_preset(v.get<std::string>());
    else if (k == "distinctness_c") c.integer_cost.c = v.get<double>();
    else if (k == "min_entropy_cost") c.min_entropy_cost.preset = parse_cost_preset(v.get<std::string>());
    else if (k == "min_entropy_c") c.min_entropy_cost.c = v.get<double>();
    else if (k == "collision_variance_flag") c.collision_variance_flag = v.get<double>();
    else throw std::invalid_argument("unknown constant '" + k + "'");
  }
}

inline EstimatorMode parse_mode(const std::string& s) {
  if (s == "contract") return EstimatorMode::contract;
  if (s == "exact" || s == "exact-expectation") return EstimatorMode::exact_expectation;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

inline double parse_alpha(const nlohmann::json& v) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    return std::stod(s);
  }
  return v.get<double>();
}

namespace detail {

inline double smallest_ratio_bound(const RationalDistribution& p, const RationalDistribution& q) {
  double f = 1;
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (p.count(i) == 0) continue;
    if (q.count(i) == 0) throw std::invalid_argument("promise violation: q_i = 0 < p_i");
    f = std::max(f, p.p(i) / q.p(i));
  }
  return f;
}

inline std::uint64_t smallest_floor_m(const RationalDistribution& p) {
  std::uint64_t mn = p.S();
  for (auto c : p.counts())
    if (c > 0) mn = std::min(mn, c);
  return (p.S() + mn - 1) / mn;
}

}  // namespace detail

inline EstimateReport plugin_baseline(const DistributionOracle& oracle, const std::string& measure,
                                      std::uint64_t n_samples, double alpha, Rng& rng,
                                      const DistributionOracle* q = nullptr,
                                      std::uint64_t coverage_n = 0) {
  if (n_samples == 0) throw std::invalid_argument("plugin baseline needs n_samples >= 1");
  const auto& dist = oracle.source();
  std::vector<std::uint64_t> hist(dist.n(), 0);
  for (std::uint64_t k = 0; k < n_samples; ++k) ++hist[oracle.simulate_draw(rng)];
  oracle.ledger()->add_classical(n_samples);
  auto emp = RationalDistribution(n_samples, hist);

  EstimateReport r;
  r.algo = "plugin-" + measure;
  r.n = dist.n();
  r.S = dist.S();
  r.epsilon = std::numeric_limits<double>::quiet_NaN();
  r.details["n_samples"] = n_samples;
  if (measure == "shannon") {
    r.estimate = shannon_entropy(emp);
    r.truth = shannon_entropy(dist);
  } else if (measure == "renyi") {
    r.alpha = alpha;
    r.estimate = renyi_entropy(emp, alpha);
    r.truth = renyi_entropy(dist, alpha);
  } else if (measure == "min-entropy") {
    r.estimate = renyi_entropy(emp, std::numeric_limits<double>::infinity());
    r.truth = renyi_entropy(dist, std::numeric_limits<double>::infinity());
  } else if (measure == "coverage") {
    auto N = coverage_n ? coverage_n : dist.n();
    r.estimate = support_coverage(emp, N) / static_cast<double>(N);
    r.truth = support_coverage(dist, N) / static_cast<double>(N);
  } else if (measure == "support") {
    r.estimate = static_cast<double>(emp.support_size());
    r.truth = static_cast<double>(dist.support_size());
  } else if (measure == "kl") {
    if (!q) throw std::invalid_argument("plugin kl needs a q oracle");
    std::vector<std::uint64_t> hq(dist.n(), 0);
    for (std::uint64_t k = 0; k < n_samples; ++k) ++hq[q->simulate_draw(rng)];
    q->ledger()->add_classical(n_samples);
    auto empq = RationalDistribution(n_samples, hq);
    r.truth = kl_divergence(dist, q->source());
    try {
      r.estimate = kl_divergence(emp, empq);
    } catch (const std::domain_error&) {
      r.estimate = std::numeric_limits<double>::quiet_NaN();
      r.flag("undefined");
    }
  } else {
    throw std::invalid_argument("unknown plugin measure '" + measure + "'");
  }
  r.error = std::fabs(r.estimate - r.truth);
  r.success = std::isfinite(r.estimate);
  r.ledger = *oracle.ledger();
  if (q && q->ledger() != oracle.ledger()) r.ledger.merge(*q->ledger());
  return r;
}

inline EstimateReport run_estimate(const EstimateRequest& req) {
  const auto& cfg = req.cfg;
  auto p = generate(req.dist, derive_seed(cfg.seed, 1));
  auto ledger = std::make_shared<QueryLedger>();
  auto op = build_oracle(p, derive_seed(cfg.seed, 2), "p", ledger);
  Rng rng(derive_seed(cfg.seed, 3));

  EstimateReport r;
  const std::string& a = req.algo;
  if (a == "shannon") {
    r = estimate_shannon(op, cfg, rng);
  } else if (a == "kl") {
    if (req.dist_q.empty()) throw std::invalid_argument("kl needs a q distribution");
    auto q = generate(req.dist_q, derive_seed(cfg.seed, 4));
    auto oq = build_oracle(q, derive_seed(cfg.seed, 5), "q", ledger);
    double f = std::isnan(req.f) ? detail::smallest_ratio_bound(p, q) : req.f;
    r = estimate_kl(op, oq, f, cfg, rng);
  } else if (a == "renyi") {
    double al = req.alpha;
    if (std::isnan(al)) throw std::invalid_argument("renyi needs --alpha");
    if (al == 1.0) r = estimate_shannon(op, cfg, rng);
    else if (std::isinf(al)) r = estimate_min_entropy(op, cfg, rng);
    else if (al == 0.0) r = estimate_support_size(op, req.m ? req.m : detail::smallest_floor_m(p), cfg, rng);
    else if (detail::is_integer_order(al)) r = estimate_power_sum_integer(op, al, cfg, rng);
    else r = estimate_power_sum_noninteger(op, al, cfg, rng);
  } else if (a == "min-entropy") {
    r = estimate_min_entropy(op, cfg, rng);
  } else if (a == "coverage") {
    r = estimate_support_coverage(op, req.n_samples ? req.n_samples : p.n(), cfg, rng);
  } else if (a == "support-size") {
    r = estimate_support_size(op, req.m ? req.m : detail::smallest_floor_m(p), cfg, rng);
  } else if (a == "plugin") {
    std::optional<DistributionOracle> oq;
    if (!req.dist_q.empty())
      oq.emplace(build_oracle(generate(req.dist_q, derive_seed(cfg.seed, 4)), derive_seed(cfg.seed, 5), "q", ledger));
    r = plugin_baseline(op, req.measure.empty() ? "shannon" : req.measure,
                        req.n_samples ? req.n_samples : 100000, req.alpha, rng,
                        oq ? &*oq : nullptr, req.m);
  } else {
    throw std::invalid_argument("unknown algorithm '" + a + "'");
  }
  r.seed = cfg.seed;
  if (std::isnan(r.delta) && !std::isnan(cfg.delta) && a != "plugin") r.delta = cfg.delta;
  return r;
}

// ---- experiments ----------------------------------------------------------

struct ExperimentCell {
  EstimateRequest request;
  std::uint64_t trials = 1;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::uint64_t trials = 10;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool wall_clock = false;
  std::vector<ExperimentCell> cells;
};

inline EstimateRequest request_from_json(const nlohmann::json& j, EstimateRequest base = {}) {
  for (auto& [k, v] : j.items()) {
    if (k == "algo") base.algo = v.get<std::string>();
    else if (k == "dist") base.dist = v.get<std::string>();
    else if (k == "q" || k == "dist_q") base.dist_q = v.get<std::string>();
    else if (k == "alpha") base.alpha = parse_alpha(v);
    else if (k == "f") base.f = v.get<double>();
    else if (k == "n_samples") base.n_samples = v.get<std::uint64_t>();
    else if (k == "m") base.m = v.get<std::uint64_t>();
    else if (k == "measure") base.measure = v.get<std::string>();
    else if (k == "eps") base.cfg.epsilon = v.get<double>();
    else if (k == "delta") base.cfg.delta = v.get<double>();
    else if (k == "mode") base.cfg.mode = parse_mode(v.get<std::string>());
    else if (k == "constants") apply_constants(base.cfg, v);
    else if (k == "trials") continue;
    else throw std::invalid_argument("unknown cell field '" + k + "'");
  }
  return base;
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  EstimateRequest defaults;
  for (auto& [k, v] : j.items()) {
    if (k == "master_seed") c.master_seed = v.get<std::uint64_t>();
    else if (k == "trials") c.trials = v.get<std::uint64_t>();
    else if (k == "threads") c.threads = v.get<unsigned>();
    else if (k == "wall_clock") c.wall_clock = v.get<bool>();
    else if (k == "defaults" || k == "cells" || k == "grid") continue;
    else throw std::invalid_argument("unknown experiment field '" + k + "'");
  }
  if (j.contains("defaults")) defaults = request_from_json(j.at("defaults"), defaults);
  if (j.contains("cells")) {
    for (auto& cell : j.at("cells")) {
      ExperimentCell ec{request_from_json(cell, defaults), c.trials};
      if (cell.contains("trials")) ec.trials = cell.at("trials").get<std::uint64_t>();
      c.cells.push_back(ec);
    }
  }
  if (j.contains("grid")) {
    // Cartesian product over the listed axes, first axis slowest.
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
    for (auto& [k, v] : j.at("grid").items()) {
      if (!v.is_array() || v.empty()) throw std::invalid_argument("grid axis '" + k + "' must be a non-empty array");
      axes.emplace_back(k, std::vector<nlohmann::json>(v.begin(), v.end()));
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    bool done = axes.empty();
    while (!done) {
      nlohmann::json cell = nlohmann::json::object();
      for (std::size_t a = 0; a < axes.size(); ++a) cell[axes[a].first] = axes[a].second[idx[a]];
      c.cells.push_back({request_from_json(cell, defaults), c.trials});
      done = true;
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].second.size()) { done = false; break; }
        idx[a] = 0;
      }
    }
  }
  if (c.cells.empty()) throw std::invalid_argument("experiment has no cells");
  return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment config " + path);
  nlohmann::json j;
  in >> j;
  return experiment_from_json(j);
}

inline const char* csv_header() {
  return "algo,alpha,n,S,eps,delta,seed,estimate,truth,error_mode,abs_or_rel_err,success,"
         "q_queries_p,q_queries_q,classical_execs,wall_ms";
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct TrialRow {
  EstimateReport report;
  double wall_ms = 0;
  std::string error;
};

inline std::string csv_row(const TrialRow& t) {
  const auto& r = t.report;
  std::ostringstream os;
  os << r.algo << ',' << csv_number(r.alpha) << ',' << r.n << ',' << r.S << ','
     << csv_number(r.epsilon) << ',' << csv_number(r.delta) << ',' << r.seed << ','
     << csv_number(r.estimate) << ',' << csv_number(r.truth) << ',' << to_string(r.error_mode) << ','
     << csv_number(r.error) << ',' << (r.success ? 1 : 0) << ',' << r.queries("p") << ','
     << r.queries("q") << ',' << r.ledger.classical_executions() << ',' << csv_number(t.wall_ms);
  return os.str();
}

inline std::vector<TrialRow> run_experiment(const ExperimentConfig& c) {
  struct Job {
    std::size_t cell;
    std::uint64_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < c.cells.size(); ++i)
    for (std::uint64_t t = 0; t < c.cells[i].trials; ++t) jobs.push_back({i, t});
  std::vector<TrialRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      auto req = c.cells[jobs[k].cell].request;
      req.cfg.seed = derive_seed(c.master_seed, jobs[k].cell, jobs[k].trial);
      auto t0 = std::chrono::steady_clock::now();
      try {
        rows[k].report = run_estimate(req);
      } catch (const std::exception& e) {
        rows[k].error = e.what();
      }
      if (c.wall_clock)
        rows[k].wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  unsigned threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& r : rows)
    if (!r.error.empty()) throw std::runtime_error("trial failed: " + r.error);
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<TrialRow>& rows) {
  os << csv_header() << '\n';
  for (auto& r : rows) os << csv_row(r) << '\n';
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = x.size();
  if (k < 2 || y.size() != k) throw std::invalid_argument("slope needs >= 2 matching points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace qentropy

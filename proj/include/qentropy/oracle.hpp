#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "distributions.hpp"
#include "rng.hpp"

namespace qentropy {

namespace phase {
inline const std::string sample = "sample";
inline const std::string estamp = "estamp";
inline const std::string distinctness = "distinctness";
inline const std::string collision_counting = "collision-counting";
inline const std::string mean_estimation = "mean-estimation";
}  // namespace phase

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b
             ? std::numeric_limits<std::uint64_t>::max()
             : a + b;
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > std::numeric_limits<std::uint64_t>::max() / b
             ? std::numeric_limits<std::uint64_t>::max()
             : a * b;
}

// Charged quantum queries keyed by (oracle id, phase). Only ever grows.
class QueryLedger {
 public:
  using Key = std::pair<std::string, std::string>;

  void charge(const std::string& oracle, const std::string& phase_label, std::uint64_t amount) {
    auto& slot = records_[{oracle, phase_label}];
    slot = saturating_add(slot, amount);
  }

  void add_classical(std::uint64_t executions) {
    classical_ = saturating_add(classical_, executions);
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto& [k, v] : records_) t = saturating_add(t, v);
    return t;
  }

  std::uint64_t oracle_total(const std::string& oracle) const {
    std::uint64_t t = 0;
    for (auto& [k, v] : records_)
      if (k.first == oracle) t = saturating_add(t, v);
    return t;
  }

  std::uint64_t phase_total(const std::string& phase_label) const {
    std::uint64_t t = 0;
    for (auto& [k, v] : records_)
      if (k.second == phase_label) t = saturating_add(t, v);
    return t;
  }

  std::uint64_t get(const std::string& oracle, const std::string& phase_label) const {
    auto it = records_.find({oracle, phase_label});
    return it == records_.end() ? 0 : it->second;
  }

  std::uint64_t classical_executions() const { return classical_; }
  const std::map<Key, std::uint64_t>& records() const { return records_; }

  void merge(const QueryLedger& other) {
    for (auto& [k, v] : other.records_) charge(k.first, k.second, v);
    add_classical(other.classical_);
  }

  nlohmann::json to_json() const {
    nlohmann::json per_oracle = nlohmann::json::object();
    for (auto& [k, v] : records_) per_oracle[k.first][k.second] = v;
    nlohmann::json j;
    j["quantum_queries"] = total();
    j["phases"] = per_oracle;
    j["classical_executions"] = classical_;
    return j;
  }

 private:
  std::map<Key, std::uint64_t> records_;
  std::uint64_t classical_ = 0;
};

using LedgerPtr = std::shared_ptr<QueryLedger>;

// Table O_p : [S] -> [n] with |{s : O_p(s) = i}| = m_i.
class DistributionOracle {
 public:
  DistributionOracle(RationalDistribution source, std::vector<std::uint32_t> table,
                     std::string id, LedgerPtr ledger)
      : source_(std::move(source)), table_(std::move(table)), id_(std::move(id)),
        ledger_(ledger ? std::move(ledger) : std::make_shared<QueryLedger>()) {}

  const RationalDistribution& source() const { return source_; }
  const std::vector<std::uint32_t>& table() const { return table_; }
  const std::string& id() const { return id_; }
  const LedgerPtr& ledger() const { return ledger_; }
  void set_ledger(LedgerPtr l) { ledger_ = std::move(l); }

  std::size_t n() const { return source_.n(); }
  std::uint64_t S() const { return table_.size(); }

  // One quantum query.
  std::uint32_t sample(Rng& rng) const {
    ledger_->charge(id_, phase::sample, 1);
    return simulate_draw(rng);
  }

  // Draw without touching the ledger; callers charge a cost model instead.
  std::uint32_t simulate_draw(Rng& rng) const {
    return table_[uniform_below(rng, table_.size())];
  }

  std::vector<std::uint32_t> draw_sequence(std::uint64_t len, Rng& rng) const {
    std::vector<std::uint32_t> out(len);
    for (auto& x : out) x = simulate_draw(rng);
    return out;
  }

  boost::rational<std::int64_t> preimage_fraction(std::size_t i) const {
    return source_.exact(i);
  }

  double probability(std::size_t i) const { return source_.p(i); }

  void charge(const std::string& phase_label, std::uint64_t amount) const {
    ledger_->charge(id_, phase_label, amount);
  }

  // O'(s + S*l) = O(s) for l < k.
  DistributionOracle replicate(std::uint64_t k) const {
    std::vector<std::uint32_t> t;
    t.reserve(table_.size() * k);
    for (std::uint64_t r = 0; r < k; ++r) t.insert(t.end(), table_.begin(), table_.end());
    std::vector<std::uint64_t> counts(source_.counts());
    for (auto& c : counts) c *= k;
    return DistributionOracle(RationalDistribution(source_.S() * k, std::move(counts)),
                              std::move(t), id_, ledger_);
  }

 private:
  RationalDistribution source_;
  std::vector<std::uint32_t> table_;
  std::string id_;
  LedgerPtr ledger_;
};

inline DistributionOracle build_oracle(const RationalDistribution& p, std::uint64_t shuffle_seed,
                                       std::string id = "p", LedgerPtr ledger = nullptr) {
  std::vector<std::uint32_t> table;
  table.reserve(p.S());
  for (std::size_t i = 0; i < p.n(); ++i)
    table.insert(table.end(), p.count(i), static_cast<std::uint32_t>(i));
  Rng rng(shuffle_seed);
  std::shuffle(table.begin(), table.end(), rng);
  return DistributionOracle(p, std::move(table), std::move(id), std::move(ledger));
}

}  // namespace qentropy

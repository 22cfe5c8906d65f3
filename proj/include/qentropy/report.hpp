#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "distinctness.hpp"
#include "mean_estimation.hpp"
#include "oracle.hpp"

namespace qentropy {

enum class ErrorMode { additive, multiplicative };
enum class EstimatorMode { contract, exact_expectation };

inline std::string to_string(ErrorMode m) {
  return m == ErrorMode::additive ? "additive" : "multiplicative";
}
inline std::string to_string(EstimatorMode m) {
  return m == EstimatorMode::contract ? "contract" : "exact-expectation";
}

// Every hidden constant of the estimators lives here.
struct EstimatorConfig {
  double epsilon = 0.25;
  double delta = 0.1;
  EstimatorMode mode = EstimatorMode::contract;
  std::uint64_t seed = 1;

  MeanEstimationConstants mean{};

  // Extra doublings of the amplitude-estimation budget on top of 2^{ceil log2 (...)}.
  int shannon_m_shift = 1;
  int kl_m_shift = 1;
  int renyi_large_m_shift = 2;
  int renyi_small_m_shift = 0;
  int coverage_m_shift = 2;

  double median_constant = 48;  // repetitions = ceil(median_constant * ln(1/delta))
  double integer_K = 24;        // sequences in the counting loop = ceil(K / eps^2)
  DistinctnessCostModel integer_cost{CostPreset::belovs, 1.0};
  DistinctnessCostModel min_entropy_cost{CostPreset::flat34, 1.0};
  double collision_variance_flag = 24;  // flag when Var[C]/E[C]^2 exceeds this
  std::size_t max_product_law = 200000;
};

struct EstimateReport {
  std::string algo;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  std::uint64_t S = 0;
  double epsilon = 0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  EstimatorMode mode = EstimatorMode::contract;

  double estimate = std::numeric_limits<double>::quiet_NaN();
  double truth = std::numeric_limits<double>::quiet_NaN();
  ErrorMode error_mode = ErrorMode::additive;
  double error = std::numeric_limits<double>::quiet_NaN();
  bool success = false;

  // For power-sum and max-probability estimators: the entropy they imply.
  double entropy_estimate = std::numeric_limits<double>::quiet_NaN();
  double entropy_truth = std::numeric_limits<double>::quiet_NaN();

  QueryLedger ledger;
  std::vector<double> schedule;
  std::vector<std::string> flags;
  nlohmann::json details = nlohmann::json::object();

  void score() {
    if (error_mode == ErrorMode::additive) {
      error = std::fabs(estimate - truth);
    } else {
      error = truth != 0 ? std::fabs(estimate - truth) / std::fabs(truth)
                         : std::numeric_limits<double>::infinity();
    }
    success = std::isfinite(estimate) && error <= epsilon;
  }

  void flag(const std::string& f) {
    for (auto& g : flags)
      if (g == f) return;
    flags.push_back(f);
  }

  bool has_flag(const std::string& f) const {
    for (auto& g : flags)
      if (g == f) return true;
    return false;
  }

  std::uint64_t queries(const std::string& oracle) const { return ledger.oracle_total(oracle); }

  nlohmann::json to_json() const {
    auto num = [](double x) -> nlohmann::json {
      if (std::isfinite(x)) return x;
      return nullptr;
    };
    nlohmann::json j;
    j["algo"] = algo;
    j["alpha"] = num(alpha);
    j["n"] = n;
    j["S"] = S;
    j["eps"] = epsilon;
    j["delta"] = num(delta);
    j["seed"] = seed;
    j["mode"] = to_string(mode);
    j["estimate"] = num(estimate);
    j["truth"] = num(truth);
    j["error_mode"] = to_string(error_mode);
    j["error"] = num(error);
    j["success"] = success;
    if (std::isfinite(entropy_estimate) || std::isfinite(entropy_truth)) {
      j["entropy_estimate"] = num(entropy_estimate);
      j["entropy_truth"] = num(entropy_truth);
    }
    j["ledger"] = ledger.to_json();
    if (!schedule.empty()) j["schedule"] = schedule;
    j["flags"] = flags;
    j["details"] = details;
    return j;
  }
};

}  // namespace qentropy

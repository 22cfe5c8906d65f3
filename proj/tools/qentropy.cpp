// qentropy: single estimates, batch experiments, invariant suites, exact values.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qentropy/qentropy.hpp"

namespace {

using namespace qentropy;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("QENTROPY_SEED")) return std::strtoull(s, nullptr, 10);
  return 1;
}

double parse_alpha_flag(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

// Entropy-valued fields converted from nats to bits when asked.
void to_bits(nlohmann::json& j, bool entropy_valued) {
  const double k = 1 / std::log(2.0);
  auto conv = [&](const char* key) {
    if (j.contains(key) && j[key].is_number()) j[key] = j[key].get<double>() * k;
  };
  if (entropy_valued) {
    conv("estimate");
    conv("truth");
    conv("error");
  }
  conv("entropy_estimate");
  conv("entropy_truth");
  j["units"] = "bits";
}

bool is_entropy_valued(const std::string& algo) {
  return algo == "shannon" || algo == "kl" || algo == "plugin-shannon" || algo == "plugin-renyi" ||
         algo == "plugin-min-entropy" || algo == "plugin-kl";
}

int print_checks(const std::vector<verify::Check>& checks) {
  bool ok = true;
  for (auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated quantum entropy estimators with query accounting"};
  app.require_subcommand(1);
  app.fallthrough();
  bool bits = false;
  app.add_flag("--bits", bits, "Report entropies in bits instead of nats");

  EstimateRequest req;
  req.cfg.seed = default_seed();
  std::string alpha_s, mode_s = "contract", cost_s = "belovs", constants_s;
  auto* est = app.add_subcommand("estimate", "Run one estimator trial and print a JSON report");
  est->add_option("--algo", req.algo, "shannon|kl|renyi|min-entropy|coverage|support-size|plugin")->required();
  est->add_option("--dist", req.dist, "Instance shorthand or distribution JSON file")->required();
  est->add_option("--q", req.dist_q, "Second distribution (kl)");
  est->add_option("--alpha", alpha_s, "Renyi order (number or inf)");
  est->add_option("--f", req.f, "Ratio bound p_i <= f q_i (kl)");
  est->add_option("--eps", req.cfg.epsilon, "Target error");
  est->add_option("--delta", req.cfg.delta, "Failure budget for median amplification");
  est->add_option("--n-samples", req.n_samples, "Coverage horizon, or plugin sample count");
  est->add_option("--m", req.m, "Probability floor 1/m (support size)");
  est->add_option("--measure", req.measure, "Plugin functional: shannon|renyi|min-entropy|coverage|support|kl");
  est->add_option("--mode", mode_s, "contract|exact");
  est->add_option("--seed", req.cfg.seed, "Seed");
  est->add_option("--distinctness-cost", cost_s, "belovs|ambainis|flat34")
      ->check(CLI::IsMember({"belovs", "ambainis", "flat34"}));
  est->add_option("--constants", constants_s, "JSON object of constant overrides");

  std::string config_path, out_path;
  auto* exp = app.add_subcommand("experiment", "Run a batch experiment and write CSV");
  exp->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out_path, "Output CSV (stdout when omitted)");

  std::string suite;
  auto* ver = app.add_subcommand("verify", "Run an invariant suite");
  ver->add_option("suite", suite, "estamp|sandwich|poisson|collision|meanest|all")
      ->required()
      ->check(CLI::IsMember({"estamp", "sandwich", "poisson", "collision", "meanest", "all"}));

  std::string exact_dist, measure, q_dist, exact_alpha;
  std::uint64_t exact_n = 0;
  auto* ex = app.add_subcommand("exact", "Exact value of an entropic quantity");
  ex->add_option("--dist", exact_dist, "Instance shorthand or distribution JSON file")->required();
  ex->add_option("--measure", measure, "shannon|renyi|power-sum|min-entropy|coverage|support|kl")->required();
  ex->add_option("--alpha", exact_alpha, "Order for renyi / power-sum");
  ex->add_option("--n-samples", exact_n, "Horizon for coverage");
  ex->add_option("--q", q_dist, "Second distribution (kl)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*est) {
      req.alpha = parse_alpha_flag(alpha_s);
      req.cfg.mode = parse_mode(mode_s);
      req.cfg.integer_cost.preset = parse_cost_preset(cost_s);
      if (!constants_s.empty()) apply_constants(req.cfg, nlohmann::json::parse(constants_s));
      auto r = run_estimate(req);
      auto j = r.to_json();
      if (bits) to_bits(j, is_entropy_valued(r.algo));
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*exp) {
      auto cfg = load_experiment(config_path);
      auto rows = run_experiment(cfg);
      if (out_path.empty()) {
        write_csv(std::cout, rows);
      } else {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + out_path);
        write_csv(os, rows);
      }
      return 0;
    }
    if (*ver) {
      std::vector<verify::Check> checks;
      auto add = [&](std::vector<verify::Check> v) { checks.insert(checks.end(), v.begin(), v.end()); };
      if (suite == "estamp" || suite == "all") add(verify::estamp());
      if (suite == "sandwich" || suite == "all") add(verify::sandwich());
      if (suite == "poisson" || suite == "all") add(verify::poisson());
      if (suite == "collision" || suite == "all") add(verify::collision());
      if (suite == "meanest" || suite == "all") add(verify::meanest());
      return print_checks(checks);
    }
    if (*ex) {
      auto p = generate(exact_dist, default_seed());
      double alpha = parse_alpha_flag(exact_alpha);
      double v;
      bool entropy = true;
      if (measure == "shannon") v = shannon_entropy(p);
      else if (measure == "renyi") v = renyi_entropy(p, alpha);
      else if (measure == "min-entropy") v = renyi_entropy(p, std::numeric_limits<double>::infinity());
      else if (measure == "power-sum") { v = power_sum(p, alpha); entropy = false; }
      else if (measure == "coverage") { v = support_coverage(p, exact_n ? exact_n : p.n()); entropy = false; }
      else if (measure == "support") { v = static_cast<double>(p.support_size()); entropy = false; }
      else if (measure == "kl") v = kl_divergence(p, generate(q_dist, default_seed()));
      else throw std::invalid_argument("unknown measure '" + measure + "'");
      nlohmann::json j{{"measure", measure}, {"value", entropy && bits ? v / std::log(2.0) : v},
                       {"n", p.n()}, {"S", p.S()}};
      if (entropy) j["units"] = bits ? "bits" : "nats";
      std::cout << j.dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "qentropy/harness.hpp"

using namespace qentropy;

namespace {

struct Proc {
  int status;
  std::string out;
};

Proc run_cli(const std::string& args) {
  const char* cli = std::getenv("QENTROPY_CLI");
  if (!cli) return {-1, ""};
  std::string cmd = std::string(cli) + " " + args + " 2>&1";
  Proc p{0, ""};
  FILE* f = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf;
  while (auto k = fread(buf.data(), 1, buf.size(), f)) p.out.append(buf.data(), k);
  p.status = WEXITSTATUS(pclose(f));
  return p;
}

std::string csv_of(const ExperimentConfig& c) {
  std::ostringstream os;
  write_csv(os, run_experiment(c));
  return os.str();
}

}  // namespace

TEST(RunEstimate, ShannonReportsTruth) {
  EstimateRequest req;
  req.algo = "shannon";
  req.dist = "uniform:16";
  req.cfg.seed = 7;
  auto r = run_estimate(req);
  EXPECT_NEAR(r.truth, std::log(16.0), 1e-15);
  EXPECT_EQ(r.seed, 7u);
}

TEST(RunEstimate, RenyiDispatch) {
  EstimateRequest req;
  req.algo = "renyi";
  req.dist = "uniform:16";
  req.alpha = 2;
  EXPECT_EQ(run_estimate(req).algo, "renyi-integer");
  req.alpha = 1;
  EXPECT_EQ(run_estimate(req).algo, "shannon");
  req.alpha = std::numeric_limits<double>::infinity();
  EXPECT_EQ(run_estimate(req).algo, "min-entropy");
  req.alpha = 0;
  EXPECT_EQ(run_estimate(req).algo, "support-size");
  req.alpha = 0.5;
  EXPECT_EQ(run_estimate(req).algo, "renyi-small");
}

TEST(Plugin, Baseline) {
  Rng rng(1);
  auto point = build_oracle(point_distribution(4), 1);
  for (const char* m : {"shannon", "min-entropy", "support"}) {
    auto r = plugin_baseline(point, m, 50, 2.0, rng);
    EXPECT_EQ(r.estimate, r.truth) << m;
  }
  auto u = build_oracle(uniform_distribution(16), 2);
  auto r = plugin_baseline(u, "shannon", 100000, 1.0, rng);
  EXPECT_NEAR(r.estimate, std::log(16.0), 0.02);
  EXPECT_EQ(r.ledger.total(), 0u);
  EXPECT_EQ(r.ledger.classical_executions(), 100000u);

  auto ledger = std::make_shared<QueryLedger>();
  auto op = build_oracle(uniform_distribution(16), 3, "p", ledger);
  auto oq = build_oracle(zipf_distribution(2, 16), 4, "q", ledger);
  auto kl = plugin_baseline(op, "kl", 20, 1.0, rng, &oq);
  EXPECT_TRUE(kl.has_flag("undefined"));
  EXPECT_TRUE(std::isnan(kl.estimate));
  EXPECT_FALSE(kl.success);
}

TEST(Experiment, GridCellsAndRows) {
  auto j = nlohmann::json::parse(R"({
    "master_seed": 5, "trials": 10, "threads": 2,
    "defaults": {"algo": "shannon", "eps": 0.5},
    "grid": {"dist": ["uniform:8", "uniform:16", "zipf:1.5:16"]}
  })");
  auto c = experiment_from_json(j);
  ASSERT_EQ(c.cells.size(), 3u);
  auto rows = run_experiment(c);
  EXPECT_EQ(rows.size(), 30u);
  EXPECT_EQ(rows[0].report.n, 8u);
  EXPECT_EQ(rows[29].report.n, 16u);
  EXPECT_EQ(rows[3].report.seed, derive_seed(5, 0, 3));
}

TEST(Experiment, CsvIsDeterministicAcrossThreadCounts) {
  auto j = nlohmann::json::parse(R"({
    "master_seed": 9, "trials": 6,
    "cells": [{"algo": "shannon", "dist": "zipf:1.5:32", "eps": 0.25},
              {"algo": "renyi", "alpha": 2, "dist": "uniform:32", "eps": 0.5},
              {"algo": "coverage", "dist": "uniform:16", "eps": 0.3, "trials": 3}]
  })");
  auto c = experiment_from_json(j);
  c.threads = 1;
  auto a = csv_of(c);
  c.threads = 3;
  auto b = csv_of(c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "algo,alpha,n,S,eps,delta,seed,estimate,truth,error_mode,abs_or_rel_err,success,"
            "q_queries_p,q_queries_q,classical_execs,wall_ms");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 6 + 6 + 3);
}

TEST(Experiment, RejectsUnknownFields) {
  EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"cells": [{"algo": "shannon", "bogus": 1}]})")),
               std::invalid_argument);
  EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"trials": 3})")), std::invalid_argument);
}

TEST(Slope, LogLog) {
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {3, 30, 300}), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope({4, 16, 64}, {2, 4, 8}), 0.5, 1e-12);
}

TEST(Cli, EstimateAndErrors) {
  if (!std::getenv("QENTROPY_CLI")) GTEST_SKIP() << "QENTROPY_CLI not set";
  auto ok = run_cli("estimate --algo shannon --dist uniform:16 --eps 0.25 --seed 7");
  EXPECT_EQ(ok.status, 0);
  auto j = nlohmann::json::parse(ok.out);
  EXPECT_NEAR(j["truth"].get<double>(), std::log(16.0), 1e-15);

  auto dispatch = run_cli("estimate --algo renyi --alpha 2 --dist uniform:16 --eps 0.25");
  EXPECT_EQ(nlohmann::json::parse(dispatch.out)["algo"], "renyi-integer");

  auto path = std::filesystem::temp_directory_path() / "qentropy_cli_bad.json";
  {
    std::ofstream os(path);
    os << R"({"S": 5, "counts": [1, 2]})";
  }
  auto bad = run_cli("estimate --algo shannon --dist " + path.string());
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.out.find("must equal S"), std::string::npos);
  std::filesystem::remove(path);

  EXPECT_NE(run_cli("estimate --algo shannon --dist uniform:16 --eps abc").status, 0);
  EXPECT_EQ(run_cli("verify sandwich").status, 0);
  EXPECT_NE(run_cli("verify nosuch").status, 0);

  auto bits = run_cli("--bits exact --dist uniform:16 --measure shannon");
  EXPECT_NEAR(nlohmann::json::parse(bits.out)["value"].get<double>(), 4.0, 1e-15);
}

TEST(Cli, ExperimentReproducible) {
  if (!std::getenv("QENTROPY_CLI") || !std::getenv("QENTROPY_SOURCE")) GTEST_SKIP();
  const std::string cfg = std::string(std::getenv("QENTROPY_SOURCE")) + "/configs/example.json";
  auto tmp = std::filesystem::temp_directory_path();
  auto a = tmp / "qentropy_a.csv", b = tmp / "qentropy_b.csv";
  ASSERT_EQ(run_cli("experiment --config " + cfg + " --out " + a.string()).status, 0);
  ASSERT_EQ(run_cli("experiment --config " + cfg + " --out " + b.string()).status, 0);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_GT(slurp(a).size(), 100u);
}

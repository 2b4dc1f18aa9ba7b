#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrex/harness.hpp"

using namespace lrex;
namespace fs = std::filesystem;

namespace {

json smoke() {
  return json::parse(R"({
    "kernel": {"alpha": 1.5, "c_plus": 2.0, "c_minus": 1.0},
    "n": 8, "ring_factor": 32, "rho": 0.5, "t_end": 0.1, "dt": 0.05,
    "replicates": 4, "base_seed": 3,
    "observers": [
      {"field": "Y", "id": "Y"},
      {"field": "QV", "id": "QV", "cutoff_K": "full"},
      {"field": "A", "id": "A"}
    ],
    "checks": [{"kind": "qv_monotone", "observer": "QV"}]
  })");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lrex_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, RoundTripAndHash) {
  const auto c = config_from_json(smoke());
  const auto again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  auto other = c;
  other.base_seed = 4;
  EXPECT_NE(config_hash(other), config_hash(c));
  EXPECT_EQ(c.ring_size(), 256);
  EXPECT_EQ(c.observers[1].cutoff, -1);
}

TEST(Config, RejectsBadInput) {
  auto j = smoke();
  j["rho"] = 1.0;
  EXPECT_THROW(config_from_json(j), InvalidArgument);
  j = smoke();
  j["observers"].push_back({{"field", "Y"}, {"id", "Y"}});
  EXPECT_THROW(config_from_json(j), InvalidArgument);
  j = smoke();
  j["observers"][0]["f"] = {{"family", "boxcar"}};
  EXPECT_THROW(config_from_json(j), InvalidArgument);
  j = smoke();
  j["observers"][0]["field"] = "nonsense";
  EXPECT_THROW(simulate(config_from_json(j), 1), InvalidArgument);
  j = smoke();
  j["checks"][0]["kind"] = "nonsense";
  EXPECT_THROW(evaluate_checks(simulate(config_from_json(j), 1)), InvalidArgument);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  const auto c = config_from_json(smoke());
  const auto a = scratch("a"), b = scratch("b");
  run_experiment(c, a, 1);
  run_experiment(c, b, 3);
  EXPECT_EQ(slurp(a / "series.jsonl"), slurp(b / "series.jsonl"));
  EXPECT_FALSE(slurp(a / "series.jsonl").empty());
  for (const char* f : {"config.json", "metadata.json", "report.json", "summary.csv", "report_extras.csv",
                        "series_stats.csv"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
}

TEST(Experiment, ZeroReplicatesGiveAnEmptyValidReport) {
  auto j = smoke();
  j["replicates"] = 0;
  const auto dir = scratch("zero");
  const auto res = run_experiment(config_from_json(j), dir, 1);
  EXPECT_TRUE(res.reports.empty());
  EXPECT_TRUE(slurp(dir / "series.jsonl").empty());
  const auto report = json::parse(slurp(dir / "report.json"));
  EXPECT_TRUE(report["all_pass"].get<bool>());
  EXPECT_TRUE(report["checks"].empty());
}

TEST(Experiment, ReportsRecomputeFromPersistedSeries) {
  auto j = smoke();
  j["checks"].push_back({{"kind", "drift_zero"}, {"observer", "A"}, {"tolerance", 1e9}});
  const auto dir = scratch("recompute");
  const auto res = run_experiment(config_from_json(j), dir, 1);
  const auto again = recompute_reports(dir);
  ASSERT_EQ(again.size(), res.reports.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].name, res.reports[i].name);
    EXPECT_DOUBLE_EQ(again[i].statistic, res.reports[i].statistic);
    EXPECT_EQ(again[i].pass, res.reports[i].pass);
  }
  // tampering with the config breaks the hash
  auto meta = json::parse(slurp(dir / "metadata.json"));
  meta["config"]["rho"] = 0.4;
  std::ofstream(dir / "metadata.json") << meta.dump();
  EXPECT_THROW(recompute_reports(dir), InvalidArgument);
}

TEST(Experiment, SeriesLinesCarryTheRecordFields) {
  const auto dir = scratch("lines");
  run_experiment(config_from_json(smoke()), dir, 1);
  std::ifstream in(dir / "series.jsonl");
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto r = json::parse(line);
    EXPECT_TRUE(r.contains("t") && r.contains("observer_id") && r.contains("value") && r.contains("replicate"));
    ++count;
  }
  EXPECT_EQ(count, 4u * 3u * 3u);  // replicates x observers x mesh points
}

TEST(Checks, SymmetricKernelHasNoDrift) {
  auto j = smoke();
  j["kernel"]["c_plus"] = 1.0;
  j["kernel"]["c_minus"] = 1.0;
  j["checks"] = json::array({{{"kind", "drift_zero"}, {"observer", "A"}}});
  const auto reports = evaluate_checks(simulate(config_from_json(j), 1));
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_TRUE(reports[0].pass);
  EXPECT_EQ(reports[0].statistic, 0.0);
}

TEST(Checks, GaussianAtTimeZero) {
  auto j = smoke();
  j["n"] = 16;
  j["t_end"] = 0.0;
  j["replicates"] = 2000;
  j["observers"] = json::array({{{"field", "Y"}, {"id", "Y"}}});
  j["checks"] = json::array({{{"kind", "gaussian"}, {"observer", "Y"}}});
  const auto data = simulate(config_from_json(j), 1);
  const auto r = evaluate_checks(data).at(0);
  EXPECT_TRUE(r.pass) << r.extra("z_variance");
  // target is chi n^{-1} sum f(x/n)^2, independently summed here
  double acc = 0.0;
  for (int x = -200; x <= 200; ++x) acc += std::exp(-2.0 * (x / 16.0) * (x / 16.0));
  EXPECT_NEAR(r.extra("target_variance"), 0.25 * acc / 16.0, 1e-12);
}

TEST(Checks, MeshMismatchIsReported) {
  auto j = smoke();
  j["checks"] = json::array({{{"kind", "covariance"}, {"observer_t", "Y"}, {"times", {0.07}}}});
  EXPECT_THROW(evaluate_checks(simulate(config_from_json(j), 1)), MeshMismatch);
}

TEST(Pool, ResultsLandInIndexOrderAndErrorsPropagate) {
  std::vector<std::size_t> out(50, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

#include "spl/error.hpp"
#include "spl/runner.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace spl;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small(const std::string& scenario, int runs = 3) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  cfg.n_runs = runs;
  cfg.master_seed = 17;
  return cfg;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spl_runner_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ValidationAndUnknownScenario) {
  ScenarioConfig cfg = small("nope");
  try {
    run_scenario(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownScenario);
  }
  cfg = small("fig2_collapse", 0);
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small("fig2_collapse");
  cfg.eta = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  const auto j = nlohmann::ordered_json::parse(
      R"({"scenario": "appendix_finite_lr", "master_seed": 5, "n_runs": 4, "eta": 0.1, "iters": 30, "out_dir": "x"})");
  const ScenarioConfig cfg = config_from_json(j);
  EXPECT_EQ(cfg.scenario, "appendix_finite_lr");
  EXPECT_EQ(cfg.master_seed, 5u);
  EXPECT_EQ(cfg.n_runs, 4);
  EXPECT_EQ(cfg.eta, 0.1);
  EXPECT_EQ(cfg.iters, 30);
  EXPECT_EQ(cfg.out_dir, fs::path("x"));
  EXPECT_FALSE(cfg.sigma.has_value());
  const auto echo = config_to_json(cfg);
  EXPECT_FALSE(echo.contains("out_dir"));
  EXPECT_EQ(echo["eta"], 0.1);
  EXPECT_TRUE(echo["sigma"].is_null());
  EXPECT_THROW(config_from_json(nlohmann::ordered_json::parse(R"({"scenari": "x"})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::ordered_json::parse(R"({"n_runs": "many"})")), Error);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(Csv, HeaderOnlyForNoRuns) {
  EXPECT_EQ(csv_text({}), csv_header());
  EXPECT_EQ(csv_header(), "run_id,step_or_time,f,f_ratio,f_tilde,covariance_drift,max_abs_cosine,residual\n");
}

TEST(Csv, OneRowPerRecordWithFullPrecision) {
  RunRecords run{0, {}};
  for (int i = 0; i < 3; ++i) {
    TrajectoryRecord r;
    r.time = i;
    r.f = 0.1 * (i + 1);
    r.ratio = 1.0 / 3.0;
    if (i == 1) r.f_tilde = 2.0 / 3.0;
    run.records.push_back(r);
  }
  const std::string text = csv_text({run});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_NE(text.find("0,0,0.10000000000000001,0.33333333333333331,,0,0,0\n"), std::string::npos);
  EXPECT_NE(text.find(",0.66666666666666663,"), std::string::npos);
  const auto back = parse_csv(text);
  ASSERT_EQ(back.size(), 1u);
  ASSERT_EQ(back[0].records.size(), 3u);
  EXPECT_EQ(back[0].records[2].f, run.records[2].f);
  EXPECT_FALSE(back[0].records[0].f_tilde.has_value());
  EXPECT_EQ(back[0].records[1].f_tilde, run.records[1].f_tilde);
}

TEST(Median, OddEvenAndMismatch) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), Error);
  RunRecords a{0, {TrajectoryRecord{}}}, b{1, {TrajectoryRecord{}, TrajectoryRecord{}}};
  EXPECT_THROW(median_curve({a, b}), Error);
}

TEST(Summary, MediansRecomputeFromEmittedCsv) {
  ScenarioConfig cfg = small("fig4_trace_ratio", 4);
  cfg.n = 8;
  cfg.t_end = 5.0;
  cfg.out_dir = scratch("roundtrip");
  const ScenarioResult result = run_scenario(cfg);
  write_artifacts(result, cfg);
  for (const Artifact& a : result.artifacts) {
    const auto runs = parse_csv(slurp(cfg.out_dir / (a.name + ".csv")));
    const auto summary = nlohmann::json::parse(slurp(cfg.out_dir / (a.name + ".summary.json")));
    EXPECT_EQ(summary["schema_version"], kSummarySchemaVersion);
    EXPECT_EQ(summary["scenario"], "fig4_trace_ratio");
    const auto curve = median_curve(runs);
    ASSERT_EQ(curve.size(), summary["median_curve"]["f"].size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      EXPECT_NEAR(curve[i].f, summary["median_curve"]["f"][i].get<double>(), 1e-15);
      EXPECT_NEAR(curve[i].f_ratio, summary["median_curve"]["f_ratio"][i].get<double>(), 1e-15);
      EXPECT_NEAR(curve[i].residual, summary["median_curve"]["residual"][i].get<double>(), 1e-15);
      EXPECT_NEAR(curve[i].max_abs_cosine, summary["median_curve"]["max_abs_cosine"][i].get<double>(), 1e-15);
      EXPECT_NEAR(curve[i].covariance_drift, summary["median_curve"]["covariance_drift"][i].get<double>(), 1e-15);
    }
    ASSERT_EQ(summary["final"].size(), 4u);
    EXPECT_EQ(summary["final"][3]["f"].get<double>(), runs[3].records.back().f);
  }
  fs::remove_all(cfg.out_dir);
}

TEST(Scenarios, ExampleOneCatalog) {
  const ScenarioResult r = run_scenario(small("example1_critical_points", 100));
  ASSERT_EQ(r.artifacts.size(), 2u);
  ASSERT_EQ(r.artifacts[0].runs.size(), 8u);
  for (const auto& run : r.artifacts[0].runs) EXPECT_LE(run.records.at(0).residual, 1e-12);
  ASSERT_EQ(r.artifacts[1].runs.size(), 100u);
  for (const auto& run : r.artifacts[1].runs) EXPECT_GT(run.records.at(0).residual, 1e-3);
}

TEST(Scenarios, ArtifactLayout) {
  ScenarioConfig cfg = small("appendix_target_beta", 1);
  cfg.iters = 10;
  const ScenarioResult beta = run_scenario(cfg);
  std::vector<std::string> names;
  for (const auto& a : beta.artifacts) names.push_back(a.name);
  EXPECT_EQ(names, (std::vector<std::string>{"appendix_target_beta.beta_off", "appendix_target_beta.beta_0",
                                             "appendix_target_beta.beta_0.01", "appendix_target_beta.beta_0.1",
                                             "appendix_target_beta.beta_1", "appendix_target_beta.beta_10"}));
  cfg = small("appendix_finite_lr", 1);
  cfg.eta = 0.5;
  cfg.iters = 40;
  const ScenarioResult lr = run_scenario(cfg);
  ASSERT_EQ(lr.artifacts.size(), 1u);
  EXPECT_EQ(lr.artifacts[0].name, "appendix_finite_lr.eta_0.5");
  EXPECT_EQ(lr.artifacts[0].runs[0].records.back().time, 40.0);
  cfg = small("fig5_failure_mode", 2);
  cfg.t_end = 3.0;
  const ScenarioResult f5 = run_scenario(cfg);
  ASSERT_EQ(f5.artifacts.size(), 2u);
  EXPECT_FALSE(f5.artifacts[0].runs[0].records[0].f_tilde.has_value());
  EXPECT_TRUE(f5.artifacts[1].runs[0].records[0].f_tilde.has_value());
  EXPECT_EQ(f5.artifacts[0].runs[0].records.size(), 4u);
}

TEST(Scenarios, ThreadCountDoesNotChangeArtifacts) {
  ScenarioConfig cfg = small("fig2_collapse", 5);
  cfg.iters = 300;
  cfg.n = 10;
  const ScenarioResult serial = run_scenario(cfg);
  cfg.threads = 4;
  const ScenarioResult parallel = run_scenario(cfg);
  ASSERT_EQ(serial.artifacts.size(), parallel.artifacts.size());
  for (std::size_t i = 0; i < serial.artifacts.size(); ++i) {
    EXPECT_EQ(csv_text(serial.artifacts[i].runs), csv_text(parallel.artifacts[i].runs));
    EXPECT_EQ(summary_json(serial.artifacts[i], cfg).dump(), summary_json(parallel.artifacts[i], cfg).dump());
  }
}

TEST(Output, UnwritableDirectoryIsIoError) {
  ScenarioConfig cfg = small("example1_critical_points", 2);
  const fs::path blocker = scratch("blocker");
  { std::ofstream(blocker) << "file"; }
  cfg.out_dir = blocker / "sub";
  try {
    write_artifacts(run_scenario(cfg), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
  fs::remove_all(blocker);
}

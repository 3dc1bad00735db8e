#pragma once

#include "spl/selfpred.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spl {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSummarySchemaVersion = 1;

/// Scenario ids accepted by run_scenario.
const std::vector<std::string>& scenario_names();

/// One invocation of the runner. Unset optionals fall back to per-scenario
/// defaults; when set they override every variant of the scenario.
struct ScenarioConfig {
  std::string scenario;
  std::uint64_t master_seed = 0;
  int n_runs = 100;
  Eigen::Index n = 20;
  Eigen::Index k = 2;
  std::optional<double> eta;
  std::optional<long> iters;
  std::optional<double> sigma;
  std::optional<double> beta;
  std::optional<int> n_step;
  std::optional<long> record_every;
  std::optional<double> t_end;
  std::optional<double> record_dt;
  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  bool write_csv = true;
  bool write_summary = true;

  void validate() const;
};

/// Parse a JSON config object. Keys mirror the field names; unknown keys are
/// rejected with InvalidInput.
ScenarioConfig config_from_json(const nlohmann::ordered_json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg);

struct RunRecords {
  int run_id = 0;
  std::vector<TrajectoryRecord> records;
};

/// One CSV/summary pair. `name` becomes the file stem.
struct Artifact {
  std::string name;
  std::string matrix_kind;
  nlohmann::ordered_json params;
  std::vector<RunRecords> runs;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<Artifact> artifacts;
};

/// Runs every variant of the scenario, fanning runs over `cfg.threads`
/// workers. Output does not depend on the thread count.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Pointwise median over runs at each shared record index.
struct MedianPoint {
  double step_or_time = 0.0;
  double f = 0.0;
  double f_ratio = 0.0;
  std::optional<double> f_tilde;
  double covariance_drift = 0.0;
  double max_abs_cosine = 0.0;
  double residual = 0.0;
};

/// Throws InvalidInput when runs disagree on record count or positions.
std::vector<MedianPoint> median_curve(const std::vector<RunRecords>& runs);

double median(std::vector<double> values);

std::string csv_header();
std::string csv_text(const std::vector<RunRecords>& runs);
std::vector<RunRecords> parse_csv(const std::string& text);

nlohmann::ordered_json summary_json(const Artifact& artifact, const ScenarioConfig& cfg);

void emit_csv(const std::filesystem::path& path, const std::vector<RunRecords>& runs);
void emit_summary(const std::filesystem::path& path, const Artifact& artifact,
                  const ScenarioConfig& cfg);

/// Writes `<out_dir>/<name>.csv` and `<out_dir>/<name>.summary.json` per
/// artifact as enabled by the config; returns the written paths.
std::vector<std::filesystem::path> write_artifacts(const ScenarioResult& result,
                                                   const ScenarioConfig& cfg);

}  // namespace spl

#include "spl/runner.hpp"

#include "spl/error.hpp"
#include "spl/matrix_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spl {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void ScenarioConfig::validate() const {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end())
    throw Error(ErrorKind::UnknownScenario, "unknown scenario '" + scenario + "'");
  if (n_runs < 1) throw Error(ErrorKind::InvalidInput, "n_runs must be at least 1");
  if (n < 2) throw Error(ErrorKind::InvalidInput, "n must be at least 2");
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidInput, "k must lie in [1, n]");
  if (eta && !(*eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  if (iters && *iters < 1) throw Error(ErrorKind::InvalidInput, "iters must be at least 1");
  if (sigma && !(*sigma >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma must be nonnegative");
  if (beta && !(*beta >= 0.0)) throw Error(ErrorKind::InvalidInput, "beta must be nonnegative");
  if (n_step && *n_step < 1) throw Error(ErrorKind::InvalidInput, "n_step must be at least 1");
  if (record_every && *record_every < 1)
    throw Error(ErrorKind::InvalidInput, "record_every must be at least 1");
  if (t_end && !(*t_end > 0.0)) throw Error(ErrorKind::InvalidInput, "t_end must be positive");
  if (record_dt && !(*record_dt > 0.0))
    throw Error(ErrorKind::InvalidInput, "record_dt must be positive");
  if (threads < 1) throw Error(ErrorKind::InvalidInput, "threads must be at least 1");
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "config must be a JSON object");
  ScenarioConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "scenario") cfg.scenario = value.get<std::string>();
      else if (key == "master_seed") cfg.master_seed = value.get<std::uint64_t>();
      else if (key == "n_runs") cfg.n_runs = value.get<int>();
      else if (key == "n") cfg.n = value.get<Eigen::Index>();
      else if (key == "k") cfg.k = value.get<Eigen::Index>();
      else if (key == "eta") cfg.eta = value.get<double>();
      else if (key == "iters") cfg.iters = value.get<long>();
      else if (key == "sigma") cfg.sigma = value.get<double>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "n_step") cfg.n_step = value.get<int>();
      else if (key == "record_every") cfg.record_every = value.get<long>();
      else if (key == "t_end") cfg.t_end = value.get<double>();
      else if (key == "record_dt") cfg.record_dt = value.get<double>();
      else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
      else if (key == "threads") cfg.threads = value.get<unsigned>();
      else if (key == "write_csv") cfg.write_csv = value.get<bool>();
      else if (key == "write_summary") cfg.write_summary = value.get<bool>();
      else throw Error(ErrorKind::InvalidInput, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// Output location and thread count are left out so that the echo, and with it
// every artifact, is independent of where and how the run was executed.
json config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["master_seed"] = cfg.master_seed;
  j["n_runs"] = cfg.n_runs;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  auto put = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
    else j[key] = nullptr;
  };
  put("eta", cfg.eta);
  put("iters", cfg.iters);
  put("sigma", cfg.sigma);
  put("beta", cfg.beta);
  put("n_step", cfg.n_step);
  put("record_every", cfg.record_every);
  put("t_end", cfg.t_end);
  put("record_dt", cfg.record_dt);
  return j;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<MedianPoint> median_curve(const std::vector<RunRecords>& runs) {
  std::vector<MedianPoint> curve;
  if (runs.empty()) return curve;
  const std::size_t len = runs.front().records.size();
  for (const RunRecords& r : runs) {
    if (r.records.size() != len)
      throw Error(ErrorKind::InvalidInput, "runs disagree on the number of records");
    for (std::size_t i = 0; i < len; ++i)
      if (r.records[i].time != runs.front().records[i].time)
        throw Error(ErrorKind::InvalidInput, "runs disagree on record positions");
  }
  std::vector<double> buf(runs.size());
  auto column = [&](std::size_t i, auto field) {
    for (std::size_t r = 0; r < runs.size(); ++r) buf[r] = field(runs[r].records[i]);
    return median(buf);
  };
  for (std::size_t i = 0; i < len; ++i) {
    MedianPoint pt;
    pt.step_or_time = runs.front().records[i].time;
    pt.f = column(i, [](const TrajectoryRecord& t) { return t.f; });
    pt.f_ratio = column(i, [](const TrajectoryRecord& t) { return t.ratio; });
    const bool all_tilde = std::all_of(runs.begin(), runs.end(),
                                       [i](const RunRecords& r) { return r.records[i].f_tilde.has_value(); });
    if (all_tilde) pt.f_tilde = column(i, [](const TrajectoryRecord& t) { return *t.f_tilde; });
    pt.covariance_drift = column(i, [](const TrajectoryRecord& t) { return t.covariance_drift; });
    pt.max_abs_cosine = column(i, [](const TrajectoryRecord& t) { return t.max_abs_cosine; });
    pt.residual = column(i, [](const TrajectoryRecord& t) { return t.residual; });
    curve.push_back(pt);
  }
  return curve;
}

std::string csv_header() {
  return "run_id,step_or_time,f,f_ratio,f_tilde,covariance_drift,max_abs_cosine,residual\n";
}

std::string csv_text(const std::vector<RunRecords>& runs) {
  std::string out = csv_header();
  for (const RunRecords& run : runs) {
    for (const TrajectoryRecord& r : run.records) {
      out += std::to_string(run.run_id);
      out += ',';
      out += format_double(r.time);
      out += ',';
      out += format_double(r.f);
      out += ',';
      out += format_double(r.ratio);
      out += ',';
      if (r.f_tilde) out += format_double(*r.f_tilde);
      out += ',';
      out += format_double(r.covariance_drift);
      out += ',';
      out += format_double(r.max_abs_cosine);
      out += ',';
      out += format_double(r.residual);
      out += '\n';
    }
  }
  return out;
}

namespace {

double parse_number(const std::string& field) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE)
    throw Error(ErrorKind::InvalidInput, "bad CSV number '" + field + "'");
  return v;
}

}  // namespace

std::vector<RunRecords> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line + "\n" != csv_header())
    throw Error(ErrorKind::InvalidInput, "CSV header mismatch");
  std::vector<RunRecords> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 8) throw Error(ErrorKind::InvalidInput, "CSV row needs 8 fields");
    const int id = static_cast<int>(parse_number(fields[0]));
    if (runs.empty() || runs.back().run_id != id) runs.push_back({id, {}});
    TrajectoryRecord r;
    r.time = parse_number(fields[1]);
    r.f = parse_number(fields[2]);
    r.ratio = parse_number(fields[3]);
    if (!fields[4].empty()) r.f_tilde = parse_number(fields[4]);
    r.covariance_drift = parse_number(fields[5]);
    r.max_abs_cosine = parse_number(fields[6]);
    r.residual = parse_number(fields[7]);
    runs.back().records.push_back(r);
  }
  return runs;
}

namespace {

json record_json(const TrajectoryRecord& r) {
  json j;
  j["step_or_time"] = r.time;
  j["f"] = r.f;
  j["f_ratio"] = r.ratio;
  if (r.f_tilde) j["f_tilde"] = *r.f_tilde;
  else j["f_tilde"] = nullptr;
  j["covariance_drift"] = r.covariance_drift;
  j["max_abs_cosine"] = r.max_abs_cosine;
  j["residual"] = r.residual;
  return j;
}

}  // namespace

json summary_json(const Artifact& artifact, const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["version"] = std::string("spl ") + std::string(kVersion);
  j["scenario"] = cfg.scenario;
  j["artifact"] = artifact.name;
  j["matrix_kind"] = artifact.matrix_kind;
  j["params"] = artifact.params;
  j["config"] = config_to_json(cfg);
  j["n_runs"] = artifact.runs.size();

  const std::vector<MedianPoint> curve = median_curve(artifact.runs);
  json mc;
  json times = json::array(), f = json::array(), ratio = json::array(), tilde = json::array(),
       drift = json::array(), cosine = json::array(), residual = json::array();
  for (const MedianPoint& pt : curve) {
    times.push_back(pt.step_or_time);
    f.push_back(pt.f);
    ratio.push_back(pt.f_ratio);
    if (pt.f_tilde) tilde.push_back(*pt.f_tilde);
    else tilde.push_back(nullptr);
    drift.push_back(pt.covariance_drift);
    cosine.push_back(pt.max_abs_cosine);
    residual.push_back(pt.residual);
  }
  mc["step_or_time"] = times;
  mc["f"] = f;
  mc["f_ratio"] = ratio;
  mc["f_tilde"] = tilde;
  mc["covariance_drift"] = drift;
  mc["max_abs_cosine"] = cosine;
  mc["residual"] = residual;
  j["median_curve"] = mc;

  json finals = json::array();
  for (const RunRecords& run : artifact.runs) {
    json row = run.records.empty() ? json::object() : record_json(run.records.back());
    json tagged;
    tagged["run_id"] = run.run_id;
    for (auto& [key, value] : row.items()) tagged[key] = value;
    finals.push_back(tagged);
  }
  j["final"] = finals;
  return j;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

}  // namespace

void emit_csv(const fs::path& path, const std::vector<RunRecords>& runs) {
  write_text(path, csv_text(runs));
}

void emit_summary(const fs::path& path, const Artifact& artifact, const ScenarioConfig& cfg) {
  write_text(path, summary_json(artifact, cfg).dump(2) + "\n");
}

std::vector<fs::path> write_artifacts(const ScenarioResult& result, const ScenarioConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir))
    throw Error(ErrorKind::IoError, "cannot create output directory " + cfg.out_dir.string());
  std::vector<fs::path> written;
  for (const Artifact& a : result.artifacts) {
    if (cfg.write_csv) {
      written.push_back(cfg.out_dir / (a.name + ".csv"));
      emit_csv(written.back(), a.runs);
    }
    if (cfg.write_summary) {
      written.push_back(cfg.out_dir / (a.name + ".summary.json"));
      emit_summary(written.back(), a, cfg);
    }
  }
  return written;
}

}  // namespace spl

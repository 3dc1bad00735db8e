// Command-line front end: run scenarios, generate matrices, list the catalog.

#include "spl/error.hpp"
#include "spl/markov.hpp"
#include "spl/matrix_io.hpp"
#include "spl/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

int fail(std::string_view kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-predictive representation dynamics on tabular Markov chains"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV/JSON artifacts");
  std::string config_path, scenario, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs, n_step;
  std::optional<double> eta, sigma, beta, t_end, record_dt;
  std::optional<long> iters, record_every;
  std::optional<unsigned> threads;
  std::optional<Eigen::Index> n, k;
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--scenario", scenario, "Scenario id (see `list`)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--runs", runs, "Number of runs");
  run->add_option("--out", out, "Output directory");
  run->add_option("--eta", eta, "Learning rate");
  run->add_option("--iters", iters, "Iterations");
  run->add_option("--sigma", sigma, "Predictor noise scale");
  run->add_option("--beta", beta, "Target network rate");
  run->add_option("--n-step", n_step, "Prediction horizon (matrix power)");
  run->add_option("--record-every", record_every, "Record interval in steps");
  run->add_option("--t-end", t_end, "ODE horizon");
  run->add_option("--record-dt", record_dt, "ODE record interval");
  run->add_option("--n", n, "States");
  run->add_option("--k", k, "Representation columns");
  run->add_option("--threads", threads, "Worker threads");

  auto* gen = app.add_subcommand("gen-matrix", "Generate a random transition matrix");
  std::string kind = "doubly_stochastic", stem;
  Eigen::Index gen_n = 20;
  std::uint64_t gen_seed = 0;
  std::optional<double> alpha;
  gen->add_option("--kind", kind, "doubly_stochastic | symmetric")
      ->check(CLI::IsMember({"doubly_stochastic", "symmetric"}));
  gen->add_option("--n", gen_n, "States");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--alpha", alpha, "Mixing weight (random when omitted)");
  gen->add_option("--out", stem, "Output stem; writes <stem>.csv and <stem>.json")->required();

  auto* list = app.add_subcommand("list", "List scenario ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("InvalidInput", e.what());
  }

  try {
    if (*list) {
      for (const auto& name : spl::scenario_names()) std::cout << name << "\n";
      return 0;
    }
    if (*gen) {
      const spl::TransitionMatrix p = kind == "symmetric" ? spl::gen_symmetric(gen_n, gen_seed)
                                                          : spl::gen_doubly_stochastic(gen_n, gen_seed, alpha);
      spl::write_matrix_csv(stem + ".csv", p.entries());
      spl::MatrixMetadata meta;
      meta.n = gen_n;
      meta.seed = gen_seed;
      meta.alpha = kind == "symmetric" ? std::nullopt : alpha;
      meta.kind = kind;
      meta.symmetric = p.is_symmetric();
      meta.doubly_stochastic = p.is_doubly_stochastic();
      spl::write_matrix_metadata(stem + ".json", meta);
      return 0;
    }

    spl::ScenarioConfig cfg = config_path.empty() ? spl::ScenarioConfig{} : spl::load_config(config_path);
    if (!scenario.empty()) cfg.scenario = scenario;
    if (!out.empty()) cfg.out_dir = out;
    if (seed) cfg.master_seed = *seed;
    if (runs) cfg.n_runs = *runs;
    if (n) cfg.n = *n;
    if (k) cfg.k = *k;
    if (threads) cfg.threads = *threads;
    if (eta) cfg.eta = eta;
    if (iters) cfg.iters = iters;
    if (sigma) cfg.sigma = sigma;
    if (beta) cfg.beta = beta;
    if (n_step) cfg.n_step = n_step;
    if (record_every) cfg.record_every = record_every;
    if (t_end) cfg.t_end = t_end;
    if (record_dt) cfg.record_dt = record_dt;
    cfg.validate();
    for (const auto& path : spl::write_artifacts(spl::run_scenario(cfg), cfg))
      std::cout << path.string() << "\n";
    return 0;
  } catch (const spl::Error& e) {
    return fail(spl::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
}

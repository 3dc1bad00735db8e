#include "spl/bidir.hpp"
#include "spl/error.hpp"
#include "spl/metrics.hpp"
#include "spl/runner.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>

namespace spl {

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "fig2_collapse",          "fig4_trace_ratio",  "fig5_failure_mode",
      "example1_critical_points", "appendix_target_beta", "appendix_finite_lr",
      "appendix_noisy_predictor",
  };
  return names;
}

namespace {

using json = nlohmann::ordered_json;
using Work = std::function<std::vector<TrajectoryRecord>()>;

constexpr double kDefaultEta = 1e-3;
constexpr long kDefaultIters = 10000;
constexpr long kDefaultRecordEvery = 100;
constexpr double kStepBudget = 1e4;
const std::vector<double> kSigmaGrid = {0.0, 0.1, 0.25, 0.5, 1.0};
const std::vector<double> kBetaGrid = {0.0, 0.01, 0.1, 1.0, 10.0};
const std::vector<double> kEtaGrid = {0.01, 0.1, 1.0, 10.0};

struct Job {
  std::size_t artifact;
  std::size_t slot;
  Work work;
};

// Seeds of one run: the MDP, the initial representation(s) and the predictor
// noise are drawn from independent streams so variants stay paired.
struct RunSeeds {
  std::uint64_t mdp, init, noise, right;
  RunSeeds(std::uint64_t master, int run) {
    const std::uint64_t base = derive_seed(master, static_cast<std::uint64_t>(run));
    mdp = derive_seed(base, 0);
    init = derive_seed(base, 1);
    noise = derive_seed(base, 2);
    right = derive_seed(base, 3);
  }
};

std::string label(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Workers pull job indices from a shared counter and write into preassigned
// slots, so assembly order is fixed by run_id alone.
void execute(std::vector<Job>& jobs, ScenarioResult& result, unsigned threads) {
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      try {
        result.artifacts[jobs[i].artifact].runs[jobs[i].slot].records = jobs[i].work();
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class Builder {
 public:
  explicit Builder(const ScenarioConfig& cfg) : cfg_(cfg) { result_.scenario = cfg.scenario; }

  std::size_t artifact(std::string suffix, std::string kind, json params) {
    Artifact a;
    a.name = cfg_.scenario + "." + suffix;
    a.matrix_kind = std::move(kind);
    a.params = std::move(params);
    result_.artifacts.push_back(std::move(a));
    return result_.artifacts.size() - 1;
  }

  void add(std::size_t artifact, int run_id, Work work) {
    auto& runs = result_.artifacts[artifact].runs;
    runs.push_back({run_id, {}});
    jobs_.push_back({artifact, runs.size() - 1, std::move(work)});
  }

  ScenarioResult finish() {
    execute(jobs_, result_, cfg_.threads);
    return std::move(result_);
  }

 private:
  const ScenarioConfig& cfg_;
  ScenarioResult result_;
  std::vector<Job> jobs_;
};

DynamicsConfig discrete_base(const ScenarioConfig& cfg) {
  DynamicsConfig dc;
  dc.eta = cfg.eta.value_or(kDefaultEta);
  dc.iters = cfg.iters.value_or(kDefaultIters);
  dc.record_every = cfg.record_every.value_or(kDefaultRecordEvery);
  dc.n_step = cfg.n_step.value_or(1);
  return dc;
}

json dynamics_json(const DynamicsConfig& dc) {
  json j;
  j["eta"] = dc.eta;
  j["iters"] = dc.iters;
  j["gradient"] = dc.gradient == GradientMode::Semi ? "semi" : "full";
  j["predictor"] = dc.predictor == PredictorMode::Optimal ? "optimal"
                   : dc.predictor == PredictorMode::Noisy ? "noisy"
                                                          : "inner_solved";
  j["sigma"] = dc.sigma;
  if (dc.target_beta) j["target_beta"] = *dc.target_beta;
  else j["target_beta"] = "off";
  j["n_step"] = dc.n_step;
  j["record_every"] = dc.record_every;
  return j;
}

OdeOptions ode_options(const ScenarioConfig& cfg) {
  OdeOptions o;
  o.t_end = cfg.t_end.value_or(o.t_end);
  o.record_every = cfg.record_dt.value_or(o.record_every);
  return o;
}

json ode_json(const OdeOptions& o) {
  json j;
  j["t_end"] = o.t_end;
  j["record_every"] = o.record_every;
  j["rel_tol"] = o.rel_tol;
  j["abs_tol"] = o.abs_tol;
  return j;
}

// Discrete runs on random symmetric MDPs, one artifact per variant.
void add_symmetric_discrete(Builder& b, const ScenarioConfig& cfg, const std::string& suffix,
                            const DynamicsConfig& dc) {
  const std::size_t a = b.artifact(suffix, "symmetric", dynamics_json(dc));
  for (int run = 0; run < cfg.n_runs; ++run) {
    b.add(a, run, [&cfg, dc, run] {
      const RunSeeds s(cfg.master_seed, run);
      DynamicsConfig local = dc;
      local.noise_seed = s.noise;
      const TransitionMatrix p = gen_symmetric(cfg.n, s.mdp);
      const Representation phi0 = orthonormal_init(cfg.n, cfg.k, s.init);
      return run_discrete(phi0, p, DistributionVector::uniform(cfg.n), local).records;
    });
  }
}

ScenarioResult fig2_collapse(const ScenarioConfig& cfg) {
  Builder b(cfg);
  DynamicsConfig semi = discrete_base(cfg);
  DynamicsConfig full = semi;
  full.gradient = GradientMode::Full;
  DynamicsConfig noisy = semi;
  noisy.predictor = PredictorMode::Noisy;
  noisy.sigma = cfg.sigma.value_or(kSigmaGrid.back());
  add_symmetric_discrete(b, cfg, "semi_optimal", semi);
  add_symmetric_discrete(b, cfg, "full_optimal", full);
  add_symmetric_discrete(b, cfg, "semi_noisy", noisy);
  return b.finish();
}

ScenarioResult fig4_trace_ratio(const ScenarioConfig& cfg) {
  Builder b(cfg);
  const OdeOptions ode = ode_options(cfg);
  for (const bool symmetric : {true, false}) {
    const std::string kind = symmetric ? "symmetric" : "doubly_stochastic";
    const std::size_t a = b.artifact(kind, kind, ode_json(ode));
    for (int run = 0; run < cfg.n_runs; ++run) {
      b.add(a, run, [&cfg, ode, symmetric, run] {
        const RunSeeds s(cfg.master_seed, run);
        const TransitionMatrix p = symmetric ? gen_symmetric(cfg.n, s.mdp)
                                             : gen_doubly_stochastic(cfg.n, s.mdp, std::nullopt);
        return integrate_ode(orthonormal_init(cfg.n, cfg.k, s.init), p, ode).records;
      });
    }
  }
  return b.finish();
}

ScenarioResult fig5_failure_mode(const ScenarioConfig& cfg) {
  constexpr Eigen::Index n = 3;
  const Eigen::Index k = std::min<Eigen::Index>(cfg.k, n);
  Builder b(cfg);
  const OdeOptions ode = ode_options(cfg);
  json params = ode_json(ode);
  params["n"] = n;
  params["k"] = k;
  params["ratio_normalizer"] = "svd_norm";
  const std::size_t single = b.artifact("single", "fixed_example_3x3", params);
  const std::size_t bidir = b.artifact("bidirectional", "fixed_example_3x3", params);
  for (int run = 0; run < cfg.n_runs; ++run) {
    b.add(single, run, [&cfg, ode, k, run] {
      const RunSeeds s(cfg.master_seed, run);
      return integrate_ode(orthonormal_init(n, k, s.init), fixed_example_3x3(), ode).records;
    });
    b.add(bidir, run, [&cfg, ode, k, run] {
      const RunSeeds s(cfg.master_seed, run);
      const BidirState state(orthonormal_init(n, k, s.init), orthonormal_init(n, k, s.right));
      return integrate_bidir(state, fixed_example_3x3(), ode).records;
    });
  }
  return b.finish();
}

// The eight critical angles of the 2x2 example in the eigenbasis (u1, u2):
// the four eigenvector points and the four points with u-coordinates
// (+-2/3, +-sqrt(5)/3) where the predictor vanishes.
std::vector<double> example1_critical_angles() {
  const double pi = std::numbers::pi;
  const double a = std::atan2(std::sqrt(5.0) / 3.0, 2.0 / 3.0);
  return {0.0, pi / 2, pi, 3 * pi / 2, a, pi - a, pi + a, 2 * pi - a};
}

TrajectoryRecord example1_record(double theta) {
  const double inv = 1.0 / std::sqrt(2.0);
  Vector u1(2), u2(2);
  u1 << inv, inv;
  u2 << inv, -inv;
  Matrix phi(2, 1);
  phi.col(0) = std::cos(theta) * u1 + std::sin(theta) * u2;
  const TransitionMatrix p = fixed_example_2x2();
  TrajectoryRecord r;
  r.f = trace_objective(phi, p.entries());
  r.ratio = r.f / ratio_normalizer(p, 1);
  r.residual = ode_rhs(phi, p.entries()).norm();
  return r;
}

ScenarioResult example1_critical_points(const ScenarioConfig& cfg) {
  constexpr double kProbeGap = 0.05;
  Builder b(cfg);
  const std::vector<double> critical = example1_critical_angles();
  json cp;
  cp["basis"] = "eigenvectors u1 = [1, 1]/sqrt(2), u2 = [1, -1]/sqrt(2)";
  cp["critical_runs"] = critical.size();
  cp["probe_min_angle_gap"] = kProbeGap;
  const std::size_t crit = b.artifact("critical", "fixed_example_2x2", cp);
  json pp = cp;
  const std::size_t probes = b.artifact("probes", "fixed_example_2x2", pp);
  for (std::size_t i = 0; i < critical.size(); ++i)
    b.add(crit, static_cast<int>(i), [theta = critical[i]] { return std::vector{example1_record(theta)}; });
  for (int run = 0; run < cfg.n_runs; ++run) {
    b.add(probes, run, [&cfg, critical, run] {
      Rng rng(RunSeeds(cfg.master_seed, run).init);
      const double two_pi = 2.0 * std::numbers::pi;
      for (;;) {
        const double theta = two_pi * rng.uniform();
        bool clear = true;
        for (double c : critical) {
          const double gap = std::abs(std::remainder(theta - c, two_pi));
          if (gap < kProbeGap) clear = false;
        }
        if (clear) return std::vector{example1_record(theta)};
      }
    });
  }
  return b.finish();
}

ScenarioResult appendix_target_beta(const ScenarioConfig& cfg) {
  Builder b(cfg);
  std::vector<std::optional<double>> grid;
  if (cfg.beta) {
    grid.push_back(cfg.beta);
  } else {
    grid.push_back(std::nullopt);
    for (double beta : kBetaGrid) grid.push_back(beta);
  }
  for (const auto& beta : grid) {
    DynamicsConfig dc = discrete_base(cfg);
    dc.target_beta = beta;
    add_symmetric_discrete(b, cfg, beta ? "beta_" + label(*beta) : std::string("beta_off"), dc);
  }
  return b.finish();
}

ScenarioResult appendix_finite_lr(const ScenarioConfig& cfg) {
  Builder b(cfg);
  const std::vector<double> grid = cfg.eta ? std::vector<double>{*cfg.eta} : kEtaGrid;
  for (double eta : grid) {
    DynamicsConfig dc = discrete_base(cfg);
    dc.eta = eta;
    dc.iters = cfg.iters.value_or(std::max(1L, std::lround(kStepBudget / eta)));
    dc.record_every = cfg.record_every.value_or(std::max(1L, dc.iters / 100));
    add_symmetric_discrete(b, cfg, "eta_" + label(eta), dc);
  }
  return b.finish();
}

ScenarioResult appendix_noisy_predictor(const ScenarioConfig& cfg) {
  Builder b(cfg);
  const std::vector<double> grid = cfg.sigma ? std::vector<double>{*cfg.sigma} : kSigmaGrid;
  for (double sigma : grid) {
    DynamicsConfig dc = discrete_base(cfg);
    dc.predictor = PredictorMode::Noisy;
    dc.sigma = sigma;
    add_symmetric_discrete(b, cfg, "sigma_" + label(sigma), dc);
  }
  return b.finish();
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario == "fig2_collapse") return fig2_collapse(cfg);
  if (cfg.scenario == "fig4_trace_ratio") return fig4_trace_ratio(cfg);
  if (cfg.scenario == "fig5_failure_mode") return fig5_failure_mode(cfg);
  if (cfg.scenario == "example1_critical_points") return example1_critical_points(cfg);
  if (cfg.scenario == "appendix_target_beta") return appendix_target_beta(cfg);
  if (cfg.scenario == "appendix_finite_lr") return appendix_finite_lr(cfg);
  if (cfg.scenario == "appendix_noisy_predictor") return appendix_noisy_predictor(cfg);
  throw Error(ErrorKind::UnknownScenario, "unknown scenario '" + cfg.scenario + "'");
}

}  // namespace spl

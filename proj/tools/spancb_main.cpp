#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spancb/errors.hpp"
#include "spancb/experiment.hpp"
#include "spancb/reweighted.hpp"
#include "spancb/spanner.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> horizon;
  std::string gamma;
  std::string epsilon;
  bool practical = false;
  std::optional<int> duplicates;
  std::optional<int> jobs;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags.config,
                            "experiment config file (key = value lines)");
  if (config_required) c->required();
  cmd->add_option("--seed", flags.seed, "run a single seed");
  cmd->add_option("--T", flags.horizon, "override the horizon");
  cmd->add_option("--gamma", flags.gamma, "exploration gamma or 'auto'");
  cmd->add_option("--epsilon", flags.epsilon, "exploration epsilon or 'auto'");
  cmd->add_flag("--practical", flags.practical,
                "use the practical spanner-igw sampler");
  cmd->add_option("--duplicates", flags.duplicates,
                  "append this many duplicates of the last action");
  cmd->add_option("--jobs", flags.jobs, "worker threads across seeds");
  cmd->add_option("--out", flags.out, "output directory");
}

spancb::ExperimentConfig build_config(const CommonFlags& flags) {
  spancb::ExperimentConfig cfg;
  if (!flags.config.empty()) cfg = spancb::parse_config_file(flags.config);
  if (flags.seed) {
    spancb::apply_config_entry(cfg, "run.seeds", std::to_string(*flags.seed));
  }
  if (flags.horizon) {
    spancb::apply_config_entry(cfg, "run.T", std::to_string(*flags.horizon));
  }
  if (!flags.gamma.empty()) {
    spancb::apply_config_entry(cfg, "policy.gamma", flags.gamma);
  }
  if (!flags.epsilon.empty()) {
    spancb::apply_config_entry(cfg, "policy.epsilon", flags.epsilon);
  }
  if (flags.practical) cfg.policy.name = "spanner-igw-practical";
  if (flags.duplicates) {
    spancb::apply_config_entry(cfg, "env.duplicates",
                               std::to_string(*flags.duplicates));
  }
  if (flags.jobs) {
    spancb::apply_config_entry(cfg, "run.jobs", std::to_string(*flags.jobs));
  }
  if (!flags.out.empty()) cfg.run.out_dir = flags.out;
  return cfg;
}

int run_and_report(const spancb::ExperimentConfig& cfg) {
  const spancb::ExperimentResult res = spancb::run_experiment(cfg);
  std::printf("policy=%s seeds=%zu T=%llu\n", cfg.policy.name.c_str(),
              res.seeds.size(),
              static_cast<unsigned long long>(cfg.run.horizon));
  std::printf("mean_progressive_reward=%.6f ci90=[%.6f, %.6f]\n",
              res.mean_progressive_reward, res.reward_ci.first,
              res.reward_ci.second);
  std::printf("final_regret_ci90=[%.6f, %.6f] wall=%.2fs\n",
              res.regret_ci.first, res.regret_ci.second, res.wall_seconds);
  std::printf("artifacts: %s\n", cfg.run.out_dir.c_str());
  return 0;
}

int cmd_spanner(const std::string& embeddings, double approx_c,
                std::optional<double> eta) {
  const spancb::FiniteActionSet set =
      spancb::load_embeddings_csv(embeddings);
  const spancb::Context x;
  const auto report = [&](const spancb::SpannerState& sp) {
    std::printf("spanner_ids:");
    for (const auto id : sp.ids) {
      std::printf(" %lld", static_cast<long long>(id));
    }
    std::printf("\nabs_det: %s\n",
                spancb::format_double(std::abs(sp.matrix.det())).c_str());
    double max_coeff = 0.0;
    for (const auto id : set.ids()) {
      const Eigen::VectorXd coeff =
          sp.matrix.inverse() * set.embed(x, id);
      max_coeff = std::max(max_coeff, coeff.cwiseAbs().maxCoeff());
    }
    std::printf("max_coeff: %s\n", spancb::format_double(max_coeff).c_str());
    std::printf("iterations: %d\n", sp.stats.iterations);
  };
  if (!eta) {
    report(spancb::compute_spanner(set, x, approx_c,
                                   spancb::init_spanner(set, x)));
    return 0;
  }
  const auto cert = spancb::local_search_init(set, x);
  const spancb::ReweightingContext rc(
      set, x, Eigen::VectorXd::Zero(set.dim()), spancb::Reweighting{*eta, 1.0});
  report(spancb::reweighted_spanner(rc, approx_c, cert.spanner, cert.radius));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "contextual bandits over large linearly structured action sets"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run the configured seeds");
  add_common(run, run_flags, /*config_required=*/true);

  CommonFlags sweep_flags;
  std::int64_t sweep_seeds = 0;
  auto* sweep =
      app.add_subcommand("sweep", "run a contiguous block of seeds");
  add_common(sweep, sweep_flags, /*config_required=*/true);
  sweep->add_option("--seeds", sweep_seeds, "run seeds 0..N-1")->required();

  std::string sp_embeddings;
  double sp_c = 2.0;
  std::optional<double> sp_eta;
  auto* spanner =
      app.add_subcommand("spanner", "inspect the spanner of an embedding file");
  spanner->add_option("--embeddings", sp_embeddings, "embedding CSV")
      ->required();
  spanner->add_option("--C", sp_c, "approximation factor (default 2)");
  spanner->add_option("--eta", sp_eta,
                      "report the reweighted spanner for ghat = 0");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_and_report(build_config(run_flags));
    if (sweep->parsed()) {
      if (sweep_seeds <= 0) {
        throw spancb::ConfigError("sweep: --seeds must be positive");
      }
      spancb::ExperimentConfig cfg = build_config(sweep_flags);
      cfg.run.seeds.clear();
      for (std::int64_t s = 0; s < sweep_seeds; ++s) {
        cfg.run.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      return run_and_report(cfg);
    }
    if (spanner->parsed()) return cmd_spanner(sp_embeddings, sp_c, sp_eta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

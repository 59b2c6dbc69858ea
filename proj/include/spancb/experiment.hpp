#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spancb/policies.hpp"
#include "spancb/simulator.hpp"

namespace spancb {

struct PolicySpec {
  std::string name = "spanner-igw";
  std::optional<double> gamma;    // nullopt: schedule from the horizon
  std::optional<double> epsilon;  // nullopt: schedule from the horizon
  double approx_c = 2.0;
  std::string regressor = "ridge";  // ridge | bilinear
  double ridge_rho = 1.0;
  double sgd_step = 0.05;
  double delta = 0.05;
  std::optional<double> regsq_bound;
};

struct RunSpec {
  std::uint64_t horizon = 1000;
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
  int jobs = 1;
};

struct ExperimentConfig {
  EnvSpec env;
  PolicySpec policy;
  RunSpec run;
};

// Flat `key = value` file; '#' starts a comment.  Unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& path);
// Applies one `key=value` pair (the same keys the file accepts).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg,
                                    std::shared_ptr<const FiniteActionSet> set);

struct SeedOutcome {
  std::uint64_t seed = 0;
  double mean_reward = 0.0;
  double pseudo_regret = 0.0;
  double realized_regret = 0.0;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  double mean_progressive_reward = 0.0;
  std::pair<double, double> reward_ci{0.0, 0.0};
  std::pair<double, double> regret_ci{0.0, 0.0};
  double wall_seconds = 0.0;
};

// Runs every configured seed (optionally across threads), writing
// rounds_<seed>.csv per seed plus summary.json into run.out_dir.
// Identical configs and seeds produce byte-identical round logs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Round log serialization, shared by the runner and the tests.
std::string round_log_csv(const RegretTracker& tracker);
std::string format_double(double v);

}  // namespace spancb

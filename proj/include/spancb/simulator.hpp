#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spancb/actions.hpp"
#include "spancb/policies.hpp"
#include "spancb/rng.hpp"
#include "spancb/types.hpp"

namespace spancb {

enum class NoiseModel { kBernoulli, kGaussian };
enum class RewardMap { kLinear, kBilinear };

struct EnvSpec {
  int dim = 5;
  int num_actions = 100;
  NoiseModel noise = NoiseModel::kBernoulli;
  double sigma = 0.25;  // Gaussian noise scale
  RewardMap reward_map = RewardMap::kLinear;
  int context_dim = 0;    // 0: same as dim
  int context_pool = 512; // fixed contexts cycled uniformly at random
  std::uint64_t gen_seed = 0;
  int duplicates = 0;              // copies of the last action appended
  std::string embedding_file;      // optional CSV instead of synthetic
};

// Realizable environment: mean reward <phi(a), gstar(x)> with gstar either
// a fixed unit vector or W x for a spectral-norm-bounded W.  Rewards live
// in [-1, 1]: Bernoulli on {-1, +1} with mean fstar, or fstar plus
// symmetrically truncated Gaussian noise (truncation at 1 - |fstar| keeps
// the mean exact).  Reward draws are keyed by (seed, round, action id),
// so one round exposes a consistent random reward function.
class LinearEnvironment {
 public:
  static LinearEnvironment make(const EnvSpec& spec);

  const FiniteActionSet& actions() const { return *actions_; }
  std::shared_ptr<const FiniteActionSet> actions_ptr() const {
    return actions_;
  }
  const EnvSpec& spec() const { return spec_; }

  Context sample_context(const CounterRng& rng, std::uint64_t round) const;
  Eigen::VectorXd gstar(const Context& x) const;
  double mean_reward(const Context& x, ActionId a) const;
  ActionId optimal_action(const Context& x) const;
  double draw_reward(const CounterRng& rng, std::uint64_t round,
                     const Context& x, ActionId a) const;

  // Same environment with `copies` duplicates of `source` appended; the
  // duplicates share the source's embedding and therefore its reward law.
  LinearEnvironment augmented(ActionId source, int copies) const;

 private:
  EnvSpec spec_;
  std::shared_ptr<const FiniteActionSet> actions_;
  Eigen::VectorXd theta_star_;   // linear map
  Eigen::MatrixXd w_star_;       // bilinear map
  Eigen::MatrixXd context_pool_; // context_dim x pool
};

// Environment with `copies` exact duplicates of action `source` appended
// under fresh ids.  The reward law of existing actions is unchanged.
LinearEnvironment duplicate_augment(const LinearEnvironment& env,
                                    ActionId source, int copies);

struct RoundRecord {
  std::uint64_t round = 0;
  std::int64_t context_id = 0;
  ActionId action = 0;
  double reward = 0.0;
  double pseudo_regret_cum = 0.0;
  double realized_regret_cum = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  bool spanner_recomputed = false;
  int spanner_size = 0;
};

// Per-round log plus cumulative regret counters.  Pseudo-regret uses the
// exact mean-reward maximizer, so its increments are nonnegative; record()
// enforces that up to 1e-12.
class RegretTracker {
 public:
  void record(std::uint64_t round, std::int64_t context_id, ActionId action,
              double reward, double pseudo_increment,
              double realized_increment, const StepDiagnostics& diag);

  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  double pseudo_regret() const { return pseudo_; }
  double realized_regret() const { return realized_; }
  double mean_reward() const;

 private:
  std::vector<RoundRecord> rounds_;
  double pseudo_ = 0.0;
  double realized_ = 0.0;
  double reward_sum_ = 0.0;
};

// Runs T rounds: sample context, step the policy, draw the reward, track
// regret, then feed exactly one (x, a, r) update to the regressor.
// Exceptions are rethrown with the failing round attached.
RegretTracker run_episode(const LinearEnvironment& env, Policy& policy,
                          std::uint64_t horizon, std::uint64_t seed);

// Percentile bootstrap CI for the mean of `values` (needs >= 2 entries).
std::pair<double, double> bootstrap_ci(const std::vector<double>& values,
                                       double level = 0.90,
                                       int resamples = 1000,
                                       std::uint64_t seed = 0);

}  // namespace spancb

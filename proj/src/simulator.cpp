#include "spancb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spancb/errors.hpp"

namespace spancb {
namespace {

Eigen::VectorXd unit_sphere_draw(const CounterRng& rng, std::uint64_t index,
                                 int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = rng.gaussian(rng_stream::kEnvGen, index,
                        2 * static_cast<std::uint64_t>(i));
  }
  const double n = v.norm();
  if (n < 1e-12) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / n;
}

Eigen::VectorXd unit_ball_draw(const CounterRng& rng, std::uint64_t index,
                               int dim) {
  Eigen::VectorXd v = unit_sphere_draw(rng, index, dim);
  const double u = rng.uniform(rng_stream::kEnvGen, index,
                               2 * static_cast<std::uint64_t>(dim) + 1);
  return v * std::pow(std::max(u, 1e-12), 1.0 / dim);
}

}  // namespace

LinearEnvironment LinearEnvironment::make(const EnvSpec& spec) {
  if (spec.dim <= 0 || spec.num_actions <= 0 || spec.context_pool <= 0) {
    throw ConfigError("environment: dim, num_actions and context_pool must "
                      "be positive");
  }
  if (!(spec.sigma >= 0.0)) throw ConfigError("environment: sigma must be >= 0");
  LinearEnvironment env;
  env.spec_ = spec;
  const int dx = spec.context_dim > 0 ? spec.context_dim : spec.dim;
  env.spec_.context_dim = dx;
  const CounterRng rng(spec.gen_seed);

  // Index layout of the generation stream: actions, then contexts, then
  // the reward parameter.  Offsets only depend on the EnvSpec fields.
  std::shared_ptr<const FiniteActionSet> base;
  if (!spec.embedding_file.empty()) {
    base = std::make_shared<FiniteActionSet>(
        load_embeddings_csv(spec.embedding_file));
  } else {
    Eigen::MatrixXd emb(spec.dim, spec.num_actions);
    std::vector<ActionId> ids(static_cast<std::size_t>(spec.num_actions));
    for (int j = 0; j < spec.num_actions; ++j) {
      emb.col(j) = unit_sphere_draw(rng, static_cast<std::uint64_t>(j),
                                    spec.dim);
      ids[static_cast<std::size_t>(j)] = j;
    }
    base = std::make_shared<FiniteActionSet>(std::move(ids), std::move(emb));
  }

  const std::uint64_t context_base = 1'000'000;
  Eigen::MatrixXd pool(dx, spec.context_pool);
  for (int j = 0; j < spec.context_pool; ++j) {
    pool.col(j) = unit_ball_draw(
        rng, context_base + static_cast<std::uint64_t>(j), dx);
  }
  env.context_pool_ = std::move(pool);

  const std::uint64_t param_base = 2'000'000;
  if (spec.reward_map == RewardMap::kLinear) {
    env.theta_star_ = unit_sphere_draw(rng, param_base, base->dim());
  } else {
    Eigen::MatrixXd w(base->dim(), dx);
    for (int i = 0; i < base->dim(); ++i) {
      w.row(i) = unit_sphere_draw(
                     rng, param_base + 1 + static_cast<std::uint64_t>(i), dx)
                     .transpose();
    }
    const double op_norm = w.jacobiSvd().singularValues()[0];
    if (op_norm > 1.0) w /= op_norm;
    env.w_star_ = std::move(w);
  }

  if (spec.duplicates > 0) {
    base = std::make_shared<FiniteActionSet>(
        base->with_duplicates(base->ids().back(), spec.duplicates));
  }
  env.actions_ = std::move(base);
  return env;
}

Context LinearEnvironment::sample_context(const CounterRng& rng,
                                          std::uint64_t round) const {
  const double u = rng.uniform(rng_stream::kContext, round, 0);
  const auto pool = static_cast<std::int64_t>(context_pool_.cols());
  const std::int64_t id =
      std::min<std::int64_t>(static_cast<std::int64_t>(u * pool), pool - 1);
  Context x;
  x.id = id;
  x.features = context_pool_.col(id);
  return x;
}

Eigen::VectorXd LinearEnvironment::gstar(const Context& x) const {
  if (spec_.reward_map == RewardMap::kLinear) return theta_star_;
  return w_star_ * x.features;
}

double LinearEnvironment::mean_reward(const Context& x, ActionId a) const {
  return gstar(x).dot(actions_->embed(x, a));
}

ActionId LinearEnvironment::optimal_action(const Context& x) const {
  return actions_->argmax(x, gstar(x));
}

double LinearEnvironment::draw_reward(const CounterRng& rng,
                                      std::uint64_t round, const Context& x,
                                      ActionId a) const {
  const double f = mean_reward(x, a);
  const auto key = static_cast<std::uint64_t>(a);
  if (spec_.noise == NoiseModel::kBernoulli) {
    const double p = std::clamp(0.5 * (1.0 + f), 0.0, 1.0);
    const double u = rng.uniform(rng_stream::kReward, round, 2 * key);
    return u < p ? 1.0 : -1.0;
  }
  // Symmetric truncation at 1 - |f| keeps the conditional mean exactly f
  // while confining the reward to [-1, 1].
  const double z = rng.gaussian(rng_stream::kReward, round, 2 * key);
  const double cut = 1.0 - std::abs(f);
  return f + std::clamp(spec_.sigma * z, -cut, cut);
}

LinearEnvironment LinearEnvironment::augmented(ActionId source,
                                               int copies) const {
  LinearEnvironment out = *this;
  out.actions_ = std::make_shared<FiniteActionSet>(
      actions_->with_duplicates(source, copies));
  out.spec_.duplicates += copies;
  return out;
}

LinearEnvironment duplicate_augment(const LinearEnvironment& env,
                                    ActionId source, int copies) {
  return env.augmented(source, copies);
}

void RegretTracker::record(std::uint64_t round, std::int64_t context_id,
                           ActionId action, double reward,
                           double pseudo_increment, double realized_increment,
                           const StepDiagnostics& diag) {
  if (pseudo_increment < -1e-12) {
    throw InvariantError("round " + std::to_string(round) +
                         ": pseudo-regret increment " +
                         std::to_string(pseudo_increment) + " is negative");
  }
  pseudo_ += std::max(pseudo_increment, 0.0);
  realized_ += realized_increment;
  reward_sum_ += reward;
  RoundRecord rec;
  rec.round = round;
  rec.context_id = context_id;
  rec.action = action;
  rec.reward = reward;
  rec.pseudo_regret_cum = pseudo_;
  rec.realized_regret_cum = realized_;
  rec.lambda = diag.lambda;
  rec.gamma = diag.gamma;
  rec.spanner_recomputed = diag.spanner_recomputed;
  rec.spanner_size = diag.spanner_size;
  rounds_.push_back(rec);
}

double RegretTracker::mean_reward() const {
  if (rounds_.empty()) return 0.0;
  return reward_sum_ / static_cast<double>(rounds_.size());
}

RegretTracker run_episode(const LinearEnvironment& env, Policy& policy,
                          std::uint64_t horizon, std::uint64_t seed) {
  const CounterRng rng(seed);
  RegretTracker tracker;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    try {
      const Context x = env.sample_context(rng, t);
      const StepResult res = policy.step(x, t, rng);
      const ActionId best = env.optimal_action(x);
      const double reward = env.draw_reward(rng, t, x, res.action);
      const double best_reward = env.draw_reward(rng, t, x, best);
      const double pseudo =
          env.mean_reward(x, best) - env.mean_reward(x, res.action);
      tracker.record(t, x.id, res.action, reward, pseudo,
                     best_reward - reward, res.diagnostics);
      policy.observe(x, res.action, reward);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error("round " + std::to_string(t) + ": " + e.what());
    }
  }
  return tracker;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& values,
                                       double level, int resamples,
                                       std::uint64_t seed) {
  if (values.size() < 2) {
    throw ConfigError("bootstrap_ci needs at least 2 values, got " +
                      std::to_string(values.size()));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("bootstrap_ci: level must lie in (0, 1)");
  }
  if (resamples < 2) throw ConfigError("bootstrap_ci: resamples must be >= 2");
  const CounterRng rng(seed);
  const auto n = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform(rng_stream::kBootstrap,
                                   static_cast<std::uint64_t>(b), k);
      const auto idx = std::min(n - 1, static_cast<std::size_t>(u * n));
      sum += values[idx];
    }
    means[static_cast<std::size_t>(b)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  const double alpha = 0.5 * (1.0 - level);
  return {quantile(alpha), quantile(1.0 - alpha)};
}

}  // namespace spancb

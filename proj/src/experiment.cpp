#include "spancb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spancb/errors.hpp"
#include "spancb/regressor.hpp"

namespace spancb {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(value.data(), last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const char* last = value.data() + value.size();
  const auto res = std::from_chars(value.data(), last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

// `auto` maps to nullopt; anything else must parse as a number.
std::optional<double> parse_auto(const std::string& key,
                                 const std::string& value) {
  if (value == "auto") return std::nullopt;
  return parse_double(key, value);
}

std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  // Either a comma list "0,3,17" or a range "0..31".
  std::vector<std::uint64_t> seeds;
  if (const auto dots = value.find(".."); dots != std::string::npos) {
    const auto lo = parse_int("run.seeds", value.substr(0, dots));
    const auto hi = parse_int("run.seeds", value.substr(dots + 2));
    if (lo < 0 || hi < lo) throw ConfigError("run.seeds: bad range " + value);
    for (std::int64_t s = lo; s <= hi; ++s) {
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
    return seeds;
  }
  std::stringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto s = parse_int("run.seeds", trim(cell));
    if (s < 0) throw ConfigError("run.seeds: negative seed");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw ConfigError("run.seeds: empty seed list");
  return seeds;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "env.dim") {
    cfg.env.dim = static_cast<int>(parse_int(key, value));
  } else if (key == "env.num_actions") {
    cfg.env.num_actions = static_cast<int>(parse_int(key, value));
  } else if (key == "env.noise") {
    if (value == "bernoulli") {
      cfg.env.noise = NoiseModel::kBernoulli;
    } else if (value == "gaussian") {
      cfg.env.noise = NoiseModel::kGaussian;
    } else {
      throw ConfigError("env.noise: expected bernoulli or gaussian, got '" +
                        value + "'");
    }
  } else if (key == "env.sigma") {
    cfg.env.sigma = parse_double(key, value);
  } else if (key == "env.reward_map") {
    if (value == "linear") {
      cfg.env.reward_map = RewardMap::kLinear;
    } else if (value == "bilinear") {
      cfg.env.reward_map = RewardMap::kBilinear;
    } else {
      throw ConfigError("env.reward_map: expected linear or bilinear, got '" +
                        value + "'");
    }
  } else if (key == "env.context_dim") {
    cfg.env.context_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "env.context_pool") {
    cfg.env.context_pool = static_cast<int>(parse_int(key, value));
  } else if (key == "env.gen_seed") {
    cfg.env.gen_seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "env.duplicates") {
    cfg.env.duplicates = static_cast<int>(parse_int(key, value));
  } else if (key == "env.embedding_file") {
    cfg.env.embedding_file = value;
  } else if (key == "policy.name") {
    cfg.policy.name = value;
  } else if (key == "policy.gamma") {
    cfg.policy.gamma = parse_auto(key, value);
  } else if (key == "policy.epsilon") {
    cfg.policy.epsilon = parse_auto(key, value);
  } else if (key == "policy.approx_c") {
    cfg.policy.approx_c = parse_double(key, value);
  } else if (key == "policy.regressor") {
    if (value != "ridge" && value != "bilinear") {
      throw ConfigError("policy.regressor: expected ridge or bilinear");
    }
    cfg.policy.regressor = value;
  } else if (key == "policy.ridge_rho") {
    cfg.policy.ridge_rho = parse_double(key, value);
  } else if (key == "policy.sgd_step") {
    cfg.policy.sgd_step = parse_double(key, value);
  } else if (key == "policy.delta") {
    cfg.policy.delta = parse_double(key, value);
  } else if (key == "policy.regsq_bound") {
    cfg.policy.regsq_bound = parse_auto(key, value);
  } else if (key == "run.T") {
    const auto t = parse_int(key, value);
    if (t <= 0) throw ConfigError("run.T must be positive");
    cfg.run.horizon = static_cast<std::uint64_t>(t);
  } else if (key == "run.seeds") {
    cfg.run.seeds = parse_seeds(value);
  } else if (key == "run.out") {
    cfg.run.out_dir = value;
  } else if (key == "run.jobs") {
    cfg.run.jobs = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)),
                         trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return cfg;
}

std::unique_ptr<Policy> make_policy(
    const ExperimentConfig& cfg, std::shared_ptr<const FiniteActionSet> set) {
  const int d = set->dim();
  const int dx =
      cfg.env.context_dim > 0 ? cfg.env.context_dim : cfg.env.dim;
  const auto make_regressor = [&]() -> std::unique_ptr<OnlineRegressor> {
    if (cfg.policy.regressor == "bilinear") {
      return std::make_unique<BilinearSgdRegressor>(d, dx,
                                                    cfg.policy.sgd_step);
    }
    return std::make_unique<RidgeRegressor>(d, cfg.policy.ridge_rho);
  };
  const double horizon = static_cast<double>(cfg.run.horizon);
  const std::string& name = cfg.policy.name;
  if (name == "spanner-greedy") {
    SpannerGreedyPolicy::Options opt;
    opt.approx_c = cfg.policy.approx_c;
    opt.epsilon = cfg.policy.epsilon;
    opt.horizon = horizon;
    opt.delta = cfg.policy.delta;
    opt.regsq_bound = cfg.policy.regsq_bound;
    return std::make_unique<SpannerGreedyPolicy>(set, make_regressor(), opt);
  }
  if (name == "spanner-igw" || name == "spanner-igw-practical") {
    SpannerIgwPolicy::Options opt;
    opt.approx_c = cfg.policy.approx_c;
    opt.gamma = cfg.policy.gamma;
    opt.practical = (name == "spanner-igw-practical");
    opt.horizon = horizon;
    opt.delta = cfg.policy.delta;
    opt.regsq_bound = cfg.policy.regsq_bound;
    return std::make_unique<SpannerIgwPolicy>(set, make_regressor(), opt);
  }
  if (name == "squarecb") {
    SquareCbPolicy::Options opt;
    opt.gamma = cfg.policy.gamma;
    opt.horizon = horizon;
    opt.delta = cfg.policy.delta;
    opt.regsq_bound = cfg.policy.regsq_bound;
    return std::make_unique<SquareCbPolicy>(set, make_regressor(), opt);
  }
  if (name == "epsilon-greedy") {
    EpsilonGreedyPolicy::Options opt;
    opt.epsilon = cfg.policy.epsilon;
    opt.horizon = horizon;
    opt.delta = cfg.policy.delta;
    opt.regsq_bound = cfg.policy.regsq_bound;
    return std::make_unique<EpsilonGreedyPolicy>(set, make_regressor(), opt);
  }
  throw ConfigError(
      "unknown policy '" + name +
      "' (expected spanner-greedy, spanner-igw, spanner-igw-practical, "
      "squarecb or epsilon-greedy)");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string round_log_csv(const RegretTracker& tracker) {
  std::string out =
      "round,context_id,action_id,reward,pseudo_regret_cum,"
      "realized_regret_cum,lambda,gamma,spanner_recomputed\n";
  for (const auto& r : tracker.rounds()) {
    out += std::to_string(r.round);
    out += ',';
    out += std::to_string(r.context_id);
    out += ',';
    out += std::to_string(r.action);
    out += ',';
    out += format_double(r.reward);
    out += ',';
    out += format_double(r.pseudo_regret_cum);
    out += ',';
    out += format_double(r.realized_regret_cum);
    out += ',';
    out += format_double(r.lambda);
    out += ',';
    out += format_double(r.gamma);
    out += ',';
    out += r.spanner_recomputed ? '1' : '0';
    out += '\n';
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  const LinearEnvironment env = LinearEnvironment::make(cfg.env);
  fs::create_directories(cfg.run.out_dir);

  const auto& seeds = cfg.run.seeds;
  std::vector<SeedOutcome> outcomes(seeds.size());
  std::vector<std::string> failures(seeds.size());

  const auto run_one = [&](std::size_t k) {
    try {
      auto policy = make_policy(cfg, env.actions_ptr());
      const RegretTracker tracker =
          run_episode(env, *policy, cfg.run.horizon, seeds[k]);
      const fs::path csv_path =
          fs::path(cfg.run.out_dir) /
          ("rounds_" + std::to_string(seeds[k]) + ".csv");
      std::ofstream out(csv_path, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + csv_path.string());
      out << round_log_csv(tracker);
      outcomes[k] = SeedOutcome{seeds[k], tracker.mean_reward(),
                                tracker.pseudo_regret(),
                                tracker.realized_regret()};
    } catch (const std::exception& e) {
      failures[k] = std::string("seed ") + std::to_string(seeds[k]) + ": " +
                    e.what();
    }
  };

  int jobs = cfg.run.jobs;
  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  jobs = std::min<int>(jobs, static_cast<int>(seeds.size()));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) run_one(k);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&]() {
        for (std::size_t k = next.fetch_add(1); k < seeds.size();
             k = next.fetch_add(1)) {
          run_one(k);
        }
      });
    }
    for (auto& th : workers) th.join();
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(f);
  }

  ExperimentResult result;
  result.seeds = std::move(outcomes);
  std::vector<double> mean_rewards, regrets;
  for (const auto& o : result.seeds) {
    mean_rewards.push_back(o.mean_reward);
    regrets.push_back(o.pseudo_regret);
  }
  double total = 0.0;
  for (double m : mean_rewards) total += m;
  result.mean_progressive_reward =
      total / static_cast<double>(mean_rewards.size());
  if (mean_rewards.size() >= 2) {
    result.reward_ci = bootstrap_ci(mean_rewards);
    result.regret_ci = bootstrap_ci(regrets);
  } else {
    result.reward_ci = {mean_rewards[0], mean_rewards[0]};
    result.regret_ci = {regrets[0], regrets[0]};
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  nlohmann::json summary;
  summary["policy"] = cfg.policy.name;
  summary["T"] = cfg.run.horizon;
  summary["env"] = {
      {"dim", cfg.env.dim},
      {"num_actions", cfg.env.num_actions},
      {"noise",
       cfg.env.noise == NoiseModel::kBernoulli ? "bernoulli" : "gaussian"},
      {"reward_map",
       cfg.env.reward_map == RewardMap::kLinear ? "linear" : "bilinear"},
      {"duplicates", cfg.env.duplicates},
      {"gen_seed", cfg.env.gen_seed},
  };
  summary["seeds"] = nlohmann::json::array();
  for (const auto& o : result.seeds) {
    summary["seeds"].push_back({{"seed", o.seed},
                                {"mean_reward", o.mean_reward},
                                {"pseudo_regret", o.pseudo_regret},
                                {"realized_regret", o.realized_regret}});
  }
  summary["mean_progressive_reward"] = result.mean_progressive_reward;
  summary["reward_ci90"] = {result.reward_ci.first, result.reward_ci.second};
  summary["final_regret_ci90"] = {result.regret_ci.first,
                                  result.regret_ci.second};
  summary["wall_clock_seconds"] = result.wall_seconds;
  std::ofstream sum_out(fs::path(cfg.run.out_dir) / "summary.json",
                        std::ios::binary);
  if (!sum_out) {
    throw ConfigError("cannot write summary.json in " + cfg.run.out_dir);
  }
  sum_out << summary.dump(2) << '\n';
  return result;
}

}  // namespace spancb

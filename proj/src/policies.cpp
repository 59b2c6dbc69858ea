#include "spancb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "spancb/errors.hpp"

namespace spancb {
namespace {

double uniform_draw(const CounterRng& rng, std::uint64_t round) {
  return rng.uniform(rng_stream::kActionSample, round, 0);
}

}  // namespace

void ExplorationDistribution::add(ActionId id, double prob) {
  for (auto& atom : atoms_) {
    if (atom.id == id) {
      atom.prob += prob;
      return;
    }
  }
  atoms_.push_back({id, prob});
}

double ExplorationDistribution::total() const {
  double t = 0.0;
  for (const auto& atom : atoms_) t += atom.prob;
  return t;
}

double ExplorationDistribution::prob_of(ActionId id) const {
  for (const auto& atom : atoms_) {
    if (atom.id == id) return atom.prob;
  }
  return 0.0;
}

void ExplorationDistribution::validate(double tol) const {
  if (atoms_.empty()) throw InvariantError("empty action distribution");
  // Comparisons are phrased so NaN masses fail them too.
  for (const auto& atom : atoms_) {
    if (!(atom.prob >= 0.0)) {
      throw InvariantError("invalid probability " +
                           std::to_string(atom.prob) + " on action " +
                           std::to_string(atom.id));
    }
  }
  const double t = total();
  if (!(std::abs(t - 1.0) <= tol)) {
    throw InvariantError("action probabilities sum to " + std::to_string(t));
  }
}

ActionId ExplorationDistribution::sample(double u) const {
  double cdf = 0.0;
  for (const auto& atom : atoms_) {
    cdf += atom.prob;
    if (u < cdf) return atom.id;
  }
  return atoms_.back().id;  // total mass can undershoot u by rounding
}

// All guards below are phrased so NaN inputs fail them as well.
double greedy_gamma_schedule(double horizon, double complexity, double regsq,
                             double delta) {
  if (!(horizon > 0.0) || !(complexity > 0.0) || !(delta > 0.0) ||
      !(delta < 1.0)) {
    throw ConfigError("greedy_gamma_schedule: bad horizon/complexity/delta");
  }
  if (!(regsq >= 0.0)) {
    throw ConfigError("greedy_gamma_schedule: regression bound must be >= 0");
  }
  const double num = 3.0 * horizon * std::sqrt(complexity);
  const double den = 2.0 * regsq + 64.0 * std::log(2.0 / delta);
  return std::max(1.0, std::pow(num / den, 2.0 / 3.0));
}

double epsilon_schedule(double gamma, double complexity) {
  if (!(gamma > 0.0)) throw ConfigError("epsilon_schedule: gamma must be > 0");
  return std::min(1.0, std::sqrt(complexity / (4.0 * gamma)));
}

double igw_gamma_schedule(double horizon, double complexity, double regsq,
                          double delta) {
  if (!(horizon > 0.0) || !(complexity > 0.0) || !(delta > 0.0) ||
      !(delta < 1.0)) {
    throw ConfigError("igw_gamma_schedule: bad horizon/complexity/delta");
  }
  if (!(regsq >= 0.0)) {
    throw ConfigError("igw_gamma_schedule: regression bound must be >= 0");
  }
  return std::sqrt(complexity * horizon /
                   (regsq + 32.0 * std::log(2.0 / delta)));
}

double default_regsq_bound(int dim, double horizon) {
  return dim * std::log(std::max(horizon, 2.0));
}

double solve_lambda(const std::vector<double>& q,
                    const std::vector<double>& gaps, double eta) {
  if (q.size() != gaps.size() || q.empty()) {
    throw ConfigError("solve_lambda: atom/gap size mismatch");
  }
  const auto h = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      s += q[i] / (lambda + eta * gaps[i]);
    }
    return s;
  };
  double lo = 0.5, hi = 1.0;
  for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) >= 1.0) {
      lo = mid;  // h decreases in lambda
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  if (std::abs(h(lambda) - 1.0) > 1e-8) {
    throw NumericalError(
        "lambda bisection left residual " + std::to_string(h(lambda) - 1.0) +
        "; zero-gap atoms must carry at least half the mass");
  }
  return lambda;
}

double solve_squarecb_lambda(const std::vector<double>& gaps, double gamma) {
  if (gaps.empty()) throw ConfigError("solve_squarecb_lambda: no actions");
  const double n = static_cast<double>(gaps.size());
  const auto h = [&](double lambda) {
    double s = 0.0;
    for (double g : gaps) s += 1.0 / (lambda + gamma * g);
    return s;
  };
  // h(0+) = +inf through the zero-gap greedy atom and h(n) <= 1, so the
  // root lies in (0, n].
  double lo = 0.0, hi = n;
  int iter = 0;
  for (; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > 1e-10) {
    throw NumericalError("squarecb lambda bisection did not converge");
  }
  const double lambda = 0.5 * (lo + hi);
  if (std::abs(h(lambda) - 1.0) > 1e-8) {
    throw NumericalError("squarecb lambda residual " +
                         std::to_string(h(lambda) - 1.0));
  }
  return lambda;
}

RegressionPolicy::RegressionPolicy(std::shared_ptr<const ActionSet> set,
                                   std::unique_ptr<OnlineRegressor> regressor)
    : set_(std::move(set)), regressor_(std::move(regressor)) {
  if (!set_) throw ConfigError("policy: null action set");
  if (!regressor_) throw ConfigError("policy: null regressor");
}

void RegressionPolicy::observe(const Context& x, ActionId a, double reward) {
  regressor_->update(x, set_->embed(x, a), reward);
}

SpannerGreedyPolicy::SpannerGreedyPolicy(
    std::shared_ptr<const ActionSet> set,
    std::unique_ptr<OnlineRegressor> regressor, const Options& options)
    : RegressionPolicy(std::move(set), std::move(regressor)),
      approx_c_(options.approx_c) {
  const int d = set_->dim();
  if (options.epsilon) {
    epsilon_ = *options.epsilon;
    if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) {
      throw ConfigError("spanner-greedy: epsilon must lie in [0, 1]");
    }
  } else {
    const double c_opt = approx_c_ * approx_c_ * d;
    const double regsq = options.regsq_bound
                             ? *options.regsq_bound
                             : default_regsq_bound(d, options.horizon);
    gamma_ = greedy_gamma_schedule(options.horizon, c_opt * d, regsq,
                                   options.delta);
    epsilon_ = epsilon_schedule(gamma_, c_opt * d);
  }
}

StepResult SpannerGreedyPolicy::step(const Context& x, std::uint64_t round,
                                     const CounterRng& rng) {
  StepResult result;
  const Eigen::VectorXd ghat = regressor_->predict(x);
  const ActionId greedy = set_->argmax(x, ghat);
  if (!cached_ || !set_->context_independent()) {
    cached_ = compute_spanner(*set_, x, approx_c_, init_spanner(*set_, x));
    result.diagnostics.spanner_recomputed = true;
  }
  const int d = set_->dim();
  for (ActionId id : cached_->ids) {
    result.distribution.add(id, epsilon_ / d);
  }
  result.distribution.add(greedy, 1.0 - epsilon_);
  result.distribution.validate();
  result.action = result.distribution.sample(uniform_draw(rng, round));
  result.diagnostics.epsilon = epsilon_;
  result.diagnostics.gamma = gamma_;
  result.diagnostics.spanner_size = d;
  result.diagnostics.spanner_iterations = cached_->stats.iterations;
  return result;
}

SpannerIgwPolicy::SpannerIgwPolicy(std::shared_ptr<const ActionSet> set,
                                   std::unique_ptr<OnlineRegressor> regressor,
                                   const Options& options)
    : RegressionPolicy(std::move(set), std::move(regressor)),
      practical_(options.practical),
      approx_c_(options.approx_c) {
  const int d = set_->dim();
  c_opt_ = approx_c_ * approx_c_ * d;
  if (options.gamma) {
    gamma_ = *options.gamma;
    if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) {
      throw ConfigError("spanner-igw: gamma must be finite and >= 0");
    }
  } else {
    const double regsq = options.regsq_bound
                             ? *options.regsq_bound
                             : default_regsq_bound(d, options.horizon);
    gamma_ = igw_gamma_schedule(options.horizon, c_opt_ * d, regsq,
                                options.delta);
  }
  if (practical_) {
    weighting_ = Reweighting{gamma_ / (4.0 * d), 1.0 + d};
  } else {
    weighting_ = Reweighting{gamma_ / (c_opt_ * d), 1.0};
  }
}

StepResult SpannerIgwPolicy::step(const Context& x, std::uint64_t round,
                                  const CounterRng& rng) {
  StepResult result;
  const int d = set_->dim();
  if (!init_ || !set_->context_independent()) {
    init_ = local_search_init(*set_, x);
    result.diagnostics.spanner_recomputed = true;
  }
  ReweightingContext rc(*set_, x, regressor_->predict(x), weighting_);
  const SpannerState spanner =
      reweighted_spanner(rc, approx_c_, init_->spanner, init_->radius);
  const ActionId greedy = rc.greedy();

  if (practical_) {
    // One atom per spanner action, remaining mass on the greedy action;
    // dbar = |S union {greedy}|.
    const bool greedy_in_spanner =
        std::count(spanner.ids.begin(), spanner.ids.end(), greedy) > 0;
    const double dbar = static_cast<double>(d) + (greedy_in_spanner ? 0 : 1);
    double assigned = 0.0;
    for (ActionId id : spanner.ids) {
      const double p = 1.0 / (dbar + weighting_.eta * rc.gap(id));
      result.distribution.add(id, p);
      assigned += p;
    }
    result.distribution.add(greedy, 1.0 - assigned);
  } else {
    ExplorationDistribution q;
    for (ActionId id : spanner.ids) {
      q.add(id, 0.5 / static_cast<double>(d));
    }
    q.add(greedy, 0.5);
    std::vector<double> mass, gaps;
    mass.reserve(q.atoms().size());
    gaps.reserve(q.atoms().size());
    for (const auto& atom : q.atoms()) {
      mass.push_back(atom.prob);
      gaps.push_back(rc.gap(atom.id));
    }
    const double lambda = solve_lambda(mass, gaps, weighting_.eta);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      result.distribution.add(q.atoms()[i].id,
                              mass[i] / (lambda + weighting_.eta * gaps[i]));
    }
    result.diagnostics.lambda = lambda;
  }
  result.distribution.validate();
  result.action = result.distribution.sample(uniform_draw(rng, round));
  result.diagnostics.gamma = gamma_;
  result.diagnostics.eta = weighting_.eta;
  result.diagnostics.spanner_size = static_cast<int>(spanner.ids.size());
  result.diagnostics.spanner_iterations = spanner.stats.iterations;
  return result;
}

SquareCbPolicy::SquareCbPolicy(std::shared_ptr<const FiniteActionSet> set,
                               std::unique_ptr<OnlineRegressor> regressor,
                               const Options& options)
    : RegressionPolicy(set, std::move(regressor)), finite_(set.get()) {
  if (options.gamma) {
    gamma_ = *options.gamma;
    if (!(gamma_ >= 0.0) || !std::isfinite(gamma_)) {
      throw ConfigError("squarecb: gamma must be finite and >= 0");
    }
  } else {
    const double regsq =
        options.regsq_bound
            ? *options.regsq_bound
            : default_regsq_bound(finite_->dim(), options.horizon);
    gamma_ = igw_gamma_schedule(options.horizon,
                                static_cast<double>(finite_->size()), regsq,
                                options.delta);
  }
}

StepResult SquareCbPolicy::step(const Context& x, std::uint64_t round,
                                const CounterRng& rng) {
  StepResult result;
  const Eigen::VectorXd s = finite_->scores(regressor_->predict(x));
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < s.size(); ++j) {
    if (s[j] > s[best]) best = j;
  }
  std::vector<double> gaps(static_cast<std::size_t>(s.size()));
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    gaps[static_cast<std::size_t>(j)] = s[best] - s[j];
  }
  const double lambda = solve_squarecb_lambda(gaps, gamma_);
  const std::vector<ActionId> ids = finite_->ids();
  for (std::size_t j = 0; j < ids.size(); ++j) {
    result.distribution.add(ids[j], 1.0 / (lambda + gamma_ * gaps[j]));
  }
  result.distribution.validate();
  result.action = result.distribution.sample(uniform_draw(rng, round));
  result.diagnostics.lambda = lambda;
  result.diagnostics.gamma = gamma_;
  return result;
}

EpsilonGreedyPolicy::EpsilonGreedyPolicy(
    std::shared_ptr<const FiniteActionSet> set,
    std::unique_ptr<OnlineRegressor> regressor, const Options& options)
    : RegressionPolicy(set, std::move(regressor)), finite_(set.get()) {
  if (options.epsilon) {
    epsilon_ = *options.epsilon;
    if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) {
      throw ConfigError("epsilon-greedy: epsilon must lie in [0, 1]");
    }
  } else {
    const double n = static_cast<double>(finite_->size());
    const double regsq =
        options.regsq_bound
            ? *options.regsq_bound
            : default_regsq_bound(finite_->dim(), options.horizon);
    const double gamma =
        greedy_gamma_schedule(options.horizon, n, regsq, options.delta);
    epsilon_ = epsilon_schedule(gamma, n);
  }
}

StepResult EpsilonGreedyPolicy::step(const Context& x, std::uint64_t round,
                                     const CounterRng& rng) {
  StepResult result;
  const ActionId greedy = finite_->argmax(x, regressor_->predict(x));
  const double n = static_cast<double>(finite_->size());
  for (ActionId id : finite_->ids()) {
    result.distribution.add(id, epsilon_ / n);
  }
  result.distribution.add(greedy, 1.0 - epsilon_);
  result.distribution.validate();
  result.action = result.distribution.sample(uniform_draw(rng, round));
  result.diagnostics.epsilon = epsilon_;
  return result;
}

}  // namespace spancb

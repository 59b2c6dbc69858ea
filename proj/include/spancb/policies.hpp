#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "spancb/actions.hpp"
#include "spancb/regressor.hpp"
#include "spancb/reweighted.hpp"
#include "spancb/rng.hpp"
#include "spancb/spanner.hpp"
#include "spancb/types.hpp"

namespace spancb {

struct DistributionAtom {
  ActionId id;
  double prob;
};

// Finitely supported action distribution.  Atom order is deterministic
// (insertion order with id merging) so that inverse-CDF sampling from a
// single uniform draw is reproducible.
class ExplorationDistribution {
 public:
  void add(ActionId id, double prob);  // merges mass into an existing atom
  const std::vector<DistributionAtom>& atoms() const { return atoms_; }
  double total() const;
  double prob_of(ActionId id) const;  // 0 when absent
  // Throws InvariantError on negative mass or |total - 1| > tol.
  void validate(double tol = 1e-9) const;
  ActionId sample(double u) const;

 private:
  std::vector<DistributionAtom> atoms_;
};

// Schedule formulas.  `complexity` is C_opt * d for the spanner policies
// and |A| for the finite-action baselines.
double greedy_gamma_schedule(double horizon, double complexity, double regsq,
                             double delta);
double epsilon_schedule(double gamma, double complexity);
double igw_gamma_schedule(double horizon, double complexity, double regsq,
                          double delta);
double default_regsq_bound(int dim, double horizon);

// Normalizer of p(a) = q(a) / (lambda + eta * gap(a)): the unique root of
// sum_a p(a) = 1 in [1/2, 1], found by bisection to 1e-10.  Requires the
// zero-gap atoms to carry at least half the q-mass; throws NumericalError
// when the residual stays above 1e-8.
double solve_lambda(const std::vector<double>& q,
                    const std::vector<double>& gaps, double eta);

struct StepDiagnostics {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  bool spanner_recomputed = false;
  int spanner_size = 0;
  int spanner_iterations = 0;
};

struct StepResult {
  ExplorationDistribution distribution;
  ActionId action = 0;
  StepDiagnostics diagnostics;
};

class Policy {
 public:
  virtual ~Policy() = default;
  // Builds the round's distribution and samples it with exactly one
  // uniform draw: rng.uniform(kActionSample, round, 0).
  virtual StepResult step(const Context& x, std::uint64_t round,
                          const CounterRng& rng) = 0;
  virtual void observe(const Context& x, ActionId a, double reward) = 0;
  virtual std::string_view name() const = 0;
  virtual const OnlineRegressor& regressor() const = 0;
};

// Shared plumbing: every policy here owns its regressor and updates it
// with exactly the realized (x, a, r) triple.
class RegressionPolicy : public Policy {
 public:
  RegressionPolicy(std::shared_ptr<const ActionSet> set,
                   std::unique_ptr<OnlineRegressor> regressor);

  void observe(const Context& x, ActionId a, double reward) override;
  const OnlineRegressor& regressor() const override { return *regressor_; }

 protected:
  const ActionSet& set() const { return *set_; }

  std::shared_ptr<const ActionSet> set_;
  std::unique_ptr<OnlineRegressor> regressor_;
};

// Mixes a uniform spanner design (mass epsilon) with the greedy action.
// The spanner is cached across rounds when the set is context independent.
class SpannerGreedyPolicy final : public RegressionPolicy {
 public:
  struct Options {
    double approx_c = 2.0;
    std::optional<double> epsilon;  // nullopt: schedule from horizon
    double horizon = 0.0;
    double delta = 0.05;
    std::optional<double> regsq_bound;
  };

  SpannerGreedyPolicy(std::shared_ptr<const ActionSet> set,
                      std::unique_ptr<OnlineRegressor> regressor,
                      const Options& options);

  StepResult step(const Context& x, std::uint64_t round,
                  const CounterRng& rng) override;
  std::string_view name() const override { return "spanner-greedy"; }
  double epsilon() const { return epsilon_; }

 private:
  double approx_c_;
  double epsilon_;
  double gamma_ = std::numeric_limits<double>::quiet_NaN();
  std::optional<SpannerState> cached_;
};

// Inverse-gap-weighted exploration over a reweighted spanner.  The strict
// sampler solves for lambda; the practical sampler assigns
// 1 / (dbar + beta gap) to each spanner atom and the rest to the greedy
// action, with the heavier reweighting offset 1 + d.
class SpannerIgwPolicy final : public RegressionPolicy {
 public:
  struct Options {
    double approx_c = 2.0;
    std::optional<double> gamma;  // nullopt: schedule from horizon
    bool practical = false;
    double horizon = 0.0;
    double delta = 0.05;
    std::optional<double> regsq_bound;
  };

  SpannerIgwPolicy(std::shared_ptr<const ActionSet> set,
                   std::unique_ptr<OnlineRegressor> regressor,
                   const Options& options);

  StepResult step(const Context& x, std::uint64_t round,
                  const CounterRng& rng) override;
  std::string_view name() const override {
    return practical_ ? "spanner-igw-practical" : "spanner-igw";
  }
  double gamma() const { return gamma_; }
  double eta() const { return weighting_.eta; }

 private:
  bool practical_;
  double approx_c_;
  double gamma_;
  double c_opt_;
  Reweighting weighting_;
  std::optional<InitCertificate> init_;
};

// Finite-action inverse-gap weighting: p(a) = 1 / (lambda + gamma gap(a))
// over the whole set, lambda solved on (0, |A|] so the masses sum to 1.
class SquareCbPolicy final : public RegressionPolicy {
 public:
  struct Options {
    std::optional<double> gamma;
    double horizon = 0.0;
    double delta = 0.05;
    std::optional<double> regsq_bound;
  };

  SquareCbPolicy(std::shared_ptr<const FiniteActionSet> set,
                 std::unique_ptr<OnlineRegressor> regressor,
                 const Options& options);

  StepResult step(const Context& x, std::uint64_t round,
                  const CounterRng& rng) override;
  std::string_view name() const override { return "squarecb"; }
  double gamma() const { return gamma_; }

 private:
  const FiniteActionSet* finite_;
  double gamma_;
};

// Uniform exploration with mass epsilon, rest on the greedy action.
class EpsilonGreedyPolicy final : public RegressionPolicy {
 public:
  struct Options {
    std::optional<double> epsilon;
    double horizon = 0.0;
    double delta = 0.05;
    std::optional<double> regsq_bound;
  };

  EpsilonGreedyPolicy(std::shared_ptr<const FiniteActionSet> set,
                      std::unique_ptr<OnlineRegressor> regressor,
                      const Options& options);

  StepResult step(const Context& x, std::uint64_t round,
                  const CounterRng& rng) override;
  std::string_view name() const override { return "epsilon-greedy"; }
  double epsilon() const { return epsilon_; }

 private:
  const FiniteActionSet* finite_;
  double epsilon_;
};

// Normalizer for the SquareCB distribution: unique root of
// sum_a 1 / (lambda + gamma gap_a) = 1 on (0, |A|].
double solve_squarecb_lambda(const std::vector<double>& gaps, double gamma);

}  // namespace spancb

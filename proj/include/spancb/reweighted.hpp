#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spancb/actions.hpp"
#include "spancb/spanner.hpp"
#include "spancb/types.hpp"

namespace spancb {

// Gap reweighting phibar(x, a) = phi(x, a) / sqrt(offset + eta * gap(a)),
// where gap(a) = fhat(x, ahat) - fhat(x, a) >= 0 under the current
// regression estimate.  offset = 1 is the exact scheme; the practical
// sampler uses offset = 1 + d.
struct Reweighting {
  double eta = 0.0;
  double offset = 1.0;

  double factor(double gap) const;
};

// Everything the reweighted operations need about the current round:
// the decision set, the context, ghat, the greedy action and its value.
class ReweightingContext {
 public:
  ReweightingContext(const ActionSet& set, Context x, Eigen::VectorXd ghat,
                     Reweighting weighting);

  const ActionSet& set() const { return *set_; }
  const Context& context() const { return x_; }
  const Eigen::VectorXd& ghat() const { return ghat_; }
  ActionId greedy() const { return greedy_; }
  double greedy_value() const { return greedy_value_; }
  const Reweighting& weighting() const { return weighting_; }

  double fhat(ActionId a) const;
  // Throws InvariantError when the gap is below -1e-9; clamps smaller
  // negative rounding noise to 0.
  double gap(ActionId a) const;
  double gap_of_value(double fhat_value) const;

 private:
  const ActionSet* set_;
  Context x_;
  Eigen::VectorXd ghat_;
  Reweighting weighting_;
  ActionId greedy_;
  double greedy_value_;
};

// phibar(x, a) for the current round.
Eigen::VectorXd reweight(const ReweightingContext& rc, ActionId a);

// Geometric grid {(3/4)^i} and {-(3/4)^i}, i = 1..N, with
// N = ceil(d * log_{4/3}((2 eta + offset) / radius)).  The smallest
// magnitude is guaranteed to reach the quotient maximizer's range.
struct GridSpec {
  static constexpr int kMaxPoints = 10000;

  int points_per_sign = 0;
  std::vector<double> points;  // +(3/4)^1..N then -(3/4)^1..N

  static GridSpec make(int dim, const Reweighting& weighting, double radius);
};

struct QuotientArgmaxResult {
  ActionId action = 0;
  double iota = 0.0;  // <phibar(x, a), theta>^2
  int grid_index = -1;
  std::vector<ActionId> candidates;  // one per grid point, in grid order
};

// Maximizes iota(a) = <phibar(x, a), theta>^2 to within a factor 1/2 by
// linearizing the quotient over the grid: each grid point costs one
// unweighted argmax with thetabar = 2 eps theta + eps^2 eta ghat.  All
// candidates are kept; the lowest grid index wins iota ties within 1e-12.
QuotientArgmaxResult quotient_argmax(const ReweightingContext& rc,
                                     const Eigen::VectorXd& theta,
                                     const GridSpec& grid);

// Local-search spanner for the reweighted embedding: accept a swap when
// |det(phibar(S_i(a)))| >= (sqrt(2) C / 2) |det(phibar(S))|, with the
// candidate produced by quotient_argmax.  Requires approx_c > sqrt(2).
// `init` must hold actions whose unweighted determinant is at least
// radius^d in absolute value.  Throws NonterminationError past
// 50 d log(max(e, eta / radius)) + 50 while-iterations.
SpannerState reweighted_spanner(const ReweightingContext& rc, double approx_c,
                                const SpannerState& init, double radius);

int reweighted_iteration_cap(int dim, double eta, double radius);

}  // namespace spancb

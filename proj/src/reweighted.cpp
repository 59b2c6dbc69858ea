#include "spancb/reweighted.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "spancb/errors.hpp"

namespace spancb {
namespace {

constexpr double kGapFloor = -1e-9;
constexpr double kAcceptSlack = 1e-12;
constexpr double kIotaTieTol = 1e-12;

}  // namespace

double Reweighting::factor(double gap) const {
  return 1.0 / std::sqrt(offset + eta * gap);
}

ReweightingContext::ReweightingContext(const ActionSet& set, Context x,
                                       Eigen::VectorXd ghat,
                                       Reweighting weighting)
    : set_(&set),
      x_(std::move(x)),
      ghat_(std::move(ghat)),
      weighting_(weighting) {
  if (!(weighting_.eta >= 0.0)) {
    throw ConfigError("ReweightingContext: eta must be nonnegative");
  }
  if (!(weighting_.offset >= 1.0)) {
    throw ConfigError("ReweightingContext: offset must be at least 1");
  }
  greedy_ = set_->argmax(x_, ghat_);
  greedy_value_ = ghat_.dot(set_->embed(x_, greedy_));
}

double ReweightingContext::fhat(ActionId a) const {
  return ghat_.dot(set_->embed(x_, a));
}

double ReweightingContext::gap_of_value(double fhat_value) const {
  const double gap = greedy_value_ - fhat_value;
  if (gap < kGapFloor) {
    throw InvariantError(
        "negative regression gap " + std::to_string(gap) +
        ": the greedy action is not the argmax of the supplied estimate");
  }
  return std::max(gap, 0.0);
}

double ReweightingContext::gap(ActionId a) const {
  return gap_of_value(fhat(a));
}

Eigen::VectorXd reweight(const ReweightingContext& rc, ActionId a) {
  return rc.weighting().factor(rc.gap(a)) *
         rc.set().embed(rc.context(), a);
}

GridSpec GridSpec::make(int dim, const Reweighting& weighting, double radius) {
  if (dim <= 0) throw ConfigError("GridSpec: dimension must be positive");
  if (!(radius > 0.0) || radius >= 1.0 + 1e-12) {
    throw ConfigError("GridSpec: radius must lie in (0, 1], got " +
                      std::to_string(radius));
  }
  const double r = std::min(radius, 1.0);
  const double ratio = (2.0 * weighting.eta + weighting.offset) / r;
  const double n_real = dim * std::log(ratio) / std::log(4.0 / 3.0);
  const int n = std::max(1, static_cast<int>(std::ceil(n_real)));
  if (n > kMaxPoints) {
    throw ConfigError("grid would need " + std::to_string(n) +
                      " points per sign (cap " + std::to_string(kMaxPoints) +
                      "); eta = " + std::to_string(weighting.eta) +
                      ", radius = " + std::to_string(radius) +
                      " are out of the supported range");
  }
  GridSpec grid;
  grid.points_per_sign = n;
  grid.points.reserve(static_cast<std::size_t>(2 * n));
  double p = 1.0;
  for (int i = 0; i < n; ++i) {
    p *= 0.75;
    grid.points.push_back(p);
  }
  p = 1.0;
  for (int i = 0; i < n; ++i) {
    p *= 0.75;
    grid.points.push_back(-p);
  }
  return grid;
}

QuotientArgmaxResult quotient_argmax(const ReweightingContext& rc,
                                     const Eigen::VectorXd& theta,
                                     const GridSpec& grid) {
  const auto& set = rc.set();
  const auto& w = rc.weighting();
  const Eigen::Index m = static_cast<Eigen::Index>(grid.points.size());
  Eigen::MatrixXd thetabars(theta.size(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double eps = grid.points[static_cast<std::size_t>(k)];
    thetabars.col(k) = 2.0 * eps * theta + (eps * eps * w.eta) * rc.ghat();
  }
  QuotientArgmaxResult out;
  out.candidates = set.argmax_batch(rc.context(), thetabars);
  double best = -1.0;
  for (std::size_t k = 0; k < out.candidates.size(); ++k) {
    const ActionId a = out.candidates[k];
    const Eigen::VectorXd phi = set.embed(rc.context(), a);
    const double scale = w.factor(rc.gap_of_value(rc.ghat().dot(phi)));
    const double proj = theta.dot(phi) * scale;
    const double iota = proj * proj;
    if (iota - best > kIotaTieTol * std::max(1.0, best)) {
      best = iota;
      out.action = a;
      out.iota = iota;
      out.grid_index = static_cast<int>(k);
    }
  }
  return out;
}

int reweighted_iteration_cap(int dim, double eta, double radius) {
  const double arg = std::max(std::exp(1.0), eta / radius);
  return static_cast<int>(50.0 * dim * std::log(arg)) + 50;
}

SpannerState reweighted_spanner(const ReweightingContext& rc, double approx_c,
                                const SpannerState& init, double radius) {
  constexpr double kSqrt2 = 1.4142135623730951;
  if (!(approx_c > kSqrt2)) {
    throw ConfigError(
        "reweighted_spanner: approximation factor must exceed sqrt(2)");
  }
  const int d = rc.set().dim();
  if (static_cast<int>(init.ids.size()) != d) {
    throw ConfigError("reweighted_spanner: init has " +
                      std::to_string(init.ids.size()) + " actions for R^" +
                      std::to_string(d));
  }
  const auto& w = rc.weighting();
  const GridSpec grid = GridSpec::make(d, w, radius);
  const double accept_factor = 0.5 * kSqrt2 * approx_c;
  const int cap = reweighted_iteration_cap(d, w.eta, radius);

  SpannerState state;
  state.ids = init.ids;
  Eigen::MatrixXd cols(d, d);
  for (int i = 0; i < d; ++i) {
    cols.col(i) = reweight(rc, state.ids[static_cast<std::size_t>(i)]);
  }
  state.matrix = DesignMatrixState::from_columns(cols);

  while (true) {
    if (++state.stats.iterations > cap) {
      throw NonterminationError(
          "reweighted_spanner exceeded " + std::to_string(cap) +
          " iterations (d = " + std::to_string(d) +
          ", eta = " + std::to_string(w.eta) +
          ", radius = " + std::to_string(radius) + ")");
    }
    bool replaced = false;
    for (int i = 0; i < d && !replaced; ++i) {
      const Eigen::VectorXd theta = state.matrix.det_functional(i);
      const QuotientArgmaxResult res = quotient_argmax(rc, theta, grid);
      const double value = std::sqrt(res.iota);
      if (value >= accept_factor * std::abs(state.matrix.det()) *
                       (1.0 - kAcceptSlack)) {
        state.matrix.rank_one_replace(i, reweight(rc, res.action));
        state.ids[static_cast<std::size_t>(i)] = res.action;
        ++state.stats.replacements;
        replaced = true;  // restart from the first column
      }
    }
    if (!replaced) break;
  }
  return state;
}

}  // namespace spancb

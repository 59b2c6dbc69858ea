#include "spancb/spanner.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "spancb/errors.hpp"

namespace spancb {
namespace {

constexpr double kInitDetFloor = 1e-12;
constexpr double kAcceptSlack = 1e-12;

// Best action for |<phi(x, a), theta>| using two signed argmax calls.
// Ties between the two candidates fall to the smaller id, matching the
// oracle's own tie rule.
std::pair<ActionId, double> abs_argmax(const ActionSet& set, const Context& x,
                                       const Eigen::VectorXd& theta) {
  const ActionId plus = set.argmax(x, theta);
  const ActionId minus = set.argmax(x, -theta);
  const double vplus = std::abs(theta.dot(set.embed(x, plus)));
  const double vminus = std::abs(theta.dot(set.embed(x, minus)));
  if (vplus > vminus) return {plus, vplus};
  if (vminus > vplus) return {minus, vminus};
  return {std::min(plus, minus), vplus};
}

}  // namespace

int spanner_iteration_cap(int dim, double approx_c) {
  const double log_c_d = std::log(static_cast<double>(dim)) /
                         std::log(approx_c);
  return static_cast<int>(50.0 * dim * log_c_d) + 50;
}

SpannerState init_spanner(const ActionSet& set, const Context& x) {
  const int d = set.dim();
  SpannerState state;
  state.ids.assign(static_cast<std::size_t>(d), ActionId{0});
  state.matrix = DesignMatrixState::identity(d);
  for (int i = 0; i < d; ++i) {
    const Eigen::VectorXd theta = state.matrix.det_functional(i);
    const auto [a, value] = abs_argmax(set, x, theta);
    if (value <= kInitDetFloor) {
      throw RankDeficiencyError(
          "spanner initialization: actions do not span R^" +
          std::to_string(d) + " (determinant fell below 1e-12 at column " +
          std::to_string(i + 1) + ")");
    }
    state.matrix.rank_one_replace(i, set.embed(x, a));
    state.ids[static_cast<std::size_t>(i)] = a;
  }
  return state;
}

SpannerState compute_spanner(const ActionSet& set, const Context& x,
                             double approx_c, SpannerState init) {
  if (!(approx_c > 1.0)) {
    throw ConfigError("compute_spanner: approximation factor must exceed 1");
  }
  const int d = set.dim();
  const int cap = spanner_iteration_cap(d, approx_c);
  SpannerState state = std::move(init);
  state.stats = SpannerStats{};
  while (true) {
    if (++state.stats.iterations > cap) {
      throw NonterminationError(
          "compute_spanner exceeded " + std::to_string(cap) +
          " iterations (d = " + std::to_string(d) +
          ", C = " + std::to_string(approx_c) + ")");
    }
    bool replaced = false;
    for (int i = 0; i < d && !replaced; ++i) {
      const Eigen::VectorXd theta = state.matrix.det_functional(i);
      const auto [a, value] = abs_argmax(set, x, theta);
      if (value >=
          approx_c * std::abs(state.matrix.det()) * (1.0 - kAcceptSlack)) {
        state.matrix.rank_one_replace(i, set.embed(x, a));
        state.ids[static_cast<std::size_t>(i)] = a;
        ++state.stats.replacements;
        replaced = true;  // restart the scan from the first column
      }
    }
    if (!replaced) break;
  }
  return state;
}

WeightedDesign spanner_to_design(const SpannerState& spanner) {
  const int d = spanner.matrix.dim();
  return WeightedDesign::make(
      spanner.ids, spanner.matrix.columns(),
      Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d)));
}

InitCertificate local_search_init(const ActionSet& set, const Context& x) {
  InitCertificate cert;
  cert.spanner = compute_spanner(set, x, 2.0, init_spanner(set, x));
  const int d = set.dim();
  cert.radius = std::pow(std::abs(cert.spanner.matrix.det()),
                         1.0 / static_cast<double>(d));
  return cert;
}

}  // namespace spancb

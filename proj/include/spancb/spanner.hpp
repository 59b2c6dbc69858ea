#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spancb/actions.hpp"
#include "spancb/linalg.hpp"
#include "spancb/types.hpp"

namespace spancb {

struct SpannerStats {
  int iterations = 0;    // passes of the outer while-loop
  int replacements = 0;  // accepted column swaps
};

// d actions whose embeddings form the columns of `matrix`, in the same
// order as `ids`.
struct SpannerState {
  std::vector<ActionId> ids;
  DesignMatrixState matrix;
  SpannerStats stats;
};

// Greedy initialization: for each column i, pick the action maximizing
// |<phi(x, a), theta_i>| with two argmax oracle calls (+theta and -theta).
// Throws RankDeficiencyError when the set does not span R^d (determinant
// would fall to 1e-12 or below).
SpannerState init_spanner(const ActionSet& set, const Context& x);

// Local search: replace column i by action a whenever
// |det(S_i(a))| >= approx_c * |det(S)| (relative slack 1e-12), restarting
// the scan after every accepted swap.  Requires approx_c > 1.  Throws
// NonterminationError past 50 d log_C(d) + 50 while-iterations.
SpannerState compute_spanner(const ActionSet& set, const Context& x,
                             double approx_c, SpannerState init);

int spanner_iteration_cap(int dim, double approx_c);

// Uniform design over the spanner actions.
WeightedDesign spanner_to_design(const SpannerState& spanner);

// C = 2 spanner together with the determinant certificate
// radius = |det|^{1/d}, used to size reweighted-spanner grids.
struct InitCertificate {
  SpannerState spanner;
  double radius = 0.0;
};

InitCertificate local_search_init(const ActionSet& set, const Context& x);

}  // namespace spancb

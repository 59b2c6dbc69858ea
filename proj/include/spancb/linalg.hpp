#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spancb/types.hpp"

namespace spancb {

// Square set of embedding columns Phi with cached inverse and determinant,
// maintained under rank-one column replacement.  The cache is rebuilt from
// scratch every kRefreshInterval replacements so rounding drift cannot
// accumulate over long runs.
class DesignMatrixState {
 public:
  static constexpr int kRefreshInterval = 500;
  static constexpr double kSingularDet = 1e-300;

  DesignMatrixState() = default;  // empty 0-dimensional state

  static DesignMatrixState identity(int dim);
  // Throws SingularMatrixError when the columns are (numerically) singular.
  static DesignMatrixState from_columns(const Eigen::MatrixXd& columns);

  int dim() const { return static_cast<int>(columns_.rows()); }
  const Eigen::MatrixXd& columns() const { return columns_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  double det() const { return det_; }
  std::int64_t replacements() const { return replacements_; }

  // Linear functional theta with <y, theta> = det of the matrix whose
  // column i is replaced by y.  theta = det(Phi) * (Phi^-1)^T e_i.
  Eigen::VectorXd det_functional(int i) const;

  // Determinant of the matrix obtained by replacing column i with y,
  // without modifying the state.
  double replaced_det(int i, const Eigen::VectorXd& y) const;

  // Replaces column i in O(d^2) via the Sherman-Morrison update.  Throws
  // SingularMatrixError (leaving the state untouched) when the resulting
  // determinant would vanish.
  void rank_one_replace(int i, const Eigen::VectorXd& column);

 private:
  void refresh_cache();

  Eigen::MatrixXd columns_;
  Eigen::MatrixXd inverse_;
  double det_ = 1.0;
  int updates_since_refresh_ = 0;
  std::int64_t replacements_ = 0;
};

// Finitely supported design q over embeddings, with second moment
// V(q) = sum_j weights[j] * support.col(j) * support.col(j)^T.
struct WeightedDesign {
  std::vector<ActionId> ids;     // aligned with support columns
  Eigen::MatrixXd support;       // d x m
  Eigen::VectorXd weights;       // m entries, nonnegative, summing to 1
  Eigen::MatrixXd second_moment; // d x d

  static WeightedDesign make(std::vector<ActionId> ids,
                             Eigen::MatrixXd support,
                             Eigen::VectorXd weights);
};

// ||phi||^2 in the V(q)^-1 norm, computed through a factorization solve.
// Throws RankDeficiencyError when V(q) is not safely positive definite
// (reciprocal condition below 1e-12).
double design_norm(const WeightedDesign& design, const Eigen::VectorXd& phi);

}  // namespace spancb

#include "spancb/linalg.hpp"

#include <cmath>
#include <string>

#include "spancb/errors.hpp"

namespace spancb {

DesignMatrixState DesignMatrixState::identity(int dim) {
  DesignMatrixState s;
  s.columns_ = Eigen::MatrixXd::Identity(dim, dim);
  s.inverse_ = Eigen::MatrixXd::Identity(dim, dim);
  s.det_ = 1.0;
  return s;
}

DesignMatrixState DesignMatrixState::from_columns(
    const Eigen::MatrixXd& columns) {
  if (columns.rows() != columns.cols() || columns.rows() == 0) {
    throw ConfigError("from_columns: expected a nonempty square matrix, got " +
                      std::to_string(columns.rows()) + "x" +
                      std::to_string(columns.cols()));
  }
  DesignMatrixState s;
  s.columns_ = columns;
  s.refresh_cache();
  return s;
}

void DesignMatrixState::refresh_cache() {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(columns_);
  const double det = lu.determinant();
  // Written so a NaN determinant also fails the check.
  if (!lu.isInvertible() || !(std::abs(det) > kSingularDet)) {
    throw SingularMatrixError(
        "design matrix is singular (|det| = " + std::to_string(std::abs(det)) +
        ")");
  }
  inverse_ = lu.inverse();
  det_ = det;
  updates_since_refresh_ = 0;
}

Eigen::VectorXd DesignMatrixState::det_functional(int i) const {
  if (i < 0 || i >= dim()) {
    throw ConfigError("det_functional: column index " + std::to_string(i) +
                      " out of range for dimension " + std::to_string(dim()));
  }
  if (!(std::abs(det_) > kSingularDet)) {
    throw SingularMatrixError("det_functional requested on a singular state");
  }
  return det_ * inverse_.row(i).transpose();
}

double DesignMatrixState::replaced_det(int i, const Eigen::VectorXd& y) const {
  // det(Phi with column i := y) = det(Phi) * e_i^T Phi^-1 y.
  return det_ * inverse_.row(i).dot(y);
}

void DesignMatrixState::rank_one_replace(int i, const Eigen::VectorXd& column) {
  if (i < 0 || i >= dim()) {
    throw ConfigError("rank_one_replace: column index " + std::to_string(i) +
                      " out of range for dimension " + std::to_string(dim()));
  }
  if (column.size() != dim()) {
    throw ConfigError("rank_one_replace: column has size " +
                      std::to_string(column.size()) + ", expected " +
                      std::to_string(dim()));
  }
  // ratio = e_i^T Phi^-1 y; this is both the determinant ratio and the
  // Sherman-Morrison denominator 1 + e_i^T Phi^-1 (y - phi_i).
  const double ratio = inverse_.row(i).dot(column);
  const double new_det = det_ * ratio;
  if (!(std::abs(new_det) > kSingularDet)) {
    throw SingularMatrixError(
        "rank_one_replace would make the design singular (column " +
        std::to_string(i) + ")");
  }
  const Eigen::RowVectorXd inv_row = inverse_.row(i);
  const Eigen::VectorXd u = column - columns_.col(i);
  const Eigen::VectorXd w = inverse_ * u;
  inverse_.noalias() -= w * (inv_row / ratio);
  columns_.col(i) = column;
  det_ = new_det;
  ++replacements_;
  if (++updates_since_refresh_ >= kRefreshInterval) refresh_cache();
}

WeightedDesign WeightedDesign::make(std::vector<ActionId> ids,
                                    Eigen::MatrixXd support,
                                    Eigen::VectorXd weights) {
  if (support.cols() != weights.size() ||
      static_cast<std::size_t>(support.cols()) != ids.size()) {
    throw ConfigError("WeightedDesign: ids, support and weights disagree");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights[j] < 0.0) {
      throw InvariantError("WeightedDesign: negative weight at atom " +
                           std::to_string(j));
    }
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvariantError("WeightedDesign: weights sum to " +
                         std::to_string(total));
  }
  WeightedDesign d;
  d.ids = std::move(ids);
  d.support = std::move(support);
  d.weights = std::move(weights);
  d.second_moment = d.support * d.weights.asDiagonal() * d.support.transpose();
  return d;
}

double design_norm(const WeightedDesign& design, const Eigen::VectorXd& phi) {
  if (phi.size() != design.second_moment.rows()) {
    throw ConfigError("design_norm: vector has size " +
                      std::to_string(phi.size()) + ", design has dimension " +
                      std::to_string(design.second_moment.rows()));
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(design.second_moment);
  // The rcond comparison is written so a NaN estimate also fails it.
  const double rcond = ldlt.rcond();
  const double min_pivot = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      min_pivot <= 0.0 || !(rcond >= 1e-12)) {
    throw RankDeficiencyError(
        "design second moment is rank deficient or too ill conditioned "
        "(support size " +
        std::to_string(design.support.cols()) + ", dimension " +
        std::to_string(design.second_moment.rows()) + ")");
  }
  return phi.dot(ldlt.solve(phi));
}

}  // namespace spancb

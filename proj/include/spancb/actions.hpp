#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spancb/types.hpp"

namespace spancb {

// Decision set with embeddings in the unit ball of R^d.  The argmax oracle
// is exact and resolves ties toward the smallest action id; every policy
// relies on that rule for reproducibility and duplicate invariance.
class ActionSet {
 public:
  virtual ~ActionSet() = default;

  virtual int dim() const = 0;
  virtual std::size_t size() const = 0;
  virtual std::vector<ActionId> ids() const = 0;  // ascending
  virtual Eigen::VectorXd embed(const Context& x, ActionId a) const = 0;
  virtual ActionId argmax(const Context& x,
                          const Eigen::VectorXd& theta) const = 0;
  // One argmax per column of `thetas`.  The default loops over argmax;
  // finite sets override it with a single matrix product.
  virtual std::vector<ActionId> argmax_batch(
      const Context& x, const Eigen::MatrixXd& thetas) const;
  // True when embed(x, a) does not depend on x, enabling spanner caching.
  virtual bool context_independent() const { return false; }
};

// Fixed embedding matrix, one column per action, columns ordered by
// ascending id.  Construction enforces the unit-norm bound and verifies
// that the embeddings span R^d.
class FiniteActionSet final : public ActionSet {
 public:
  FiniteActionSet(std::vector<ActionId> ids, Eigen::MatrixXd embeddings);

  int dim() const override { return static_cast<int>(embeddings_.rows()); }
  std::size_t size() const override { return ids_.size(); }
  std::vector<ActionId> ids() const override { return ids_; }
  Eigen::VectorXd embed(const Context& x, ActionId a) const override;
  ActionId argmax(const Context& x,
                  const Eigen::VectorXd& theta) const override;
  std::vector<ActionId> argmax_batch(
      const Context& x, const Eigen::MatrixXd& thetas) const override;
  bool context_independent() const override { return true; }

  const Eigen::MatrixXd& embeddings() const { return embeddings_; }
  // Phi^T theta, aligned with ids().
  Eigen::VectorXd scores(const Eigen::VectorXd& theta) const;
  // Copy with `copies` exact duplicates of action `source` appended under
  // fresh ids strictly greater than every existing id.
  FiniteActionSet with_duplicates(ActionId source, int copies) const;

 private:
  Eigen::Index index_of(ActionId a) const;

  std::vector<ActionId> ids_;
  Eigen::MatrixXd embeddings_;  // d x n
};

// Reads `action_id,dim_0,...,dim_{d-1}` rows.  Throws ConfigError on
// malformed input and InvariantError (naming the row) when an embedding
// norm exceeds 1.
FiniteActionSet load_embeddings_csv(const std::string& path);

}  // namespace spancb

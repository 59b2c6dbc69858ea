#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spancb/types.hpp"

namespace spancb {

// Online estimate ghat of the context-to-parameter map: predictions always
// lie in the unit ball.  Rewards outside [-1, 1] are clipped and counted
// rather than rejected; the counter is surfaced for diagnostics.
class OnlineRegressor {
 public:
  virtual ~OnlineRegressor() = default;

  virtual Eigen::VectorXd predict(const Context& x) const = 0;

  void update(const Context& x, const Eigen::VectorXd& action_embedding,
              double reward);

  std::int64_t update_count() const { return updates_; }
  std::int64_t clipped_rewards() const { return clipped_; }

 private:
  virtual void do_update(const Context& x,
                         const Eigen::VectorXd& action_embedding,
                         double reward) = 0;

  std::int64_t updates_ = 0;
  std::int64_t clipped_ = 0;
};

// Context-free linear model f(x, a) = <phi(a), theta>.  predict() returns
// the ridge solution (Gram + rho I)^-1 b projected onto the unit ball;
// before any update that is the zero vector.
class RidgeRegressor final : public OnlineRegressor {
 public:
  explicit RidgeRegressor(int dim, double rho = 1.0);

  Eigen::VectorXd predict(const Context& x) const override;

 private:
  void do_update(const Context& x, const Eigen::VectorXd& phi,
                 double reward) override;

  double rho_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
  mutable Eigen::VectorXd cached_theta_;
  mutable bool dirty_ = true;
};

// Bilinear model f(x, a) = <phi(a), W x> trained by SGD on the halved
// squared loss, step size step0 / sqrt(t).  W is rescaled after each step
// so every prediction W x stays inside the unit ball for ||x|| <= 1.
class BilinearSgdRegressor final : public OnlineRegressor {
 public:
  BilinearSgdRegressor(int dim, int context_dim, double step0 = 0.05);

  Eigen::VectorXd predict(const Context& x) const override;
  const Eigen::MatrixXd& weights() const { return weights_; }

 private:
  void do_update(const Context& x, const Eigen::VectorXd& phi,
                 double reward) override;

  double step0_;
  Eigen::MatrixXd weights_;  // dim x context_dim
};

}  // namespace spancb

#include "spancb/regressor.hpp"

#include <cmath>
#include <string>

#include "spancb/errors.hpp"

namespace spancb {
namespace {

void project_unit_ball(Eigen::VectorXd& v) {
  const double n = v.norm();
  if (n > 1.0) v /= n;
}

}  // namespace

void OnlineRegressor::update(const Context& x,
                             const Eigen::VectorXd& action_embedding,
                             double reward) {
  if (std::isnan(reward)) {
    throw InvariantError("regressor update received a NaN reward");
  }
  if (reward < -1.0 || reward > 1.0) {
    ++clipped_;
    reward = std::min(1.0, std::max(-1.0, reward));
  }
  do_update(x, action_embedding, reward);
  ++updates_;
}

RidgeRegressor::RidgeRegressor(int dim, double rho) : rho_(rho) {
  if (dim <= 0) throw ConfigError("RidgeRegressor: dimension must be positive");
  if (!(rho > 0.0)) throw ConfigError("RidgeRegressor: rho must be positive");
  gram_ = Eigen::MatrixXd::Zero(dim, dim);
  moment_ = Eigen::VectorXd::Zero(dim);
  cached_theta_ = Eigen::VectorXd::Zero(dim);
  dirty_ = false;
}

Eigen::VectorXd RidgeRegressor::predict(const Context&) const {
  if (dirty_) {
    Eigen::MatrixXd reg = gram_;
    reg.diagonal().array() += rho_;
    cached_theta_ = reg.ldlt().solve(moment_);
    project_unit_ball(cached_theta_);
    dirty_ = false;
  }
  return cached_theta_;
}

void RidgeRegressor::do_update(const Context&, const Eigen::VectorXd& phi,
                               double reward) {
  if (phi.size() != gram_.rows()) {
    throw ConfigError("RidgeRegressor: embedding size " +
                      std::to_string(phi.size()) + " does not match " +
                      std::to_string(gram_.rows()));
  }
  gram_.noalias() += phi * phi.transpose();
  moment_.noalias() += reward * phi;
  dirty_ = true;
}

BilinearSgdRegressor::BilinearSgdRegressor(int dim, int context_dim,
                                           double step0)
    : step0_(step0) {
  if (dim <= 0 || context_dim <= 0) {
    throw ConfigError("BilinearSgdRegressor: dimensions must be positive");
  }
  if (!(step0 > 0.0)) {
    throw ConfigError("BilinearSgdRegressor: step size must be positive");
  }
  weights_ = Eigen::MatrixXd::Zero(dim, context_dim);
}

Eigen::VectorXd BilinearSgdRegressor::predict(const Context& x) const {
  if (x.features.size() != weights_.cols()) {
    throw ConfigError("BilinearSgdRegressor: context has " +
                      std::to_string(x.features.size()) +
                      " features, expected " + std::to_string(weights_.cols()));
  }
  Eigen::VectorXd g = weights_ * x.features;
  project_unit_ball(g);
  return g;
}

void BilinearSgdRegressor::do_update(const Context& x,
                                     const Eigen::VectorXd& phi,
                                     double reward) {
  if (x.features.size() != weights_.cols() || phi.size() != weights_.rows()) {
    throw ConfigError("BilinearSgdRegressor: shape mismatch in update");
  }
  // Halved squared loss 0.5 * (<phi, W x> - r)^2, so the gradient is
  // (<phi, W x> - r) phi x^T and a single step from W = 0 with r = 1
  // lands exactly on step0 * phi x^T.
  const double lr =
      step0_ / std::sqrt(static_cast<double>(update_count() + 1));
  const double residual = phi.dot(weights_ * x.features) - reward;
  weights_.noalias() -= lr * residual * phi * x.features.transpose();
  // Frobenius rescaling: all rows shrink by the same factor, which keeps
  // ||W x|| <= ||W||_F <= 1 for every unit-ball context.
  const double fn = weights_.norm();
  if (fn > 1.0) weights_ /= fn;
}

}  // namespace spancb

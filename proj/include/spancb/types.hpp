#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace spancb {

using ActionId = std::int64_t;

// Observed side information.  `features` may be empty when the reward
// model does not depend on the context.
struct Context {
  std::int64_t id = 0;
  Eigen::VectorXd features;
};

}  // namespace spancb

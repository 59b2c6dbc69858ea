#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spancb/errors.hpp"
#include "spancb/linalg.hpp"
#include "spancb/rng.hpp"
#include "test_oracles.hpp"

using spancb::CounterRng;
using spancb::DesignMatrixState;
using spancb::WeightedDesign;

namespace {

Eigen::MatrixXd random_matrix(const CounterRng& rng, std::uint64_t index,
                              int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  std::uint64_t draw = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = 2.0 * rng.uniform(7, index, draw++) - 1.0;
    }
  }
  return m;
}

Eigen::VectorXd random_vector(const CounterRng& rng, std::uint64_t index,
                              int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform(8, index, i) - 1.0;
  return v;
}

double max_rel_err(const Eigen::MatrixXd& got, const test_oracle::Mat& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index j = 0; j < got.cols(); ++j) {
      const double w = want[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(j)];
      const double scale = std::max(1.0, std::abs(w));
      worst = std::max(worst, std::abs(got(i, j) - w) / scale);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("det functional of the identity is the basis vector") {
  const auto state = DesignMatrixState::identity(4);
  for (int i = 0; i < 4; ++i) {
    const Eigen::VectorXd theta = state.det_functional(i);
    CHECK(theta.isApprox(Eigen::VectorXd::Unit(4, i), 1e-15));
  }
}

TEST_CASE("det functional substitution matches the cofactor oracle") {
  const CounterRng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd cols = random_matrix(rng, 100 + trial, 4, 4);
    cols += 0.5 * Eigen::MatrixXd::Identity(4, 4);  // keep it invertible
    const auto state = DesignMatrixState::from_columns(cols);
    const Eigen::VectorXd y = random_vector(rng, 200 + trial, 4);
    const int i = trial % 4;
    const Eigen::VectorXd theta = state.det_functional(i);

    Eigen::MatrixXd replaced = cols;
    replaced.col(i) = y;
    const double oracle = test_oracle::cofactor_det(
        test_oracle::from_eigen(replaced));
    CHECK(theta.dot(y) ==
          doctest::Approx(oracle).epsilon(1e-10).scale(std::abs(oracle)));
    CHECK(state.replaced_det(i, y) == doctest::Approx(oracle).epsilon(1e-10));
    // Substituting the current column back reproduces the determinant.
    CHECK(theta.dot(cols.col(i)) == doctest::Approx(state.det()).epsilon(1e-12));
  }
}

TEST_CASE("rank-one replacements track the fresh-recompute oracle") {
  const CounterRng rng(99);
  Eigen::MatrixXd cols =
      random_matrix(rng, 0, 5, 5) + 2.0 * Eigen::MatrixXd::Identity(5, 5);
  auto state = DesignMatrixState::from_columns(cols);
  int applied = 0;
  for (int step = 0; applied < 100; ++step) {
    const int i = step % 5;
    Eigen::VectorXd y = random_vector(rng, 1000 + step, 5);
    y[i] += 2.0;  // bias toward well-conditioned replacements
    Eigen::MatrixXd replaced = state.columns();
    replaced.col(i) = y;
    const double target =
        test_oracle::cofactor_det(test_oracle::from_eigen(replaced));
    // Keep each swap well conditioned: the accuracy contract covers
    // replacement ratios that stay within a moderate band.
    const double ratio = std::abs(target / state.det());
    if (std::abs(target) < 5e-1 || ratio < 0.3 || ratio > 3.0) continue;
    state.rank_one_replace(i, y);
    ++applied;

    CHECK(state.det() ==
          doctest::Approx(target).epsilon(1e-8).scale(std::abs(target)));
    const auto inv_oracle = test_oracle::gauss_jordan_inverse(
        test_oracle::from_eigen(state.columns()));
    CHECK(max_rel_err(state.inverse(), inv_oracle) < 1e-8);
    const Eigen::MatrixXd prod = state.inverse() * state.columns();
    CHECK((prod - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
          1e-8);
  }
  CHECK(state.replacements() == 100);
}

TEST_CASE("cache refresh resets accumulated drift") {
  const CounterRng rng(5);
  auto state = DesignMatrixState::from_columns(
      Eigen::MatrixXd::Identity(3, 3));
  REQUIRE(DesignMatrixState::kRefreshInterval == 500);
  // Push well past the refresh interval.  Mid-chain drift may approach
  // 1e-6 relative; after the 500th replacement the cache is rebuilt from
  // scratch, so the final state must be near machine precision again.
  int applied = 0;
  for (int step = 0; applied <= 505; ++step) {
    const int i = step % 3;
    Eigen::VectorXd y = random_vector(rng, 4000 + step, 3);
    y[i] += 1.5;
    Eigen::MatrixXd replaced = state.columns();
    replaced.col(i) = y;
    const double target =
        test_oracle::cofactor_det(test_oracle::from_eigen(replaced));
    if (std::abs(target) < 1e-1) continue;
    state.rank_one_replace(i, y);
    ++applied;
    CHECK(state.det() ==
          doctest::Approx(target).epsilon(1e-6).scale(std::abs(target)));
  }
  const auto inv_oracle = test_oracle::gauss_jordan_inverse(
      test_oracle::from_eigen(state.columns()));
  CHECK(max_rel_err(state.inverse(), inv_oracle) < 1e-10);
}

TEST_CASE("singular replacements are rejected and leave the state intact") {
  auto state = DesignMatrixState::from_columns(
      Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd cols_before = state.columns();
  const double det_before = state.det();
  // Replacing column 0 with e_2 duplicates a column: determinant 0.
  CHECK_THROWS_AS(state.rank_one_replace(0, Eigen::VectorXd::Unit(3, 2)),
                  spancb::SingularMatrixError);
  CHECK(state.columns() == cols_before);
  CHECK(state.det() == det_before);
}

TEST_CASE("from_columns rejects singular input") {
  Eigen::MatrixXd cols(2, 2);
  cols << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(DesignMatrixState::from_columns(cols),
                  spancb::SingularMatrixError);
}

TEST_CASE("design norm of a uniform basis design is the dimension") {
  const int d = 4;
  const auto design = WeightedDesign::make(
      {0, 1, 2, 3}, Eigen::MatrixXd::Identity(d, d),
      Eigen::VectorXd::Constant(d, 0.25));
  for (int i = 0; i < d; ++i) {
    CHECK(design_norm(design, Eigen::VectorXd::Unit(d, i)) ==
          doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("design norm matches the oracle solve on random designs") {
  const CounterRng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    Eigen::MatrixXd support = random_matrix(rng, 300 + trial, d, 6);
    for (int j = 0; j < 6; ++j) support.col(j) /= (support.col(j).norm() + 1.0);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
    const auto design = WeightedDesign::make({0, 1, 2, 3, 4, 5},
                                             support, w);
    const Eigen::VectorXd phi = random_vector(rng, 400 + trial, d);

    const auto v = test_oracle::from_eigen(design.second_moment);
    const std::vector<double> b(phi.data(), phi.data() + d);
    const auto y = test_oracle::solve(v, b);
    double want = 0.0;
    for (int i = 0; i < d; ++i) want += phi[i] * y[static_cast<std::size_t>(i)];
    CHECK(design_norm(design, phi) ==
          doctest::Approx(want).epsilon(1e-9).scale(std::abs(want)));
  }
}

TEST_CASE("design norm reports rank-deficient designs") {
  // Two copies of the same direction in R^2: V(q) has rank 1.
  Eigen::MatrixXd support(2, 2);
  support << 1.0, 1.0, 0.0, 0.0;
  const auto design = WeightedDesign::make(
      {0, 1}, support, Eigen::VectorXd::Constant(2, 0.5));
  CHECK_THROWS_WITH_AS(
      design_norm(design, Eigen::VectorXd::Unit(2, 1)),
      doctest::Contains("rank deficient"), spancb::RankDeficiencyError);
}

TEST_CASE("weighted design validates its inputs") {
  CHECK_THROWS_AS(WeightedDesign::make({0, 1},
                                       Eigen::MatrixXd::Identity(2, 2),
                                       Eigen::VectorXd::Constant(2, 0.7)),
                  spancb::InvariantError);
  Eigen::VectorXd bad(2);
  bad << 1.5, -0.5;
  CHECK_THROWS_AS(
      WeightedDesign::make({0, 1}, Eigen::MatrixXd::Identity(2, 2), bad),
      spancb::InvariantError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "spancb/actions.hpp"
#include "spancb/errors.hpp"
#include "spancb/reweighted.hpp"
#include "spancb/rng.hpp"
#include "spancb/spanner.hpp"
#include "test_util.hpp"

using spancb::ActionId;
using spancb::ConfigError;
using spancb::Context;
using spancb::CounterRng;
using spancb::FiniteActionSet;
using spancb::GridSpec;
using spancb::InvariantError;
using spancb::Reweighting;
using spancb::ReweightingContext;
using spancb::SpannerState;

namespace {

const Context kCtx{0, Eigen::VectorXd()};

FiniteActionSet random_set(int seed, int d, int n) {
  const CounterRng rng(static_cast<std::uint64_t>(seed));
  std::vector<ActionId> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  return FiniteActionSet(ids, test_util::random_ball_columns(rng, 11, d, n));
}

Eigen::VectorXd random_ball_vector(int seed, int n) {
  const CounterRng rng(static_cast<std::uint64_t>(seed));
  Eigen::VectorXd v = test_util::random_vector(rng, 17, n);
  if (v.norm() > 1.0) v /= v.norm();
  return v;
}

// Brute force over the whole action set: the true maximum of
// iota(a) = <phibar(a), theta>^2, evaluated through reweight().
double iota_max_oracle(const ReweightingContext& rc,
                       const Eigen::VectorXd& theta) {
  double best = 0.0;
  for (ActionId a : rc.set().ids()) {
    const double proj = theta.dot(spancb::reweight(rc, a));
    best = std::max(best, proj * proj);
  }
  return best;
}

// Grid radius that provably satisfies the half-optimality precondition:
// iota of the true maximizer is at least (r / sqrt(offset + 2 eta))^(2d).
double covering_radius(double iota_max, int d, const Reweighting& w) {
  const double r = 0.95 * std::sqrt(w.offset + 2.0 * w.eta) *
                   std::pow(iota_max, 1.0 / (2.0 * d));
  return std::min(0.999, r);
}

}  // namespace

TEST_CASE("reweighting factor has the closed form 1/sqrt(offset + eta gap)") {
  const Reweighting unit{1.0, 1.0};
  CHECK(unit.factor(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(unit.factor(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(unit.factor(2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  const Reweighting off{2.0, 4.0};
  CHECK(off.factor(0.5) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));

  const Reweighting flat{0.0, 1.0};  // eta = 0 leaves embeddings untouched
  CHECK(flat.factor(2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reweighted embedding divides by the root of the shifted gap") {
  Eigen::MatrixXd emb = Eigen::MatrixXd::Identity(2, 2);
  const FiniteActionSet set({0, 1}, emb);
  const ReweightingContext rc(set, kCtx, Eigen::Vector2d(1.0, 0.0),
                              Reweighting{1.0, 1.0});
  CHECK(rc.greedy() == 0);
  CHECK(rc.greedy_value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rc.gap(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rc.gap(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spancb::reweight(rc, 0).isApprox(Eigen::Vector2d(1.0, 0.0), 1e-15));
  CHECK(spancb::reweight(rc, 1).isApprox(
      Eigen::Vector2d(0.0, 1.0 / std::sqrt(2.0)), 1e-15));
}

TEST_CASE("greedy action and gaps match a direct scan") {
  const FiniteActionSet set = random_set(60, 3, 14);
  const Eigen::VectorXd ghat = random_ball_vector(61, 3);
  const ReweightingContext rc(set, kCtx, ghat, Reweighting{2.0, 1.0});

  double best = -2.0;
  ActionId best_id = -1;
  for (ActionId a : set.ids()) {
    const double f = ghat.dot(set.embed(kCtx, a));
    if (f > best) {
      best = f;
      best_id = a;
    }
  }
  CHECK(rc.greedy() == best_id);
  CHECK(rc.greedy_value() == doctest::Approx(best).epsilon(1e-15));
  for (ActionId a : set.ids()) {
    CHECK(rc.gap(a) == doctest::Approx(best - rc.fhat(a)).epsilon(1e-12));
    CHECK(rc.gap(a) >= 0.0);
  }
}

TEST_CASE("a value above the greedy maximum is an invariant violation") {
  const FiniteActionSet set = random_set(62, 3, 8);
  const ReweightingContext rc(set, kCtx, random_ball_vector(63, 3),
                              Reweighting{1.0, 1.0});
  CHECK_THROWS_AS(rc.gap_of_value(rc.greedy_value() + 1.0), InvariantError);
  // Sub-tolerance rounding noise is clamped, not rejected.
  CHECK(rc.gap_of_value(rc.greedy_value() + 1e-10) == 0.0);
}

TEST_CASE("reweighting configuration errors") {
  const FiniteActionSet set = random_set(64, 2, 4);
  CHECK_THROWS_AS(ReweightingContext(set, kCtx, Eigen::Vector2d(1.0, 0.0),
                                     Reweighting{-0.5, 1.0}),
                  ConfigError);
  CHECK_THROWS_AS(ReweightingContext(set, kCtx, Eigen::Vector2d(1.0, 0.0),
                                     Reweighting{1.0, 0.5}),
                  ConfigError);
}

TEST_CASE("grid size matches the ceiling formula") {
  // d = 2, eta = 1, offset = 1, radius = 1/2:
  // N = ceil(2 ln(6) / ln(4/3)) = 13.
  const GridSpec grid = GridSpec::make(2, Reweighting{1.0, 1.0}, 0.5);
  CHECK(grid.points_per_sign == 13);
  REQUIRE(grid.points.size() == 26);
  CHECK(grid.points[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(grid.points[13] == doctest::Approx(-0.75).epsilon(1e-15));
  for (int i = 1; i < 13; ++i) {
    CHECK(grid.points[static_cast<std::size_t>(i)] ==
          doctest::Approx(0.75 * grid.points[static_cast<std::size_t>(i - 1)])
              .epsilon(1e-15));
  }
  // Coverage: the smallest magnitude reaches below (r / (2 eta + offset))^d.
  const double smallest = grid.points[12];
  CHECK(smallest <= std::pow(0.5 / 3.0, 2) * (1.0 + 1e-12));
}

TEST_CASE("grid rejects unusable radii and oversized requests") {
  const Reweighting w{1.0, 1.0};
  CHECK_THROWS_AS(GridSpec::make(2, w, 0.0), ConfigError);
  CHECK_THROWS_AS(GridSpec::make(2, w, -0.25), ConfigError);
  CHECK_THROWS_AS(GridSpec::make(2, w, 1.5), ConfigError);
  CHECK_THROWS_AS(GridSpec::make(0, w, 0.5), ConfigError);
  // 1000 ln(2e12) / ln(4/3) is far past the 10000-point cap.
  CHECK_THROWS_AS(GridSpec::make(1000, Reweighting{1e6, 1.0}, 1e-6),
                  ConfigError);
  CHECK_NOTHROW(GridSpec::make(2, w, 1.0));
}

TEST_CASE("quotient argmax is within a factor two of the brute force") {
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int d = 3;
    const FiniteActionSet set = random_set(70 + trial, d, 20);
    const double eta = std::vector<double>{0.0, 0.5, 2.0, 10.0}
        [static_cast<std::size_t>(trial % 4)];
    const double offset = (trial % 2 == 0) ? 1.0 : 1.0 + d;
    const ReweightingContext rc(set, kCtx, random_ball_vector(100 + trial, d),
                                Reweighting{eta, offset});
    const Eigen::VectorXd theta =
        test_util::random_vector(CounterRng(200 + trial), 1, d);

    const double iota_max = iota_max_oracle(rc, theta);
    if (iota_max < 1e-8) continue;  // degenerate draw, nothing to certify
    const double radius = covering_radius(iota_max, d, rc.weighting());
    const GridSpec grid = GridSpec::make(d, rc.weighting(), radius);
    const auto res = spancb::quotient_argmax(rc, theta, grid);

    CHECK(res.iota >= 0.5 * iota_max * (1.0 - 1e-9));
    CHECK(res.iota <= iota_max * (1.0 + 1e-12));
    CHECK(res.candidates.size() == grid.points.size());
    REQUIRE(res.grid_index >= 0);
    // The winner really is the candidate produced at its grid point, and
    // every candidate matches a direct argmax at that point.
    for (std::size_t k = 0; k < res.candidates.size(); ++k) {
      const double eps = grid.points[k];
      const Eigen::VectorXd thetabar =
          2.0 * eps * theta + eps * eps * eta * rc.ghat();
      CHECK(res.candidates[k] == set.argmax(kCtx, thetabar));
    }
    CHECK(res.action == res.candidates[static_cast<std::size_t>(res.grid_index)]);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("iota ties resolve to the lowest grid index") {
  // With eta = 0 every positive grid point linearizes to the same argmax,
  // so the first grid point must win.
  const CounterRng rng(77);
  Eigen::MatrixXd emb = 0.8 * test_util::random_ball_columns(rng, 11, 3, 9);
  emb.col(0) = Eigen::Vector3d::UnitX();
  std::vector<ActionId> ids{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const FiniteActionSet set(ids, emb);
  const ReweightingContext rc(set, kCtx, random_ball_vector(78, 3),
                              Reweighting{0.0, 1.0});
  const GridSpec grid = GridSpec::make(3, rc.weighting(), 0.5);
  const auto res =
      spancb::quotient_argmax(rc, Eigen::Vector3d::UnitX(), grid);
  CHECK(res.grid_index == 0);
  CHECK(res.action == 0);
  CHECK(res.iota == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reweighted spanner certifies the factor for the reweighted basis") {
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 3;
    const FiniteActionSet set = random_set(80 + trial, d, 15);
    const double eta = (trial % 2 == 0) ? 0.5 : 3.0;
    const double offset = (trial % 3 == 0) ? 1.0 + d : 1.0;
    const ReweightingContext rc(set, kCtx, random_ball_vector(90 + trial, d),
                                Reweighting{eta, offset});
    const spancb::InitCertificate cert = spancb::local_search_init(set, kCtx);

    for (const double c : {1.5, 2.0}) {
      const SpannerState spanner =
          spancb::reweighted_spanner(rc, c, cert.spanner, cert.radius);
      const double det = std::abs(spanner.matrix.det());

      // Initial reweighted determinant is at least
      // (radius / sqrt(offset + 2 eta))^d and swaps only grow it.
      const double floor =
          std::pow(cert.radius / std::sqrt(offset + 2.0 * eta), d);
      CHECK(det >= floor * (1.0 - 1e-9));
      CHECK(det <= 1.0 + 1e-9);

      // Every action's reweighted embedding stays within coefficient C of
      // the terminated basis.
      for (ActionId a : set.ids()) {
        const Eigen::VectorXd coef =
            spanner.matrix.inverse() * spancb::reweight(rc, a);
        CHECK(coef.cwiseAbs().maxCoeff() <= c * (1.0 + 1e-6));
      }
      CHECK(spanner.stats.iterations <=
            spancb::reweighted_iteration_cap(d, eta, cert.radius));
      CHECK(spanner.matrix.columns().col(0).isApprox(
          spancb::reweight(rc, spanner.ids[0]), 1e-9));
    }
  }
}

TEST_CASE("reweighted spanner rejects factors at or below sqrt(2)") {
  const FiniteActionSet set = random_set(95, 3, 10);
  const ReweightingContext rc(set, kCtx, random_ball_vector(96, 3),
                              Reweighting{1.0, 1.0});
  const spancb::InitCertificate cert = spancb::local_search_init(set, kCtx);
  CHECK_THROWS_AS(
      spancb::reweighted_spanner(rc, std::sqrt(2.0), cert.spanner, cert.radius),
      ConfigError);
  CHECK_THROWS_AS(
      spancb::reweighted_spanner(rc, 1.0, cert.spanner, cert.radius),
      ConfigError);

  SpannerState bad = cert.spanner;
  bad.ids.pop_back();
  CHECK_THROWS_AS(spancb::reweighted_spanner(rc, 2.0, bad, cert.radius),
                  ConfigError);
}

TEST_CASE("iteration cap grows with eta over radius") {
  CHECK(spancb::reweighted_iteration_cap(3, 0.0, 0.5) ==
        static_cast<int>(50.0 * 3.0) + 50);  // log clamps at 1
  CHECK(spancb::reweighted_iteration_cap(3, 100.0, 0.5) ==
        static_cast<int>(50.0 * 3.0 * std::log(200.0)) + 50);
  CHECK(spancb::reweighted_iteration_cap(5, 10.0, 0.1) >
        spancb::reweighted_iteration_cap(5, 10.0, 0.9));
}

TEST_CASE("duplicated actions never change the reweighted spanner") {
  const int d = 3;
  const FiniteActionSet base = random_set(97, d, 12);
  const Eigen::VectorXd ghat = random_ball_vector(98, d);

  const ReweightingContext rc_base(base, kCtx, ghat, Reweighting{2.0, 1.0});
  const spancb::InitCertificate cert_base = spancb::local_search_init(base, kCtx);
  const SpannerState reference =
      spancb::reweighted_spanner(rc_base, 2.0, cert_base.spanner,
                                 cert_base.radius);

  for (ActionId source : {ActionId{0}, reference.ids.back()}) {
    const FiniteActionSet grown = base.with_duplicates(source, 5);
    const ReweightingContext rc(grown, kCtx, ghat, Reweighting{2.0, 1.0});
    const spancb::InitCertificate cert = spancb::local_search_init(grown, kCtx);
    const SpannerState spanner =
        spancb::reweighted_spanner(rc, 2.0, cert.spanner, cert.radius);
    CHECK(spanner.ids == reference.ids);
    CHECK(spanner.matrix.det() ==
          doctest::Approx(reference.matrix.det()).epsilon(1e-12));
  }
}

#include <doctest.h>

#include <cmath>

#include "hadaq/quantile.hpp"
#include "test_util.hpp"

using namespace hadaq;
using testutil::random_direction;
using testutil::random_point;
using testutil::random_tangent;

namespace {

struct Config {
  ManifoldPoint x, p;
  QuantileIndex q;
};

Config random_config(const Manifold& M, Rng& rng, double beta_max = 0.9,
                     double min_gap = 0.2) {
  Config c{random_point(M, rng), random_point(M, rng), {}};
  while (M.distance(c.x, c.p) < min_gap) {
    c.x = random_point(M, rng);
    c.p = random_point(M, rng);
  }
  c.q.beta = beta_max * rng.uniform();
  c.q.xi = random_direction(M, random_point(M, rng), rng);
  return c;
}

}  // namespace

TEST_CASE("loss values") {
  Euclidean eu(2);
  const ManifoldPoint x = eu.point(Eigen::Vector2d(0, 0));
  const ManifoldPoint p = eu.point(Eigen::Vector2d(2, 0));
  QuantileIndex q{0.5, eu.direction(eu.base_point(), Eigen::Vector2d(1, 0))};
  CHECK(loss(eu, x, p, q, LossKind::DataBased) == doctest::Approx(1.0));
  CHECK(loss(eu, x, x, q, LossKind::DataBased) == 0.0);
  CHECK(loss(eu, x, x, q, LossKind::ParameterBased) == 0.0);

  SUBCASE("the two kinds coincide exactly on flat space") {
    Rng rng(101);
    for (int rep = 0; rep < 100; ++rep) {
      const Config c = random_config(eu, rng);
      CHECK(loss(eu, c.x, c.p, c.q, LossKind::DataBased) ==
            loss(eu, c.x, c.p, c.q, LossKind::ParameterBased));
    }
  }

  SUBCASE("sandwich between (1-beta)d and (1+beta)d") {
    for (const auto& M : testutil::all_manifolds()) {
      Rng rng(103);
      for (int rep = 0; rep < 100; ++rep) {
        const Config c = random_config(*M, rng, 0.98, 0.0);
        const double d = M->distance(c.x, c.p);
        for (LossKind kind : {LossKind::DataBased, LossKind::ParameterBased}) {
          const double v = loss(*M, c.x, c.p, c.q, kind);
          REQUIRE(v >= (1.0 - c.q.beta) * d - 1e-12 * (1.0 + d));
          REQUIRE(v <= (1.0 + c.q.beta) * d + 1e-12 * (1.0 + d));
        }
      }
    }
  }

  SUBCASE("beta out of range is rejected") {
    CHECK_THROWS_AS(loss(eu, x, p, QuantileIndex{1.0, q.xi},
                         LossKind::DataBased),
                    ContractViolation);
    CHECK_THROWS_AS(loss(eu, x, p, QuantileIndex{-0.1, q.xi},
                         LossKind::DataBased),
                    ContractViolation);
  }
}

TEST_CASE("sample objective") {
  Euclidean eu(1);
  std::vector<ManifoldPoint> data;
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0})
    data.push_back(eu.point(Eigen::VectorXd::Constant(1, v)));
  QuantileIndex q{0.5,
                  eu.direction(eu.base_point(), Eigen::VectorXd::Ones(1))};
  const ManifoldPoint p = eu.point(Eigen::VectorXd::Constant(1, 4.0));
  CHECK(sample_objective(eu, data, p, q, LossKind::DataBased) ==
        doctest::Approx(0.9));

  // Permutation invariance is exact: the mean is computed from the sorted
  // multiset of per-point losses.
  std::vector<ManifoldPoint> shuffled{data[3], data[0], data[4], data[2],
                                      data[1]};
  CHECK(sample_objective(eu, shuffled, p, q, LossKind::DataBased) ==
        sample_objective(eu, data, p, q, LossKind::DataBased));

  CHECK(sample_objective(eu, {data[2]}, data[2], q, LossKind::DataBased) ==
        0.0);
  CHECK_THROWS_AS(sample_objective(eu, {}, p, q, LossKind::DataBased),
                  ContractViolation);
}

TEST_CASE("exact gradient closed forms") {
  SUBCASE("euclidean") {
    Euclidean eu(2);
    Rng rng(107);
    for (int rep = 0; rep < 50; ++rep) {
      const Config c = random_config(eu, rng);
      const TangentVector g = grad_exact(eu, c.x, c.p, c.q);
      const Eigen::VectorXd expected =
          (c.p.coords - c.x.coords) / (c.p.coords - c.x.coords).norm() -
          c.q.beta * c.q.xi.unit_dir().vec;
      REQUIRE((g.vec - expected).norm() < 1e-12);
    }
  }

  SUBCASE("beta = 0 reduces to the unit log toward the datum") {
    for (const auto& M : testutil::all_manifolds()) {
      Rng rng(109);
      Config c = random_config(*M, rng);
      c.q.beta = 0.0;
      const TangentVector g = grad_exact(*M, c.x, c.p, c.q);
      const TangentVector lpx = M->log_map(c.p, c.x);
      const double d = M->distance(c.p, c.x);
      REQUIRE(M->norm(c.p, TangentVector{c.p, g.vec + lpx.vec / d}) < 1e-10);
    }
  }

  SUBCASE("degenerate pairs are rejected") {
    Euclidean eu(2);
    Rng rng(113);
    const Config c = random_config(eu, rng);
    CHECK_THROWS_AS(grad_exact(eu, c.x, c.x, c.q), DegeneratePairError);
  }
}

TEST_CASE("exact gradient agrees with the finite-difference oracle") {
  for (const auto& M : testutil::all_manifolds()) {
    Rng rng(127);
    for (int rep = 0; rep < 100; ++rep) {
      const Config c = random_config(*M, rng);
      const TangentVector g = grad_exact(*M, c.x, c.p, c.q);
      const TangentVector fd = M->numerical_gradient(
          [&](const ManifoldPoint& cand) {
            return loss(*M, c.x, cand, c.q, LossKind::DataBased);
          },
          c.p, 1e-4);
      const double rel =
          M->norm(c.p, TangentVector{c.p, g.vec - fd.vec}) / M->norm(c.p, fd);
      REQUIRE(rel < 1e-5);
    }
  }
}

TEST_CASE("gradient norm bounds") {
  for (const auto& M : testutil::all_manifolds()) {
    Rng rng(131);
    for (int rep = 0; rep < 500; ++rep) {
      const Config c = random_config(*M, rng, 0.98, 0.05);
      const double n = M->norm(c.p, grad_exact(*M, c.x, c.p, c.q));
      REQUIRE(n >= 1.0 - c.q.beta - 1e-8);
      REQUIRE(n <= 1.0 + c.q.beta + 1e-8);
    }
  }
}

TEST_CASE("adjoint identity for the directional term") {
  // <grad + log_p(x)/d, w> must equal the derivative of
  // -beta <xi_x, log_x(.)> at p along w.
  for (const auto& M : testutil::all_manifolds()) {
    Rng rng(137);
    for (int rep = 0; rep < 20; ++rep) {
      const Config c = random_config(*M, rng);
      const TangentVector g = grad_exact(*M, c.x, c.p, c.q);
      const TangentVector lpx = M->log_map(c.p, c.x);
      const double d = M->distance(c.p, c.x);
      TangentVector w = random_tangent(*M, c.p, rng);
      w.vec /= M->norm(c.p, w);

      const double lhs =
          M->metric_inner(c.p, TangentVector{c.p, g.vec + lpx.vec / d}, w);

      const TangentVector xi_x = M->radial_field(c.q.xi, c.x);
      const auto term = [&](const ManifoldPoint& cand) {
        return -c.q.beta * M->metric_inner(c.x, xi_x, M->log_map(c.x, cand));
      };
      const double h = 1e-4;
      TangentVector step = w;
      step.vec *= h;
      const double fp = term(M->exp_map(c.p, step));
      step.vec = -h * w.vec;
      const double fm = term(M->exp_map(c.p, step));
      const double rhs = (fp - fm) / (2.0 * h);
      REQUIRE(lhs == doctest::Approx(rhs).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("transport approximation") {
  SUBCASE("collapses to the exact gradient on flat space and at beta 0") {
    Euclidean eu(2);
    Rng rng(139);
    const Config c = random_config(eu, rng);
    CHECK((grad_transport_approx(eu, c.x, c.p, c.q).vec -
           grad_exact(eu, c.x, c.p, c.q).vec)
              .norm() == 0.0);

    for (const auto& M : testutil::all_manifolds()) {
      Rng rng2(149);
      Config c2 = random_config(*M, rng2);
      c2.q.beta = 0.0;
      CHECK(M->norm(c2.p,
                    TangentVector{c2.p,
                                  grad_transport_approx(*M, c2.x, c2.p, c2.q)
                                          .vec -
                                      grad_exact(*M, c2.x, c2.p, c2.q).vec}) <
            1e-12);
    }
  }

  SUBCASE("deviation from the exact gradient grows with separation") {
    Hyperboloid hyp(2, -1.0);
    Rng rng(151);
    const ManifoldPoint x = random_point(hyp, rng);
    QuantileIndex q{0.6, random_direction(hyp, random_point(hyp, rng), rng)};
    TangentVector u = random_tangent(hyp, x, rng);
    u.vec /= hyp.norm(x, u);
    double prev = -1.0;
    for (double d : {0.5, 1.0, 2.0, 4.0}) {
      TangentVector ud = u;
      ud.vec *= d;
      const ManifoldPoint p = hyp.exp_map(x, ud);
      const double gap =
          hyp.norm(p, TangentVector{p, grad_transport_approx(hyp, x, p, q).vec -
                                           grad_exact(hyp, x, p, q).vec});
      REQUIRE(gap > prev);
      prev = gap;
    }
  }

  SUBCASE("coincident pair convention") {
    Hyperboloid hyp(2, -1.0);
    Rng rng(157);
    const ManifoldPoint x = random_point(hyp, rng);
    QuantileIndex q{0.7, random_direction(hyp, random_point(hyp, rng), rng)};
    const TangentVector g = grad_transport_approx(hyp, x, x, q);
    const TangentVector xi_x = hyp.radial_field(q.xi, x);
    CHECK(hyp.norm(x, TangentVector{x, g.vec + q.beta * xi_x.vec}) < 1e-12);
  }
}

TEST_CASE("radial approximation") {
  Euclidean eu(2);
  Rng rng(163);
  const Config c = random_config(eu, rng);
  CHECK((grad_radial_approx(eu, c.x, c.p, c.q).vec -
         grad_exact(eu, c.x, c.p, c.q).vec)
            .norm() == 0.0);

  Hyperboloid hyp(2, -1.0);
  Rng rng2(167);
  Config hc = random_config(hyp, rng2, 0.9, 0.8);
  hc.q.beta = 0.8;
  const TangentVector radial = grad_radial_approx(hyp, hc.x, hc.p, hc.q);
  const TangentVector transported =
      grad_transport_approx(hyp, hc.x, hc.p, hc.q);
  CHECK(hyp.norm(hc.p, TangentVector{hc.p, radial.vec - transported.vec}) >
        1e-4);

  // p = x falls back to -beta * xi_p.
  const TangentVector at_kink = grad_radial_approx(hyp, hc.x, hc.x, hc.q);
  const TangentVector xi_p = hyp.radial_field(hc.q.xi, hc.x);
  CHECK(hyp.norm(hc.x, TangentVector{hc.x, at_kink.vec + hc.q.beta * xi_p.vec}) <
        1e-12);
}

TEST_CASE("gradients stay accurate at ill-conditioned spd points") {
  Spd spd(3);
  Rng rng(179);
  const ManifoldPoint id = spd.base_point();
  for (int rep = 0; rep < 20; ++rep) {
    // Points with eigenvalues spread over about four decades.
    auto skewed_point = [&]() {
      Eigen::Matrix3d g;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
      const Eigen::Matrix3d q =
          Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ();
      const Eigen::Vector3d evals(1e2, 1.0, 1e-2);
      return spd.point(
          spd.to_flat(q * evals.asDiagonal() * q.transpose()));
    };
    const ManifoldPoint x = skewed_point();
    const ManifoldPoint p = skewed_point();
    if (spd.distance(x, p) < 0.2) continue;
    const QuantileIndex q{0.7, random_direction(spd, id, rng)};
    const TangentVector g = grad_exact(spd, x, p, q);
    const TangentVector fd = spd.numerical_gradient(
        [&](const ManifoldPoint& c) {
          return loss(spd, x, c, q, LossKind::DataBased);
        },
        p, 1e-4);
    const double rel =
        spd.norm(p, TangentVector{p, g.vec - fd.vec}) / spd.norm(p, fd);
    REQUIRE(rel < 1e-4);
    const double n = spd.norm(p, g);
    REQUIRE(n >= 1.0 - q.beta - 1e-7);
    REQUIRE(n <= 1.0 + q.beta + 1e-7);
  }
}

TEST_CASE("hyperbolic closed form equals the eigendecomposition path") {
  for (double kappa : {-1.0, -0.25}) {
    Hyperboloid hyp(2, kappa);
    Rng rng(173);
    for (int rep = 0; rep < 50; ++rep) {
      const Config c = random_config(hyp, rng, 0.98);
      const TangentVector a = grad_exact(hyp, c.x, c.p, c.q);
      const TangentVector b = grad_exact_hyperbolic(hyp, c.x, c.p, c.q);
      REQUIRE(hyp.norm(c.p, TangentVector{c.p, a.vec - b.vec}) < 1e-10);
    }
  }
}

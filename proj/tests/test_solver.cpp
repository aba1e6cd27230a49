#include <doctest.h>

#include <cmath>
#include <limits>

#include "hadaq/experiments.hpp"
#include "hadaq/solver.hpp"
#include "test_util.hpp"

using namespace hadaq;
using testutil::random_direction;
using testutil::random_point;

namespace {

std::vector<ManifoldPoint> line_data(const Euclidean& eu,
                                     const std::vector<double>& xs) {
  std::vector<ManifoldPoint> data;
  data.reserve(xs.size());
  for (double v : xs) data.push_back(eu.point(Eigen::VectorXd::Constant(1, v)));
  return data;
}

QuantileIndex line_index(const Euclidean& eu, double beta, double sign) {
  return QuantileIndex{
      beta, eu.direction(eu.base_point(), Eigen::VectorXd::Constant(1, sign))};
}

// Dense scan of the 1D sample objective; small grids only.
double scan_minimizer(const Euclidean& eu,
                      const std::vector<ManifoldPoint>& data,
                      const QuantileIndex& q, double lo, double hi,
                      double step) {
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  for (double v = lo; v <= hi; v += step) {
    const double obj =
        sample_objective(eu, data, eu.point(Eigen::VectorXd::Constant(1, v)),
                         q, LossKind::DataBased);
    if (obj < best_val) {
      best_val = obj;
      best = v;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("descent basics") {
  Euclidean eu(1);

  SUBCASE("single data point is its own quantile") {
    const auto data = line_data(eu, {2.5});
    const QuantileIndex q = line_index(eu, 0.0, 1.0);
    const QuantileResult res =
        descent(eu, data, q, {}, GradientMode::Exact, LossKind::DataBased);
    CHECK(eu.distance(res.point, data[0]) < 1e-6);
    CHECK(res.objective < 1e-6);
  }

  SUBCASE("five-point line matches the dense scan") {
    const auto data = line_data(eu, {1, 2, 3, 4, 5});
    const QuantileIndex q = line_index(eu, 0.5, 1.0);
    const double scan = scan_minimizer(eu, data, q, 0.0, 6.0, 1e-5);
    CHECK(scan == doctest::Approx(4.0).epsilon(1e-4));
    const QuantileResult res =
        descent(eu, data, q, {}, GradientMode::Exact, LossKind::DataBased);
    CHECK(std::abs(res.point.coords[0] - 4.0) < 1e-4);
  }

  SUBCASE("symmetric cross has its median at the origin") {
    Euclidean e2(2);
    std::vector<ManifoldPoint> data{
        e2.point(Eigen::Vector2d(1, 0)), e2.point(Eigen::Vector2d(-1, 0)),
        e2.point(Eigen::Vector2d(0, 1)), e2.point(Eigen::Vector2d(0, -1))};
    QuantileIndex q{0.0, e2.direction(e2.base_point(), Eigen::Vector2d(1, 0))};
    const QuantileResult res =
        descent(e2, data, q, {}, GradientMode::Exact, LossKind::DataBased);
    CHECK(res.point.coords.norm() < 1e-4);
  }

  SUBCASE("input validation") {
    const auto data = line_data(eu, {1, 2});
    const QuantileIndex q = line_index(eu, 0.3, 1.0);
    CHECK_THROWS_AS(
        descent(eu, {}, q, {}, GradientMode::Exact, LossKind::DataBased),
        ContractViolation);
    CHECK_THROWS_AS(descent(eu, data, q, {}, GradientMode::Exact,
                            LossKind::ParameterBased),
                    ContractViolation);
    DescentConfig bad;
    bad.maxcount = 0;
    CHECK_THROWS_AS(
        descent(eu, data, q, bad, GradientMode::Exact, LossKind::DataBased),
        ContractViolation);
  }
}

TEST_CASE("objective sequence is non-increasing and runs terminate") {
  Hyperboloid hyp(2, -1.0);
  SimulationSpec spec;
  spec.n_points = 60;
  spec.seed = 2024;
  const auto data = simulate_poincare_dataset(hyp, spec);
  QuantileIndex q{
      0.6, hyp.direction(hyp.base_point(), Eigen::Vector3d(0, 0.6, 0.8))};
  std::vector<double> trace;
  const QuantileResult res = descent(hyp, data, q, {}, GradientMode::Exact,
                                     LossKind::DataBased, &trace);
  REQUIRE(trace.size() > 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    REQUIRE(trace[i] <= trace[i - 1]);
  CHECK(res.iters < 20000);
  CHECK((res.termination == Termination::LrFloor ||
         res.termination == Termination::MaxCount));
  CHECK(res.objective == doctest::Approx(trace.back()).epsilon(1e-12));
}

TEST_CASE("approximate and finite-difference modes reach the same optimum") {
  Hyperboloid hyp(2, -1.0);
  SimulationSpec spec;
  spec.n_points = 40;
  spec.seed = 77;
  const auto data = simulate_poincare_dataset(hyp, spec);
  QuantileIndex q{0.4,
                  hyp.direction(hyp.base_point(), Eigen::Vector3d(0, 1, 0))};
  DescentConfig cfg;
  cfg.tol = 1e-9;
  const auto exact =
      descent(hyp, data, q, cfg, GradientMode::Exact, LossKind::DataBased);
  // The finite-difference step follows the true gradient, so it lands on
  // the same optimum; the transported step zeroes an approximate field and
  // settles a small distance away.
  const auto fd = descent(hyp, data, q, cfg, GradientMode::FiniteDifference,
                          LossKind::DataBased);
  CHECK(hyp.distance(exact.point, fd.point) < 1e-3);
  CHECK(std::abs(exact.objective - fd.objective) < 1e-8);
  const auto transport = descent(hyp, data, q, cfg,
                                 GradientMode::TransportApprox,
                                 LossKind::DataBased);
  const double gap = hyp.distance(exact.point, transport.point);
  CHECK(gap > 1e-5);
  CHECK(gap < 5e-2);
}

TEST_CASE("quantile field") {
  Hyperboloid hyp(2, -1.0);
  SimulationSpec spec;
  spec.n_points = 50;
  spec.seed = 5;
  const auto data = simulate_poincare_dataset(hyp, spec);
  std::vector<BoundaryDirection> xis;
  for (int l = 1; l <= 4; ++l) {
    const double th = 2.0 * M_PI * l / 4.0;
    xis.push_back(hyp.direction(
        hyp.base_point(), Eigen::Vector3d(0, std::cos(th), std::sin(th))));
  }

  SUBCASE("beta zero columns coincide with the median solve") {
    const auto field = quantile_field(hyp, data, {0.0}, xis, {},
                                      GradientMode::Exact, LossKind::DataBased);
    for (std::size_t i = 1; i < field.size(); ++i)
      CHECK(hyp.distance(field[0][0].point, field[i][0].point) == 0.0);
  }

  SUBCASE("warm starts match cold solves") {
    DescentConfig cfg;
    cfg.tol = 1e-9;
    const std::vector<double> betas{0.2, 0.5, 0.8};
    const auto field = quantile_field(hyp, data, betas, xis, cfg,
                                      GradientMode::Exact, LossKind::DataBased);
    for (std::size_t i = 0; i < xis.size(); ++i)
      for (std::size_t j = 0; j < betas.size(); ++j) {
        QuantileIndex q{betas[j], xis[i]};
        const auto cold = descent(hyp, data, q, cfg, GradientMode::Exact,
                                  LossKind::DataBased);
        REQUIRE(std::abs(field[i][j].objective - cold.objective) < 1e-6);
      }
  }

  SUBCASE("unsorted betas are rejected") {
    CHECK_THROWS_AS(quantile_field(hyp, data, {0.5, 0.2}, xis, {},
                                   GradientMode::Exact, LossKind::DataBased),
                    ContractViolation);
  }
}

TEST_CASE("first-order residual") {
  Euclidean eu(1);

  SUBCASE("kink semantics at an order-statistic quantile") {
    const auto data = line_data(eu, {1, 2, 3, 4, 5});
    const QuantileIndex q = line_index(eu, 0.5, 1.0);
    bool kink = false;
    const double r = first_order_residual(
        eu, data, eu.point(Eigen::VectorXd::Constant(1, 4.0)), q, &kink);
    CHECK(kink);
    CHECK(r <= 2.0 / 5.0 + 1e-12);
    CHECK(r == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("symmetric data around the median cancel exactly") {
    Euclidean e2(2);
    std::vector<ManifoldPoint> data{
        e2.point(Eigen::Vector2d(1, 0)), e2.point(Eigen::Vector2d(-1, 0)),
        e2.point(Eigen::Vector2d(0, 1)), e2.point(Eigen::Vector2d(0, -1))};
    QuantileIndex q{0.0, e2.direction(e2.base_point(), Eigen::Vector2d(1, 0))};
    CHECK(first_order_residual(e2, data, e2.base_point(), q) < 1e-12);
  }

  SUBCASE("converged continuous solves are stationary") {
    Hyperboloid hyp(2, -1.0);
    SimulationSpec spec;
    spec.n_points = 100;
    spec.seed = 31;
    const auto data = simulate_poincare_dataset(hyp, spec);
    QuantileIndex q{0.5,
                    hyp.direction(hyp.base_point(), Eigen::Vector3d(0, 1, 0))};
    const QuantileResult res =
        descent(hyp, data, q, {}, GradientMode::Exact, LossKind::DataBased);
    CHECK(res.first_order_residual <= 1e-3);
  }
}

TEST_CASE("equivariance under isometries") {
  DescentConfig cfg;
  cfg.lr0 = 0.3;
  cfg.tol = 1e-11;
  cfg.maxcount = 400;

  SUBCASE("euclidean rotation plus translation") {
    Euclidean eu(2);
    Rng rng(211);
    std::vector<ManifoldPoint> data;
    for (int i = 0; i < 40; ++i) data.push_back(random_point(eu, rng));
    QuantileIndex q{0.5, random_direction(eu, eu.base_point(), rng)};
    const testutil::Isometry iso = testutil::euclidean_isometry(eu, rng);

    DescentConfig plain_cfg = cfg;
    plain_cfg.init = data[0];
    const auto plain = descent(eu, data, q, plain_cfg, GradientMode::Exact,
                               LossKind::DataBased);
    DescentConfig moved_cfg = cfg;
    moved_cfg.init = iso.point(data[0]);
    const auto moved =
        descent(eu, iso.dataset(data),
                QuantileIndex{q.beta, iso.direction(q.xi)}, moved_cfg,
                GradientMode::Exact, LossKind::DataBased);
    CHECK(eu.distance(iso.point(plain.point), moved.point) < 1e-6);
  }

  SUBCASE("hyperboloid Lorentz transform") {
    Hyperboloid hyp(2, -1.0);
    SimulationSpec spec;
    spec.n_points = 50;
    spec.seed = 6;
    const auto data = simulate_poincare_dataset(hyp, spec);
    Rng rng(223);
    QuantileIndex q{0.6, random_direction(hyp, hyp.base_point(), rng)};
    const testutil::Isometry iso = testutil::lorentz_isometry(hyp, rng);

    DescentConfig plain_cfg = cfg;
    plain_cfg.init = data[0];
    const auto plain = descent(hyp, data, q, plain_cfg, GradientMode::Exact,
                               LossKind::DataBased);
    DescentConfig moved_cfg = cfg;
    moved_cfg.init = iso.point(data[0]);
    const auto moved =
        descent(hyp, iso.dataset(data),
                QuantileIndex{q.beta, iso.direction(q.xi)}, moved_cfg,
                GradientMode::Exact, LossKind::DataBased);
    CHECK(hyp.distance(iso.point(plain.point), moved.point) < 1e-6);
  }

  SUBCASE("spd congruence") {
    Spd spd(3);
    Rng rng(227);
    std::vector<ManifoldPoint> data;
    for (int i = 0; i < 25; ++i) data.push_back(random_point(spd, rng, 1.2));
    QuantileIndex q{0.4, random_direction(spd, spd.base_point(), rng)};
    const testutil::Isometry iso = testutil::spd_congruence(spd, rng);

    DescentConfig plain_cfg = cfg;
    plain_cfg.init = data[0];
    const auto plain = descent(spd, data, q, plain_cfg, GradientMode::Exact,
                               LossKind::DataBased);
    DescentConfig moved_cfg = cfg;
    moved_cfg.init = iso.point(data[0]);
    const auto moved =
        descent(spd, iso.dataset(data),
                QuantileIndex{q.beta, iso.direction(q.xi)}, moved_cfg,
                GradientMode::Exact, LossKind::DataBased);
    CHECK(spd.distance(iso.point(plain.point), moved.point) < 1e-6);
  }
}

TEST_CASE("extreme quantiles walk out along the direction") {
  Hyperboloid hyp(2, -1.0);
  SimulationSpec spec;
  spec.n_points = 80;
  spec.seed = 17;
  const auto data = simulate_poincare_dataset(hyp, spec);
  const BoundaryDirection xi =
      hyp.direction(hyp.base_point(), Eigen::Vector3d(0, 1, 0));

  const auto median = descent(hyp, data, QuantileIndex{0.0, xi}, {},
                              GradientMode::Exact, LossKind::DataBased);

  double prev_dist = 0.0;
  double prev_align = std::numeric_limits<double>::infinity();
  DescentConfig cfg;
  ManifoldPoint warm = median.point;
  for (double beta : {0.9, 0.99, 0.999}) {
    cfg.init = warm;
    const auto res = descent(hyp, data, QuantileIndex{beta, xi}, cfg,
                             GradientMode::Exact, LossKind::DataBased);
    warm = res.point;
    const double dist = hyp.distance(res.point, median.point);
    REQUIRE(dist > prev_dist);
    prev_dist = dist;

    // Mean squared misalignment between the unit log toward the quantile
    // and the radial field, evaluated at the data points.
    double align = 0.0;
    for (const auto& x : data) {
      const TangentVector lg = hyp.log_map(x, res.point);
      const double d = hyp.distance(x, res.point);
      const TangentVector xi_x = hyp.radial_field(xi, x);
      const TangentVector gap{x, lg.vec / d - xi_x.vec};
      const double n = hyp.norm(x, gap);
      align += n * n;
    }
    align /= static_cast<double>(data.size());
    REQUIRE(align < prev_align);
    prev_align = align;
  }
}

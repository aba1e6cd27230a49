#pragma once

#include <cstdint>
#include <vector>

#include "hadaq/solver.hpp"

namespace hadaq {

/// A set of boundary directions anchored at one point, with an antipode
/// pairing: dirs[pairing[k]] has the negated tangent of dirs[k].
struct DirectionGrid {
  ManifoldPoint anchor;
  std::vector<BoundaryDirection> dirs;
  std::vector<int> pairing;
};

/// L equally spaced unit tangents at the anchor of a 2-dimensional
/// manifold, at angles 2*pi*l/L (l = 1..L) in the canonical orthonormal
/// frame; requires L even so each direction has its antipode on the grid.
DirectionGrid directions_circle(const Manifold& M, const ManifoldPoint& anchor,
                                int L);

/// 2*half_K directions: half_K uniform draws on the unit sphere of the
/// tangent space (normalized Gaussians) followed by their negations.
DirectionGrid directions_random_antipodal(const Manifold& M,
                                          const ManifoldPoint& anchor,
                                          int half_K, std::uint64_t seed);

/// Quantile-based distributional measures at (beta, beta_prime).
struct MeasureReport {
  double delta1 = 0.0;       // max paired log-difference norm at beta
  double delta2 = 0.0;       // mean paired log-difference norm at beta
  double gamma1 = 0.0;       // max skewness ratio
  double gamma2_norm = 0.0;  // norm of the mean-log skewness vector / delta2
  double kappa1 = 0.0;       // delta1(beta') / delta1(beta)
  double kappa2 = 0.0;       // delta2(beta') / delta2(beta)
  double alpha = 0.0;        // log(max/min distance from the median)
  double beta = 0.0;
  double beta_prime = 0.0;
  int K = 0;
  std::uint64_t seed = 0;
};

/// Computes the sample median, solves the (beta, xi_k)- and
/// (beta', xi_k)-quantiles for every grid direction (warm-started at the
/// median, sharing cfg), and assembles the measures. The grid must be
/// anchored at the sample median. Throws NumericalError when the
/// dispersion denominators degenerate (e.g. point-mass data).
MeasureReport measures(const Manifold& M,
                       const std::vector<ManifoldPoint>& data, double beta,
                       double beta_prime, const DirectionGrid& grid,
                       const DescentConfig& cfg, int threads = 1);

struct PermTestResult {
  double t0 = 0.0;  // distance between the two sample medians
  double t1 = 0.0;  // summed distance between the indexed sample quantiles
  double p0 = 1.0;
  double p1 = 1.0;
  int n_perm = 0;
  std::uint64_t seed = 0;
};

/// Two-sample permutation test with median statistic T0 and quantile-sum
/// statistic T1 over the given indices. P-values use the add-one estimator
/// (1 + #{permuted >= observed}) / (1 + n_perm); permutations are seeded
/// shuffles of the pooled sample preserving the two sizes, one independent
/// substream per replicate.
PermTestResult perm_test(const Manifold& M,
                         const std::vector<ManifoldPoint>& data_a,
                         const std::vector<ManifoldPoint>& data_b,
                         const std::vector<QuantileIndex>& indices, int n_perm,
                         std::uint64_t seed, const DescentConfig& cfg,
                         int threads = 1);

/// Empirical breakdown probe: solves the uncorrupted quantile q, then for
/// each magnitude t replaces the first j data points with
/// exp_q(t * beta * xi_q) (exp_q(t * xi_q) for beta = 0), re-solves, and
/// reports the displacement d(q, q_corrupted). Bounded displacements over
/// growing t indicate j below the breakdown count.
std::vector<double> breakdown_probe(const Manifold& M,
                                    const std::vector<ManifoldPoint>& data,
                                    const QuantileIndex& q, int j,
                                    const std::vector<double>& magnitudes,
                                    const DescentConfig& cfg);

}  // namespace hadaq

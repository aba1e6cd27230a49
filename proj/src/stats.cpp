#include "hadaq/stats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hadaq/parallel.hpp"
#include "hadaq/rng.hpp"

namespace hadaq {

DirectionGrid directions_circle(const Manifold& M, const ManifoldPoint& anchor,
                                int L) {
  M.require_point(anchor);
  if (M.dimension() != 2)
    throw ContractViolation("circle grids require a 2-dimensional manifold");
  if (L < 2 || L % 2 != 0)
    throw ContractViolation("circle grids need an even L >= 2 for antipodes");
  const auto frame = M.orthonormal_basis(anchor);
  DirectionGrid grid;
  grid.anchor = anchor;
  grid.dirs.reserve(static_cast<std::size_t>(L));
  grid.pairing.resize(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) {
    const double theta = 2.0 * M_PI * static_cast<double>(l) / L;
    Eigen::VectorXd v =
        std::cos(theta) * frame[0].vec + std::sin(theta) * frame[1].vec;
    grid.dirs.push_back(M.direction(anchor, v));
  }
  for (int k = 0; k < L; ++k)
    grid.pairing[static_cast<std::size_t>(k)] = (k + L / 2) % L;
  return grid;
}

DirectionGrid directions_random_antipodal(const Manifold& M,
                                          const ManifoldPoint& anchor,
                                          int half_K, std::uint64_t seed) {
  M.require_point(anchor);
  if (half_K < 1) throw ContractViolation("half_K must be >= 1");
  const auto frame = M.orthonormal_basis(anchor);
  Rng rng = Rng::derive(seed, 0x64697273ULL);  // grid substream
  DirectionGrid grid;
  grid.anchor = anchor;
  const int K = 2 * half_K;
  grid.dirs.reserve(static_cast<std::size_t>(K));
  grid.pairing.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < half_K; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(M.ambient_size());
    for (const auto& b : frame) v += rng.normal() * b.vec;
    grid.dirs.push_back(M.direction(anchor, v));
  }
  for (int k = 0; k < half_K; ++k) {
    TangentVector neg = grid.dirs[static_cast<std::size_t>(k)].dir;
    neg.vec = -neg.vec;
    grid.dirs.push_back(BoundaryDirection{std::move(neg)});
  }
  for (int k = 0; k < half_K; ++k) {
    grid.pairing[static_cast<std::size_t>(k)] = k + half_K;
    grid.pairing[static_cast<std::size_t>(k + half_K)] = k;
  }
  return grid;
}

namespace {

std::vector<ManifoldPoint> solve_grid(const Manifold& M,
                                      const std::vector<ManifoldPoint>& data,
                                      double beta, const DirectionGrid& grid,
                                      const ManifoldPoint& median,
                                      const DescentConfig& cfg, int threads) {
  std::vector<ManifoldPoint> out(grid.dirs.size());
  DescentConfig warm = cfg;
  warm.init = median;
  parallel_for(static_cast<int>(grid.dirs.size()), threads, [&](int k) {
    QuantileIndex q{beta, grid.dirs[static_cast<std::size_t>(k)]};
    out[static_cast<std::size_t>(k)] =
        descent(M, data, q, warm, GradientMode::Exact, LossKind::DataBased)
            .point;
  });
  return out;
}

struct PairedStats {
  double delta1;
  double delta2;
};

PairedStats paired_dispersion(const Manifold& M, const ManifoldPoint& median,
                              const std::vector<ManifoldPoint>& quantiles,
                              const DirectionGrid& grid) {
  double max_gap = 0.0;
  double sum_gap = 0.0;
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    const auto& antipode =
        quantiles[static_cast<std::size_t>(grid.pairing[k])];
    const TangentVector a = M.log_map(median, quantiles[k]);
    const TangentVector b = M.log_map(median, antipode);
    const double gap = M.norm(median, TangentVector{median, a.vec - b.vec});
    max_gap = std::max(max_gap, gap);
    sum_gap += gap;
  }
  return PairedStats{max_gap, sum_gap / static_cast<double>(quantiles.size())};
}

}  // namespace

MeasureReport measures(const Manifold& M,
                       const std::vector<ManifoldPoint>& data, double beta,
                       double beta_prime, const DirectionGrid& grid,
                       const DescentConfig& cfg, int threads) {
  if (!(beta > 0.0) || !(beta < 1.0) || !(beta_prime < 1.0) ||
      beta_prime < beta)
    throw ContractViolation("measures require 0 < beta <= beta_prime < 1");
  if (grid.dirs.empty()) throw ContractViolation("empty direction grid");

  QuantileIndex median_index{0.0, grid.dirs[0]};
  const ManifoldPoint median =
      descent(M, data, median_index, cfg, GradientMode::Exact,
              LossKind::DataBased)
          .point;
  const double anchor_gap = M.distance(grid.anchor, median);
  if (anchor_gap > 1e-6 * std::max(1.0, default_learning_rate(M, data)))
    throw ContractViolation(
        "direction grid must be anchored at the sample median");

  // The anchor is the sample median by contract (just verified), so logs
  // are taken there; this keeps the reference point common to the grid.
  const ManifoldPoint& at = grid.anchor;
  const auto q_beta = solve_grid(M, data, beta, grid, median, cfg, threads);
  const auto q_prime =
      beta_prime == beta
          ? q_beta
          : solve_grid(M, data, beta_prime, grid, median, cfg, threads);

  const PairedStats disp = paired_dispersion(M, at, q_beta, grid);
  const PairedStats disp_prime =
      beta_prime == beta ? disp : paired_dispersion(M, at, q_prime, grid);

  if (disp.delta1 <= 1e-12 || disp.delta2 <= 1e-12)
    throw NumericalError(
        "degenerate sample: dispersion denominators vanish", disp.delta1);

  MeasureReport rep;
  rep.beta = beta;
  rep.beta_prime = beta_prime;
  rep.K = static_cast<int>(grid.dirs.size());
  rep.delta1 = disp.delta1;
  rep.delta2 = disp.delta2;
  rep.kappa1 = disp_prime.delta1 / disp.delta1;
  rep.kappa2 = disp_prime.delta2 / disp.delta2;

  double max_sum = 0.0;
  Eigen::VectorXd mean_log = Eigen::VectorXd::Zero(M.ambient_size());
  double max_dist = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < q_beta.size(); ++k) {
    const auto& antipode = q_beta[static_cast<std::size_t>(grid.pairing[k])];
    const TangentVector a = M.log_map(at, q_beta[k]);
    const TangentVector b = M.log_map(at, antipode);
    max_sum = std::max(max_sum, M.norm(at, TangentVector{at, a.vec + b.vec}));
    mean_log += a.vec;
    const double dist = M.distance(at, q_beta[k]);
    max_dist = std::max(max_dist, dist);
    min_dist = std::min(min_dist, dist);
  }
  mean_log /= static_cast<double>(q_beta.size());
  rep.gamma1 = max_sum / disp.delta1;
  rep.gamma2_norm = M.norm(at, TangentVector{at, mean_log}) / disp.delta2;
  if (min_dist <= 1e-12)
    throw NumericalError(
        "degenerate sample: a quantile coincides with the median", min_dist);
  rep.alpha = std::log(max_dist / min_dist);
  return rep;
}

namespace {

struct PermStats {
  double t0;
  double t1;
};

PermStats test_statistics(const Manifold& M,
                          const std::vector<ManifoldPoint>& a,
                          const std::vector<ManifoldPoint>& b,
                          const std::vector<QuantileIndex>& indices,
                          const DescentConfig& cfg) {
  const auto solve_side = [&](const std::vector<ManifoldPoint>& side) {
    std::vector<ManifoldPoint> qs;
    qs.reserve(indices.size() + 1);
    QuantileIndex median_index{0.0, indices[0].xi};
    const ManifoldPoint median =
        descent(M, side, median_index, cfg, GradientMode::Exact,
                LossKind::DataBased)
            .point;
    DescentConfig warm = cfg;
    warm.init = median;
    for (const auto& q : indices) {
      if (q.beta == 0.0) {
        qs.push_back(median);
        continue;
      }
      qs.push_back(descent(M, side, q, warm, GradientMode::Exact,
                           LossKind::DataBased)
                       .point);
    }
    qs.push_back(median);  // last slot holds the median for T0
    return qs;
  };
  const auto qa = solve_side(a);
  const auto qb = solve_side(b);
  PermStats s{M.distance(qa.back(), qb.back()), 0.0};
  for (std::size_t k = 0; k + 1 < qa.size(); ++k)
    s.t1 += M.distance(qa[k], qb[k]);
  return s;
}

}  // namespace

PermTestResult perm_test(const Manifold& M,
                         const std::vector<ManifoldPoint>& data_a,
                         const std::vector<ManifoldPoint>& data_b,
                         const std::vector<QuantileIndex>& indices, int n_perm,
                         std::uint64_t seed, const DescentConfig& cfg,
                         int threads) {
  if (data_a.empty() || data_b.empty())
    throw ContractViolation("perm_test requires two nonempty samples");
  if (n_perm < 1) throw ContractViolation("n_perm must be >= 1");
  if (indices.empty())
    throw ContractViolation("perm_test requires at least one index");
  for (const auto& q : indices) check_index(M, q);

  const PermStats observed = test_statistics(M, data_a, data_b, indices, cfg);

  std::vector<ManifoldPoint> pooled;
  pooled.reserve(data_a.size() + data_b.size());
  pooled.insert(pooled.end(), data_a.begin(), data_a.end());
  pooled.insert(pooled.end(), data_b.begin(), data_b.end());
  const std::size_t na = data_a.size();

  std::vector<PermStats> replicas(static_cast<std::size_t>(n_perm),
                                  PermStats{0.0, 0.0});
  parallel_for(n_perm, threads, [&](int r) {
    std::vector<std::size_t> order(pooled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(r) + 1);
    rng.shuffle(order);
    std::vector<ManifoldPoint> pa, pb;
    pa.reserve(na);
    pb.reserve(pooled.size() - na);
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < na ? pa : pb).push_back(pooled[order[i]]);
    replicas[static_cast<std::size_t>(r)] =
        test_statistics(M, pa, pb, indices, cfg);
  });

  int exceed0 = 0;
  int exceed1 = 0;
  for (const auto& s : replicas) {
    if (s.t0 >= observed.t0) ++exceed0;
    if (s.t1 >= observed.t1) ++exceed1;
  }
  PermTestResult res;
  res.t0 = observed.t0;
  res.t1 = observed.t1;
  res.p0 = static_cast<double>(1 + exceed0) / static_cast<double>(1 + n_perm);
  res.p1 = static_cast<double>(1 + exceed1) / static_cast<double>(1 + n_perm);
  res.n_perm = n_perm;
  res.seed = seed;
  return res;
}

std::vector<double> breakdown_probe(const Manifold& M,
                                    const std::vector<ManifoldPoint>& data,
                                    const QuantileIndex& q, int j,
                                    const std::vector<double>& magnitudes,
                                    const DescentConfig& cfg) {
  if (j < 1 || static_cast<std::size_t>(j) > data.size())
    throw ContractViolation("breakdown_probe needs 1 <= j <= N");
  const ManifoldPoint clean =
      descent(M, data, q, cfg, GradientMode::Exact, LossKind::DataBased).point;
  TangentVector escape = M.radial_field(q.xi, clean);
  escape.vec *= (q.beta > 0.0 ? q.beta : 1.0);

  std::vector<double> displacements;
  displacements.reserve(magnitudes.size());
  for (double t : magnitudes) {
    TangentVector v = escape;
    v.vec *= t;
    const ManifoldPoint corruptor = M.exp_map(clean, v);
    std::vector<ManifoldPoint> corrupted = data;
    for (int i = 0; i < j; ++i) corrupted[static_cast<std::size_t>(i)] = corruptor;
    const ManifoldPoint moved =
        descent(M, corrupted, q, cfg, GradientMode::Exact, LossKind::DataBased)
            .point;
    displacements.push_back(M.distance(clean, moved));
  }
  return displacements;
}

}  // namespace hadaq

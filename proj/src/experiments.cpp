#include "hadaq/experiments.hpp"

#include <cmath>
#include <sstream>

#include "hadaq/parallel.hpp"
#include "hadaq/rng.hpp"

namespace hadaq {

std::vector<ManifoldPoint> simulate_poincare_dataset(
    const Hyperboloid& M, const SimulationSpec& spec) {
  if (M.dimension() != 2)
    throw ContractViolation("the disk simulation requires dimension 2");
  if (spec.n_points < 1) throw ContractViolation("n_points must be >= 1");
  if (!(spec.sigma > 0)) throw ContractViolation("sigma must be > 0");
  if (spec.compress_y && !(*spec.compress_y > 0))
    throw ContractViolation("compress_y divisor must be > 0");

  Rng rng = Rng::derive(spec.seed, 0x64617461ULL);  // dataset substream
  std::vector<ManifoldPoint> out;
  out.reserve(static_cast<std::size_t>(spec.n_points));
  while (static_cast<int>(out.size()) < spec.n_points) {
    Eigen::Vector2d u(spec.sigma * rng.normal(), spec.sigma * rng.normal());
    if (u.norm() >= 1.0) continue;  // strict open unit disk
    if (spec.compress_y) u[1] /= *spec.compress_y;
    out.push_back(M.from_poincare(u));
  }
  return out;
}

namespace {

std::string kind_label(LossKind kind) {
  return kind == LossKind::DataBased ? "data-based" : "parameter-based";
}

std::string mode_label(GradientMode mode) {
  switch (mode) {
    case GradientMode::Exact: return "exact";
    case GradientMode::TransportApprox: return "transport";
    case GradientMode::RadialApprox: return "radial";
    case GradientMode::FiniteDifference: return "fd";
  }
  return "?";
}

using Field = std::vector<std::vector<QuantileResult>>;

// Per-direction field solve with per-direction error capture; a failed
// sweep poisons only its own column entries.
std::vector<std::optional<Field>> fields_by_direction(
    const Manifold& M, const std::vector<ManifoldPoint>& data,
    const std::vector<double>& betas, const std::vector<BoundaryDirection>& xis,
    const DescentConfig& cfg, GradientMode mode, LossKind kind, int threads,
    std::vector<std::string>* errors) {
  std::vector<std::optional<Field>> out(xis.size());
  errors->assign(xis.size(), "");
  parallel_for(static_cast<int>(xis.size()), threads, [&](int i) {
    const std::vector<BoundaryDirection> one{xis[static_cast<std::size_t>(i)]};
    try {
      out[static_cast<std::size_t>(i)] =
          quantile_field(M, data, betas, one, cfg, mode, kind, 1);
    } catch (const Error& e) {
      (*errors)[static_cast<std::size_t>(i)] = e.what();
    }
  });
  return out;
}

}  // namespace

ErrorTable approximation_error_table(const Manifold& M,
                                     const std::vector<ManifoldPoint>& data,
                                     const std::vector<double>& betas, int L,
                                     const DescentConfig& cfg, int threads) {
  for (double b : betas)
    if (b == 0.0)
      throw ContractViolation(
          "error table betas must exclude 0; all step formulas coincide there");
  if (M.dimension() != 2)
    throw ContractViolation("the error table uses a circle grid (dimension 2)");

  const DirectionGrid grid = directions_circle(M, M.base_point(), L);

  ErrorTable table;
  table.betas = betas;
  table.L = L;

  struct RowSpec {
    LossKind kind;
    GradientMode reference;
    GradientMode approx;
  };
  const std::vector<RowSpec> specs = {
      {LossKind::ParameterBased, GradientMode::FiniteDifference,
       GradientMode::TransportApprox},
      {LossKind::ParameterBased, GradientMode::FiniteDifference,
       GradientMode::RadialApprox},
      {LossKind::DataBased, GradientMode::Exact, GradientMode::TransportApprox},
      {LossKind::DataBased, GradientMode::Exact, GradientMode::RadialApprox},
  };

  // Reference fields are shared between the two rows of each loss kind.
  std::vector<std::string> err_ref_param, err_ref_data;
  const auto ref_param = fields_by_direction(
      M, data, betas, grid.dirs, cfg, GradientMode::FiniteDifference,
      LossKind::ParameterBased, threads, &err_ref_param);
  const auto ref_data = fields_by_direction(
      M, data, betas, grid.dirs, cfg, GradientMode::Exact, LossKind::DataBased,
      threads, &err_ref_data);

  for (const auto& spec : specs) {
    const bool data_based = spec.kind == LossKind::DataBased;
    const auto& reference = data_based ? ref_data : ref_param;
    const auto& ref_errors = data_based ? err_ref_data : err_ref_param;

    std::vector<std::string> approx_errors;
    const auto approx =
        fields_by_direction(M, data, betas, grid.dirs, cfg, spec.approx,
                            spec.kind, threads, &approx_errors);

    ErrorTable::Row row;
    row.kind = spec.kind;
    row.mode = spec.approx;
    row.label = kind_label(spec.kind) + "/" + mode_label(spec.approx);
    row.reference = data_based ? "exact" : "fd-reference";
    row.cells.resize(betas.size());
    for (std::size_t j = 0; j < betas.size(); ++j) {
      double acc = 0.0;
      int good = 0;
      std::string first_error;
      for (std::size_t l = 0; l < grid.dirs.size(); ++l) {
        if (!reference[l] || !approx[l]) {
          if (first_error.empty())
            first_error = !reference[l] ? ref_errors[l] : approx_errors[l];
          continue;
        }
        acc += M.distance((*reference[l])[0][j].point,
                          (*approx[l])[0][j].point);
        ++good;
      }
      auto& cell = row.cells[j];
      if (good == static_cast<int>(grid.dirs.size())) {
        cell.value = acc / static_cast<double>(good);
        cell.ok = true;
      } else {
        cell.error = first_error.empty() ? "solver failure" : first_error;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

IsoquantileContours isoquantile_contours(const Hyperboloid& M,
                                         const std::vector<ManifoldPoint>& data,
                                         const std::vector<double>& betas,
                                         int L, const DescentConfig& cfg,
                                         int threads) {
  if (M.dimension() != 2)
    throw ContractViolation("contours require a 2-dimensional manifold");
  const DirectionGrid grid = directions_circle(M, M.base_point(), L);
  const Field field = quantile_field(M, data, betas, grid.dirs, cfg,
                                     GradientMode::Exact, LossKind::DataBased,
                                     threads);
  IsoquantileContours out;
  out.betas = betas;
  out.L = L;
  out.polylines.resize(betas.size());
  for (std::size_t j = 0; j < betas.size(); ++j) {
    auto& poly = out.polylines[j];
    poly.reserve(grid.dirs.size() + 1);
    for (std::size_t l = 0; l < grid.dirs.size(); ++l)
      poly.push_back(M.to_poincare(field[l][j].point));
    poly.push_back(poly.front());  // close the curve
  }
  return out;
}

std::vector<ManifoldPoint> simulate_spd_sample(const Spd& M, int n,
                                               std::uint64_t seed,
                                               bool anisotropic) {
  if (n < 1) throw ContractViolation("sample size must be >= 1");
  Rng rng = Rng::derive(seed, anisotropic ? 0x616E6973ULL : 0x69736F74ULL);
  const auto sym_basis = M.symmetric_basis();
  const ManifoldPoint id_point = M.base_point();
  const double scale = std::sqrt(0.3);
  std::vector<ManifoldPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(M.ambient_size());
    for (std::size_t k = 0; k < sym_basis.size(); ++k) {
      double coef = scale * rng.normal();
      if (anisotropic && k == 0) coef *= 3.0;  // inflate the first direction
      v += coef * M.to_flat(sym_basis[k]);
    }
    out.push_back(M.exp_map(id_point, M.tangent(id_point, v)));
  }
  return out;
}

SpdStudyResult synthetic_spd_study(int n, std::uint64_t seed,
                                   const DescentConfig& cfg, double beta,
                                   double beta_prime, int threads) {
  if (n < 10) throw ContractViolation("the study needs at least 10 points");
  Spd M(3);
  const ManifoldPoint identity = M.base_point();

  // Orthonormal fan at the identity: normalized identity direction plus the
  // three off-diagonal pair directions.
  std::vector<Eigen::MatrixXd> fan;
  fan.push_back(Eigen::MatrixXd::Identity(3, 3) / std::sqrt(3.0));
  const double s = 1.0 / std::sqrt(2.0);
  for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}}) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m(i, j) = s;
    m(j, i) = s;
    fan.push_back(std::move(m));
  }

  auto run = [&](bool anisotropic) {
    const auto data = simulate_spd_sample(M, n, seed, anisotropic);
    QuantileIndex median_index{
        0.0, M.direction(identity, M.to_flat(fan[0]))};
    const ManifoldPoint median =
        descent(M, data, median_index, cfg, GradientMode::Exact,
                LossKind::DataBased)
            .point;

    DirectionGrid grid;
    grid.anchor = median;
    for (const auto& f : fan) {
      const TangentVector at_id = M.tangent(identity, M.to_flat(f));
      grid.dirs.push_back(
          BoundaryDirection{M.transport(identity, median, at_id)});
    }
    for (int k = 0; k < 4; ++k) {
      TangentVector neg = grid.dirs[static_cast<std::size_t>(k)].dir;
      neg.vec = -neg.vec;
      grid.dirs.push_back(BoundaryDirection{std::move(neg)});
    }
    grid.pairing = {4, 5, 6, 7, 0, 1, 2, 3};

    MeasureReport rep = measures(M, data, beta, beta_prime, grid, cfg, threads);
    rep.seed = seed;
    return rep;
  };

  SpdStudyResult out;
  out.isotropic = run(false);
  out.anisotropic = run(true);
  return out;
}

}  // namespace hadaq

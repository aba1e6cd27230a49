#include "hadaq/solver.hpp"

#include <cmath>

#include "hadaq/parallel.hpp"

namespace hadaq {

namespace {

// Hard cap on loop iterations; the lr floor or the rejection budget always
// triggers far earlier on well-posed problems.
constexpr long kIterationCap = 1000000;

struct Problem {
  const Manifold& M;
  const std::vector<ManifoldPoint>& data;
  double beta;
  const BoundaryDirection& xi;
  GradientMode mode;
  LossKind kind;
  // Radial field at each datum; filled for data-based losses and for the
  // exact/transport steps, which read the field at the data points.
  std::vector<TangentVector> xi_at_data;

  void per_point_losses(const ManifoldPoint& p, std::vector<double>* out) const {
    out->resize(data.size());
    if (kind == LossKind::ParameterBased) {
      const TangentVector xi_p = M.radial_field(xi, p);
      for (std::size_t i = 0; i < data.size(); ++i)
        (*out)[i] = loss_with_field(M, data[i], p, beta, xi_p, kind);
    } else {
      for (std::size_t i = 0; i < data.size(); ++i)
        (*out)[i] = loss_with_field(M, data[i], p, beta, xi_at_data[i], kind);
    }
  }

  double objective(const ManifoldPoint& p) const {
    std::vector<double> losses;
    per_point_losses(p, &losses);
    double acc = 0.0;
    for (double l : losses) acc += l;
    return acc / static_cast<double>(data.size());
  }

  // Acceptance comparison as an exactly paired difference: summing
  // loss_i(new) - loss_i(old) keeps the test meaningful far below the
  // rounding floor of two independently accumulated objectives.
  double objective_delta(const std::vector<double>& old_losses,
                         const std::vector<double>& new_losses) const {
    double acc = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < old_losses.size(); ++i) {
      const double term = new_losses[i] - old_losses[i];
      const double y = term - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    return acc / static_cast<double>(old_losses.size());
  }

  // Mean descent step at p. Coincident data points contribute -beta*xi_p.
  TangentVector shift(const ManifoldPoint& p) const {
    if (mode == GradientMode::FiniteDifference) {
      return M.numerical_gradient(
          [this](const ManifoldPoint& c) { return objective(c); }, p);
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(M.ambient_size());
    std::optional<TangentVector> xi_p;  // computed lazily
    auto field_at_p = [&]() -> const TangentVector& {
      if (!xi_p) xi_p = M.radial_field(xi, p);
      return *xi_p;
    };
    for (std::size_t i = 0; i < data.size(); ++i) {
      const ManifoldPoint& x = data[i];
      const double d = M.distance(p, x);
      if (d < kDegeneratePairDistance) {
        acc += -beta * field_at_p().vec;
        continue;
      }
      switch (mode) {
        case GradientMode::Exact:
          acc += grad_exact_with_field(M, x, p, beta, xi_at_data[i]).vec;
          break;
        case GradientMode::TransportApprox:
          acc += grad_transport_with_field(M, x, p, beta, xi_at_data[i]).vec;
          break;
        case GradientMode::RadialApprox: {
          const TangentVector lpx = M.log_map(p, x);
          acc += -lpx.vec / d - beta * field_at_p().vec;
          break;
        }
        default:
          break;
      }
    }
    acc /= static_cast<double>(data.size());
    return TangentVector{p, std::move(acc)};
  }
};

}  // namespace

double default_learning_rate(const Manifold& M,
                             const std::vector<ManifoldPoint>& data) {
  double reach = 0.0;
  for (const auto& x : data) reach = std::max(reach, M.distance(data[0], x));
  const double diameter = 2.0 * reach;
  return diameter > 0.0 ? 0.1 * diameter : 1e-2;
}

QuantileResult descent(const Manifold& M,
                       const std::vector<ManifoldPoint>& data,
                       const QuantileIndex& q, const DescentConfig& cfg,
                       GradientMode mode, LossKind kind,
                       std::vector<double>* objective_trace) {
  if (data.empty()) throw ContractViolation("descent requires nonempty data");
  check_index(M, q);
  for (const auto& x : data) M.require_point(x);
  if (mode == GradientMode::Exact && kind != LossKind::DataBased)
    throw ContractViolation(
        "the exact gradient mode applies only to the data-based loss");
  if (cfg.maxcount < 1) throw ContractViolation("maxcount must be >= 1");
  if (cfg.tol < 0.0 || cfg.lr0 < 0.0)
    throw ContractViolation("tol and lr0 must be nonnegative (0 meaning auto)");

  double lr = cfg.lr0 > 0.0 ? cfg.lr0 : default_learning_rate(M, data);
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6 * lr;
  if (!(lr > tol))
    throw ContractViolation("initial learning rate must exceed the tolerance");

  Problem prob{M, data, q.beta, q.xi, mode, kind, {}};
  if (kind == LossKind::DataBased || mode == GradientMode::Exact ||
      mode == GradientMode::TransportApprox) {
    prob.xi_at_data.reserve(data.size());
    for (const auto& x : data) prob.xi_at_data.push_back(M.radial_field(q.xi, x));
  }

  ManifoldPoint p = cfg.init ? *cfg.init : data[0];
  M.require_point(p);
  std::vector<double> losses, cand_losses;
  prob.per_point_losses(p, &losses);
  double obj = 0.0;
  for (double l : losses) obj += l;
  obj /= static_cast<double>(data.size());
  if (objective_trace) objective_trace->push_back(obj);

  TangentVector shift = prob.shift(p);
  int count = 0;
  long iters = 0;
  Termination termination = Termination::LrFloor;

  while (lr > tol && count < cfg.maxcount) {
    if (++iters > kIterationCap) {
      termination = Termination::MaxCount;
      break;
    }
    const double shift_norm = M.norm(p, shift);
    if (shift_norm < 1e-300) break;  // stationary; nothing to propose
    TangentVector step = shift;
    step.vec *= -lr / shift_norm;
    ManifoldPoint candidate = M.exp_map(p, step);
    prob.per_point_losses(candidate, &cand_losses);
    const double delta = prob.objective_delta(losses, cand_losses);
    if (delta <= 0.0) {
      p = std::move(candidate);
      losses.swap(cand_losses);
      obj += delta;
      lr *= 1.1;
      shift = prob.shift(p);
      if (objective_trace) objective_trace->push_back(obj);
    } else {
      lr /= 2.0;
      ++count;
    }
  }
  if (count >= cfg.maxcount) termination = Termination::MaxCount;

  QuantileResult res;
  res.objective = sample_objective(M, data, p, q, kind);
  res.point = std::move(p);
  res.iters = iters;
  res.termination = termination;
  res.lr_final = lr;
  if (kind == LossKind::DataBased) {
    res.first_order_residual =
        first_order_residual(M, data, res.point, q, &res.residual_at_kink);
  } else {
    // No analytic gradient is provided for the parameter-based loss; report
    // the norm of its finite-difference gradient instead.
    const TangentVector g = M.numerical_gradient(
        [&](const ManifoldPoint& c) {
          return sample_objective(M, data, c, q, kind);
        },
        res.point);
    res.first_order_residual = M.norm(res.point, g);
    for (const auto& x : data)
      if (M.distance(res.point, x) < kDegeneratePairDistance)
        res.residual_at_kink = true;
  }
  return res;
}

std::vector<std::vector<QuantileResult>> quantile_field(
    const Manifold& M, const std::vector<ManifoldPoint>& data,
    const std::vector<double>& betas, const std::vector<BoundaryDirection>& xis,
    const DescentConfig& cfg, GradientMode mode, LossKind kind, int threads) {
  if (betas.empty() || xis.empty())
    throw ContractViolation("quantile_field requires betas and directions");
  for (std::size_t j = 1; j < betas.size(); ++j)
    if (betas[j] < betas[j - 1])
      throw ContractViolation("quantile_field betas must be sorted ascending");

  // Shared median solve: the warm start for every direction's sweep, and
  // the beta = 0 column itself.
  QuantileIndex median_index{0.0, xis[0]};
  const QuantileResult median = descent(M, data, median_index, cfg, mode, kind);

  std::vector<std::vector<QuantileResult>> out(
      xis.size(), std::vector<QuantileResult>(betas.size()));
  parallel_for(
      static_cast<int>(xis.size()), threads,
      [&](int i) {
        ManifoldPoint warm = median.point;
        for (std::size_t j = 0; j < betas.size(); ++j) {
          if (betas[j] == 0.0) {
            out[static_cast<std::size_t>(i)][j] = median;
            warm = median.point;
            continue;
          }
          DescentConfig local = cfg;
          local.init = warm;
          QuantileIndex q{betas[j], xis[static_cast<std::size_t>(i)]};
          out[static_cast<std::size_t>(i)][j] =
              descent(M, data, q, local, mode, kind);
          warm = out[static_cast<std::size_t>(i)][j].point;
        }
      });
  return out;
}

double first_order_residual(const Manifold& M,
                            const std::vector<ManifoldPoint>& data,
                            const ManifoldPoint& p, const QuantileIndex& q,
                            bool* at_kink) {
  if (data.empty())
    throw ContractViolation("first_order_residual requires nonempty data");
  check_index(M, q);
  M.require_point(p);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(M.ambient_size());
  bool kink = false;
  std::optional<TangentVector> xi_p;
  for (const auto& x : data) {
    const double d = M.distance(p, x);
    if (d < kDegeneratePairDistance) {
      kink = true;
      if (!xi_p) xi_p = M.radial_field(q.xi, p);
      acc += -q.beta * xi_p->vec;
      continue;
    }
    acc += grad_exact_with_field(M, x, p, q.beta, M.radial_field(q.xi, x)).vec;
  }
  acc /= static_cast<double>(data.size());
  if (at_kink) *at_kink = kink;
  return M.norm(p, TangentVector{p, std::move(acc)});
}

}  // namespace hadaq

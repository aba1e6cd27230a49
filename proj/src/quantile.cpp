#include "hadaq/quantile.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "hadaq/hyperboloid.hpp"

namespace hadaq {

void check_index(const Manifold& M, const QuantileIndex& q) {
  if (!(q.beta >= 0.0) || !(q.beta < 1.0))
    throw ContractViolation("quantile index beta must lie in [0, 1)");
  M.require_tangent(q.xi.anchor(), q.xi.unit_dir());
}

double jacobi_scale(double d, double kappa) {
  if (kappa >= 0.0) return 1.0;
  const double z = d * std::sqrt(-kappa);
  if (z < 1e-8) return 1.0 - z * z / 6.0;
  return z / std::sinh(z);
}

double loss_with_field(const Manifold& M, const ManifoldPoint& x,
                       const ManifoldPoint& p, double beta,
                       const TangentVector& xi_at, LossKind kind) {
  if (kind == LossKind::DataBased) {
    const TangentVector lxp = M.log_map(x, p);
    const double d = M.norm(x, lxp);
    return d - beta * M.metric_inner(x, xi_at, lxp);
  }
  const TangentVector lpx = M.log_map(p, x);
  const double d = M.norm(p, lpx);
  return d + beta * M.metric_inner(p, xi_at, lpx);
}

double loss(const Manifold& M, const ManifoldPoint& x, const ManifoldPoint& p,
            const QuantileIndex& q, LossKind kind) {
  check_index(M, q);
  const ManifoldPoint& at = (kind == LossKind::DataBased) ? x : p;
  return loss_with_field(M, x, p, q.beta, M.radial_field(q.xi, at), kind);
}

double sample_objective(const Manifold& M,
                        const std::vector<ManifoldPoint>& data,
                        const ManifoldPoint& p, const QuantileIndex& q,
                        LossKind kind) {
  if (data.empty())
    throw ContractViolation("sample objective requires nonempty data");
  check_index(M, q);
  std::vector<double> losses;
  losses.reserve(data.size());
  if (kind == LossKind::ParameterBased) {
    const TangentVector xi_p = M.radial_field(q.xi, p);
    for (const auto& x : data)
      losses.push_back(loss_with_field(M, x, p, q.beta, xi_p, kind));
  } else {
    for (const auto& x : data)
      losses.push_back(
          loss_with_field(M, x, p, q.beta, M.radial_field(q.xi, x), kind));
  }
  // Summed in sorted order so the value is a function of the multiset of
  // losses; reordering the data cannot change the result.
  std::sort(losses.begin(), losses.end());
  double acc = 0.0;
  for (double l : losses) acc += l;
  return acc / static_cast<double>(data.size());
}

TangentVector grad_exact_with_field(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p, double beta,
                                    const TangentVector& xi_at_x) {
  const TangentVector lpx = M.log_map(p, x);
  const double d = M.norm(p, lpx);
  if (d < kDegeneratePairDistance)
    throw DegeneratePairError("exact gradient is undefined at a coincident pair", d);
  TangentVector e1 = lpx;
  e1.vec /= d;

  const TangentVector carried = M.transport(x, p, xi_at_x);
  // All Jacobi scalings are 1 on a flat manifold, so the formula collapses
  // to the transported field term (and matches the transport approximation
  // bit for bit).
  if (M.flat()) return TangentVector{p, -lpx.vec / d - beta * carried.vec};

  const CurvatureOperator co = M.curvature_operator(p, e1);

  const int n = M.dimension();
  Eigen::VectorXd alpha(n);
  for (int j = 0; j < n; ++j)
    alpha[j] = M.metric_inner(p, carried, co.basis[static_cast<std::size_t>(j)]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(co.matrix);
  if (eig.info() != Eigen::Success)
    throw NumericalError("curvature operator eigendecomposition failed");

  // Coefficients in the adapted basis: -e1 - beta * sum_i s_i <c, e_i> e_i,
  // with eigenvalues clamped to the nonpositive axis.
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
  coeffs[0] = -1.0;
  for (int i = 0; i < n; ++i) {
    const double kappa = std::min(eig.eigenvalues()[i], 0.0);
    const double s = jacobi_scale(d, kappa);
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    coeffs -= beta * s * v.dot(alpha) * v;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(M.ambient_size());
  for (int j = 0; j < n; ++j)
    out += coeffs[j] * co.basis[static_cast<std::size_t>(j)].vec;
  return TangentVector{p, std::move(out)};
}

TangentVector grad_exact(const Manifold& M, const ManifoldPoint& x,
                         const ManifoldPoint& p, const QuantileIndex& q) {
  check_index(M, q);
  return grad_exact_with_field(M, x, p, q.beta, M.radial_field(q.xi, x));
}

TangentVector grad_transport_with_field(const Manifold& M,
                                        const ManifoldPoint& x,
                                        const ManifoldPoint& p, double beta,
                                        const TangentVector& xi_at_x) {
  const TangentVector lpx = M.log_map(p, x);
  const double d = M.norm(p, lpx);
  TangentVector carried = M.transport(x, p, xi_at_x);
  if (d < kDegeneratePairDistance) {
    carried.vec *= -beta;
    return carried;
  }
  return TangentVector{p, -lpx.vec / d - beta * carried.vec};
}

TangentVector grad_transport_approx(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p,
                                    const QuantileIndex& q) {
  check_index(M, q);
  return grad_transport_with_field(M, x, p, q.beta, M.radial_field(q.xi, x));
}

TangentVector grad_radial_approx(const Manifold& M, const ManifoldPoint& x,
                                 const ManifoldPoint& p,
                                 const QuantileIndex& q) {
  check_index(M, q);
  TangentVector xi_p = M.radial_field(q.xi, p);
  const TangentVector lpx = M.log_map(p, x);
  const double d = M.norm(p, lpx);
  if (d < kDegeneratePairDistance) {
    xi_p.vec *= -q.beta;
    return xi_p;
  }
  return TangentVector{p, -lpx.vec / d - q.beta * xi_p.vec};
}

TangentVector grad_exact_hyperbolic(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p,
                                    const QuantileIndex& q) {
  check_index(M, q);
  const auto* hyp = dynamic_cast<const Hyperboloid*>(&M);
  if (hyp == nullptr)
    throw ContractViolation(
        "closed-form hyperbolic gradient requires a hyperboloid manifold");
  const TangentVector lpx = M.log_map(p, x);
  const double d = M.norm(p, lpx);
  if (d < kDegeneratePairDistance)
    throw DegeneratePairError("exact gradient is undefined at a coincident pair", d);
  const TangentVector xi_x = M.radial_field(q.xi, x);
  const TangentVector carried = M.transport(x, p, xi_x);
  const TangentVector lxp = M.log_map(x, p);
  const double s = jacobi_scale(d, hyp->curvature());
  const double radial_coef = M.metric_inner(x, xi_x, lxp) / d;
  Eigen::VectorXd out = -lpx.vec / d -
                        q.beta * (s * carried.vec +
                                  (s - 1.0) * radial_coef * lpx.vec / d);
  return TangentVector{p, std::move(out)};
}

}  // namespace hadaq

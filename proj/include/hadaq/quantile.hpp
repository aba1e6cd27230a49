#pragma once

#include <vector>

#include "hadaq/geometry.hpp"

namespace hadaq {

/// Whether the directional term of the quantile loss is measured in the
/// tangent space at the data point or at the candidate point. The two
/// coincide on flat space but differ in curvature.
enum class LossKind { DataBased, ParameterBased };

/// How descent steps are computed. Exact applies only to the data-based
/// loss on locally symmetric manifolds (all shipped manifolds qualify);
/// the two approximations replace the curvature-corrected directional term
/// with a parallel-transported or locally evaluated field, and
/// FiniteDifference differentiates the sample objective numerically.
enum class GradientMode { Exact, TransportApprox, RadialApprox, FiniteDifference };

/// Index of a quantile: magnitude beta in [0,1) and a direction at infinity.
struct QuantileIndex {
  double beta = 0.0;
  BoundaryDirection xi;
};

/// Two points closer than this are treated as coincident by gradients and
/// descent steps.
inline constexpr double kDegeneratePairDistance = 1e-10;

void check_index(const Manifold& M, const QuantileIndex& q);

/// Per-point quantile loss. Data-based: d(p,x) - beta <xi_x, log_x(p)>;
/// parameter-based: d(p,x) + beta <xi_p, log_p(x)>. Zero when x == p.
double loss(const Manifold& M, const ManifoldPoint& x, const ManifoldPoint& p,
            const QuantileIndex& q, LossKind kind);

/// Mean loss over a sample.
double sample_objective(const Manifold& M,
                        const std::vector<ManifoldPoint>& data,
                        const ManifoldPoint& p, const QuantileIndex& q,
                        LossKind kind);

/// Exact Riemannian gradient of the data-based loss in p, via the
/// eigendecomposition of the curvature operator along the connecting
/// geodesic. Throws DegeneratePairError when d(p,x) is below the threshold.
TangentVector grad_exact(const Manifold& M, const ManifoldPoint& x,
                         const ManifoldPoint& p, const QuantileIndex& q);

/// Transport approximation: -log_p(x)/d - beta * transport(x->p, xi_x).
/// At a coincident pair returns -beta * xi_p.
TangentVector grad_transport_approx(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p,
                                    const QuantileIndex& q);

/// Radial approximation: -log_p(x)/d - beta * xi_p, same coincident-pair
/// convention.
TangentVector grad_radial_approx(const Manifold& M, const ManifoldPoint& x,
                                 const ManifoldPoint& p,
                                 const QuantileIndex& q);

/// Closed form of the exact gradient on constant-curvature hyperbolic
/// space; agrees with grad_exact and skips the eigendecomposition.
TangentVector grad_exact_hyperbolic(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p,
                                    const QuantileIndex& q);

// Lower-level variants taking a precomputed radial field value, so batch
// callers can evaluate the field once per data point.
double loss_with_field(const Manifold& M, const ManifoldPoint& x,
                       const ManifoldPoint& p, double beta,
                       const TangentVector& xi_at, LossKind kind);
TangentVector grad_exact_with_field(const Manifold& M, const ManifoldPoint& x,
                                    const ManifoldPoint& p, double beta,
                                    const TangentVector& xi_at_x);
TangentVector grad_transport_with_field(const Manifold& M,
                                        const ManifoldPoint& x,
                                        const ManifoldPoint& p, double beta,
                                        const TangentVector& xi_at_x);

/// Jacobi scaling g'(0)/g(1) for curvature kappa <= 0 at separation d:
/// 1 when kappa == 0, z/sinh(z) with z = d sqrt(-kappa) otherwise.
double jacobi_scale(double d, double kappa);

}  // namespace hadaq

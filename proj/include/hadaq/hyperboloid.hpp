#pragma once

#include "hadaq/geometry.hpp"

namespace hadaq {

/// Hyperbolic space of constant curvature kappa < 0 in the hyperboloid
/// model: the upper sheet of <x,x>_L = 1/kappa in Minkowski space R^{1,n},
/// where <x,y>_L = -x0 y0 + sum_i xi yi. The Riemannian metric is the
/// restriction of the Minkowski form, which is positive definite on every
/// tangent space of the sheet.
class Hyperboloid final : public Manifold {
 public:
  Hyperboloid(int n, double curvature);

  double curvature() const { return curvature_; }
  double radius() const { return radius_; }  // 1/sqrt(-curvature)

  static double minkowski(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

  std::map<std::string, double> params() const override;
  std::vector<TangentVector> orthonormal_basis(
      const ManifoldPoint& x) const override;

  /// Lift from the Poincare ball (unit disk scaled to this curvature).
  ManifoldPoint from_poincare(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_poincare(const ManifoldPoint& x) const;

 protected:
  Eigen::VectorXd validate_coords(const Eigen::VectorXd& coords,
                                  double tol) const override;
  Eigen::VectorXd project_tangent(const ManifoldPoint& base,
                                  const Eigen::VectorXd& vec) const override;
  Eigen::VectorXd base_coords() const override;
  double inner_impl(const ManifoldPoint& x, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& v) const override;
  double distance_impl(const ManifoldPoint& x,
                       const ManifoldPoint& y) const override;
  ManifoldPoint exp_impl(const ManifoldPoint& x,
                         const TangentVector& v) const override;
  TangentVector log_impl(const ManifoldPoint& x,
                         const ManifoldPoint& y) const override;
  TangentVector transport_impl(const ManifoldPoint& x, const ManifoldPoint& y,
                               const TangentVector& v) const override;
  TangentVector radial_field_impl(const BoundaryDirection& xi,
                                  const ManifoldPoint& x) const override;
  Eigen::MatrixXd curvature_matrix(
      const ManifoldPoint& p,
      const std::vector<TangentVector>& basis) const override;

 private:
  Eigen::VectorXd tangential_part(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v) const;

  double curvature_;
  double radius_;
};

}  // namespace hadaq

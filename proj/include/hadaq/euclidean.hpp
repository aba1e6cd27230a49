#pragma once

#include "hadaq/geometry.hpp"

namespace hadaq {

/// Flat space R^n with the standard inner product.
class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int n);

  std::map<std::string, double> params() const override;
  bool flat() const override { return true; }
  std::vector<TangentVector> orthonormal_basis(
      const ManifoldPoint& x) const override;

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
};

}  // namespace hadaq

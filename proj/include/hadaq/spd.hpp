#pragma once

#include "hadaq/geometry.hpp"

namespace hadaq {

/// Symmetric positive definite m x m matrices with the affine-invariant
/// (trace) metric <u,v>_x = tr(x^-1 u x^-1 v). Points and tangents are
/// stored as row-major flattened matrices; tangents are symmetric.
///
/// This is a symmetric space with sectional curvatures in [-1/2, 0]; all
/// matrix functions go through symmetric eigendecompositions.
class Spd final : public Manifold {
 public:
  explicit Spd(int m);

  int matrix_size() const { return m_; }

  Eigen::MatrixXd to_matrix(const Eigen::VectorXd& flat) const;
  Eigen::VectorXd to_flat(const Eigen::MatrixXd& mat) const;

  std::map<std::string, double> params() const override;
  std::vector<TangentVector> orthonormal_basis(
      const ManifoldPoint& x) const override;

  /// Frobenius-orthonormal basis of symmetric m x m matrices: unit diagonal
  /// matrices first, then (Eij + Eji)/sqrt(2) in row-major order.
  std::vector<Eigen::MatrixXd> symmetric_basis() const;

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
  int m_;
};

}  // namespace hadaq

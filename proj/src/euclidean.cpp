#include "hadaq/euclidean.hpp"

namespace hadaq {

Euclidean::Euclidean(int n) : Manifold("euclidean", n, n) {}

std::map<std::string, double> Euclidean::params() const {
  return {{"dimension", static_cast<double>(dimension())}};
}

Eigen::VectorXd Euclidean::validate_coords(const Eigen::VectorXd& coords,
                                           double /*tol*/) const {
  return coords;
}

Eigen::VectorXd Euclidean::project_tangent(const ManifoldPoint& /*base*/,
                                           const Eigen::VectorXd& vec) const {
  return vec;
}

Eigen::VectorXd Euclidean::base_coords() const {
  return Eigen::VectorXd::Zero(ambient_size());
}

double Euclidean::inner_impl(const ManifoldPoint& /*x*/,
                             const Eigen::VectorXd& u,
                             const Eigen::VectorXd& v) const {
  return u.dot(v);
}

double Euclidean::distance_impl(const ManifoldPoint& x,
                                const ManifoldPoint& y) const {
  return (x.coords - y.coords).norm();
}

ManifoldPoint Euclidean::exp_impl(const ManifoldPoint& x,
                                  const TangentVector& v) const {
  return ManifoldPoint{x.coords + v.vec, id()};
}

TangentVector Euclidean::log_impl(const ManifoldPoint& x,
                                  const ManifoldPoint& y) const {
  return TangentVector{x, y.coords - x.coords};
}

TangentVector Euclidean::transport_impl(const ManifoldPoint& /*x*/,
                                        const ManifoldPoint& y,
                                        const TangentVector& v) const {
  return TangentVector{y, v.vec};
}

TangentVector Euclidean::radial_field_impl(const BoundaryDirection& xi,
                                           const ManifoldPoint& x) const {
  // Constant field: the same direction vector at every point.
  return TangentVector{x, xi.unit_dir().vec};
}

std::vector<TangentVector> Euclidean::orthonormal_basis(
    const ManifoldPoint& x) const {
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(dimension()));
  for (int i = 0; i < dimension(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dimension());
    e[i] = 1.0;
    basis.push_back(TangentVector{x, std::move(e)});
  }
  return basis;
}

Eigen::MatrixXd Euclidean::curvature_matrix(
    const ManifoldPoint& /*p*/,
    const std::vector<TangentVector>& /*basis*/) const {
  return Eigen::MatrixXd::Zero(dimension(), dimension());
}

}  // namespace hadaq

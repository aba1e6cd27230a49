#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hadaq/errors.hpp"

namespace hadaq {

class Manifold;

/// A point on a manifold, stored in ambient coordinates. Matrix-valued
/// points are flattened row-major. The id ties the point to the manifold
/// instance that created it.
struct ManifoldPoint {
  Eigen::VectorXd coords;
  std::uint64_t manifold_id = 0;
};

/// A tangent vector attached to a base point, in the same ambient
/// representation as the point coordinates.
struct TangentVector {
  ManifoldPoint base;
  Eigen::VectorXd vec;
};

/// A direction at infinity, represented by the unit initial velocity of its
/// canonical ray at an anchor point. Two representations describe the same
/// direction iff their rays are asymptotic, which is testable through
/// Manifold::radial_field.
struct BoundaryDirection {
  TangentVector dir;

  const ManifoldPoint& anchor() const { return dir.base; }
  const TangentVector& unit_dir() const { return dir; }
};

/// The operator u -> R(e1, u) e1 at a point, expressed in an orthonormal
/// tangent basis whose first element is e1. The matrix is symmetric with
/// nonpositive spectrum, and e1 is an eigenvector with eigenvalue 0.
struct CurvatureOperator {
  Eigen::MatrixXd matrix;
  std::vector<TangentVector> basis;  // basis[0] == e1
};

/// Abstract manifold with the operations needed for quantile computation.
/// All implementations are Hadamard manifolds: complete, simply connected,
/// nonpositively curved, so exp is a global diffeomorphism and geodesics
/// between points are unique.
///
/// Every operation is a pure function of its arguments; instances hold no
/// mutable state and may be shared freely across threads.
class Manifold {
 public:
  virtual ~Manifold() = default;

  std::uint64_t id() const { return id_; }
  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }          // intrinsic dimension
  int ambient_size() const { return ambient_; }   // length of coords

  /// Construction parameters (dimension, curvature, ...), for serialization.
  virtual std::map<std::string, double> params() const = 0;

  /// True when every sectional curvature vanishes.
  virtual bool flat() const { return false; }

  /// Canonical base point (origin, hyperboloid apex, identity matrix).
  ManifoldPoint base_point() const;

  /// Validates and normalizes raw coordinates into a point. Coordinates
  /// within `tol` of the manifold are snapped onto it (hyperboloid sheets
  /// are rescaled, matrices symmetrized); anything further away is
  /// rejected with a ValidationError.
  ManifoldPoint point(const Eigen::VectorXd& coords, double tol = 1e-6) const;

  /// Projects `vec` onto the tangent space at `base`. Rejects vectors whose
  /// normal component exceeds `tol` relative to their size.
  TangentVector tangent(const ManifoldPoint& base, const Eigen::VectorXd& vec,
                        double tol = 1e-6) const;

  /// Normalizes (base, vec) into a unit-speed boundary direction.
  BoundaryDirection direction(const ManifoldPoint& anchor,
                              const Eigen::VectorXd& vec) const;

  double metric_inner(const ManifoldPoint& x, const TangentVector& u,
                      const TangentVector& v) const;
  double norm(const ManifoldPoint& x, const TangentVector& v) const;
  double distance(const ManifoldPoint& x, const ManifoldPoint& y) const;
  ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) const;
  TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) const;

  /// Parallel transport of v from x to y along the connecting geodesic.
  TangentVector transport(const ManifoldPoint& x, const ManifoldPoint& y,
                          const TangentVector& v) const;

  /// Unit tangent at x pointing toward the boundary direction xi: the
  /// initial velocity of the ray from x asymptotic to xi's anchor ray.
  TangentVector radial_field(const BoundaryDirection& xi,
                             const ManifoldPoint& x) const;

  /// Finite-time surrogate for the radial field: the normalized inverse
  /// image of the anchor ray at parameter t. Converges to radial_field as
  /// t grows (exponentially in strictly negative curvature, like 1/t along
  /// flat directions).
  TangentVector radial_field_limit(const BoundaryDirection& xi,
                                   const ManifoldPoint& x, double t) const;

  /// Numerical-limit evaluation of the radial field, doubling t until the
  /// change between successive evaluations is below `accept`. Throws a
  /// NumericalError carrying the last change if t_max is reached first.
  TangentVector radial_field_via_limit(const BoundaryDirection& xi,
                                       const ManifoldPoint& x,
                                       double accept = 1e-8,
                                       double t_max = 64.0) const;

  /// Orthonormal basis of the tangent space at x.
  virtual std::vector<TangentVector> orthonormal_basis(
      const ManifoldPoint& x) const = 0;

  /// Orthonormal basis whose first element is the given unit vector.
  std::vector<TangentVector> adapted_basis(const ManifoldPoint& x,
                                           const TangentVector& e1) const;

  /// Curvature operator of the plane field around e1; requires ||e1|| = 1
  /// within 1e-8.
  CurvatureOperator curvature_operator(const ManifoldPoint& p,
                                       const TangentVector& e1) const;

  /// Central-difference Riemannian gradient of f at p over an orthonormal
  /// basis; O(h^2) for smooth f. Throws on non-finite evaluations.
  TangentVector numerical_gradient(
      const std::function<double(const ManifoldPoint&)>& f,
      const ManifoldPoint& p, double h = 1e-4) const;

  void require_point(const ManifoldPoint& x) const;
  void require_tangent(const ManifoldPoint& x, const TangentVector& v) const;

 protected:
  Manifold(std::string name, int dim, int ambient);

  virtual Eigen::VectorXd validate_coords(const Eigen::VectorXd& coords,
                                          double tol) const = 0;
  virtual Eigen::VectorXd project_tangent(const ManifoldPoint& base,
                                          const Eigen::VectorXd& vec) const = 0;
  virtual Eigen::VectorXd base_coords() const = 0;
  virtual double inner_impl(const ManifoldPoint& x, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v) const = 0;
  virtual double distance_impl(const ManifoldPoint& x,
                               const ManifoldPoint& y) const = 0;
  virtual ManifoldPoint exp_impl(const ManifoldPoint& x,
                                 const TangentVector& v) const = 0;
  virtual TangentVector log_impl(const ManifoldPoint& x,
                                 const ManifoldPoint& y) const = 0;
  virtual TangentVector transport_impl(const ManifoldPoint& x,
                                       const ManifoldPoint& y,
                                       const TangentVector& v) const = 0;
  virtual TangentVector radial_field_impl(const BoundaryDirection& xi,
                                          const ManifoldPoint& x) const = 0;
  virtual Eigen::MatrixXd curvature_matrix(
      const ManifoldPoint& p, const std::vector<TangentVector>& basis) const = 0;

 private:
  std::uint64_t id_;
  std::string name_;
  int dim_;
  int ambient_;
};

}  // namespace hadaq

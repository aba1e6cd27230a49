#include "hadaq/hyperboloid.hpp"

#include <cmath>
#include <sstream>

namespace hadaq {

namespace {

// sinh(t)/t, stable through t = 0.
double sinhc(double t) {
  if (std::abs(t) < 1e-8) return 1.0 + t * t / 6.0;
  return std::sinh(t) / t;
}

}  // namespace

Hyperboloid::Hyperboloid(int n, double curvature)
    : Manifold("hyperboloid", n, n + 1), curvature_(curvature),
      radius_(1.0 / std::sqrt(-curvature)) {
  if (!(curvature < 0))
    throw ContractViolation("hyperboloid curvature must be negative");
}

double Hyperboloid::minkowski(const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

std::map<std::string, double> Hyperboloid::params() const {
  return {{"dimension", static_cast<double>(dimension())},
          {"curvature", curvature_}};
}

Eigen::VectorXd Hyperboloid::validate_coords(const Eigen::VectorXd& coords,
                                             double tol) const {
  if (coords[0] <= 0)
    throw ValidationError("hyperboloid: first coordinate must be positive");
  // Snap by recomputing the timelike coordinate from the spatial ones;
  // unlike rescaling by the Minkowski norm this stays stable far from the
  // apex, where cosh^2 - sinh^2 cancels catastrophically.
  const double x0 = std::sqrt(radius_ * radius_ +
                              coords.tail(dimension()).squaredNorm());
  const double drift = std::abs(coords[0] - x0) / x0;
  if (drift > tol) {
    std::ostringstream os;
    os << "hyperboloid: point is off the sheet by relative amount " << drift;
    throw ValidationError(os.str());
  }
  Eigen::VectorXd out = coords;
  out[0] = x0;
  return out;
}

Eigen::VectorXd Hyperboloid::project_tangent(const ManifoldPoint& base,
                                             const Eigen::VectorXd& vec) const {
  // Tangent space is the Minkowski-orthogonal complement of the point.
  return vec - curvature_ * minkowski(base.coords, vec) * base.coords;
}

Eigen::VectorXd Hyperboloid::base_coords() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ambient_size());
  x[0] = radius_;
  return x;
}

double Hyperboloid::inner_impl(const ManifoldPoint& /*x*/,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) const {
  return minkowski(u, v);
}

Eigen::VectorXd Hyperboloid::tangential_part(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& v) const {
  return v - curvature_ * minkowski(x, v) * x;
}

double Hyperboloid::distance_impl(const ManifoldPoint& x,
                                  const ManifoldPoint& y) const {
  // Through the tangential part of y at x: its norm is R sinh(d/R), which
  // avoids the acosh cancellation for nearby points.
  const Eigen::VectorXd w = tangential_part(x.coords, y.coords);
  const double s = std::sqrt(std::max(0.0, minkowski(w, w)));
  return radius_ * std::asinh(s / radius_);
}

ManifoldPoint Hyperboloid::exp_impl(const ManifoldPoint& x,
                                    const TangentVector& v) const {
  const double speed = std::sqrt(std::max(0.0, minkowski(v.vec, v.vec)));
  const double th = speed / radius_;
  Eigen::VectorXd out = std::cosh(th) * x.coords + sinhc(th) * v.vec;
  // Snap back onto the sheet to suppress drift.
  out[0] = std::sqrt(radius_ * radius_ + out.tail(dimension()).squaredNorm());
  return ManifoldPoint{std::move(out), id()};
}

TangentVector Hyperboloid::log_impl(const ManifoldPoint& x,
                                    const ManifoldPoint& y) const {
  Eigen::VectorXd w = tangential_part(x.coords, y.coords);
  const double s = std::sqrt(std::max(0.0, minkowski(w, w)));
  if (s < 1e-300) return TangentVector{x, Eigen::VectorXd::Zero(ambient_size())};
  const double d = radius_ * std::asinh(s / radius_);
  w *= d / s;
  return TangentVector{x, std::move(w)};
}

TangentVector Hyperboloid::transport_impl(const ManifoldPoint& x,
                                          const ManifoldPoint& y,
                                          const TangentVector& v) const {
  const double r2 = radius_ * radius_;
  const double q = minkowski(x.coords, y.coords);
  const double coef = minkowski(y.coords, v.vec) / (r2 - q);
  Eigen::VectorXd out = v.vec + coef * (x.coords + y.coords);
  // Re-project to clean up rounding.
  out = tangential_part(y.coords, out);
  return TangentVector{y, std::move(out)};
}

TangentVector Hyperboloid::radial_field_impl(const BoundaryDirection& xi,
                                             const ManifoldPoint& x) const {
  // The anchor ray tends to the null vector b = anchor + R * dir; the ray
  // from x asymptotic to it has initial velocity (-R^2 b / <x,b> - x) / R.
  const double r2 = radius_ * radius_;
  const Eigen::VectorXd b = xi.anchor().coords + radius_ * xi.unit_dir().vec;
  const double xb = minkowski(x.coords, b);
  if (!(xb < 0))
    throw NumericalError("hyperboloid: degenerate boundary pairing");
  Eigen::VectorXd out = (-r2 / xb) * b - x.coords;
  out /= radius_;
  out = tangential_part(x.coords, out);
  return TangentVector{x, std::move(out)};
}

std::vector<TangentVector> Hyperboloid::orthonormal_basis(
    const ManifoldPoint& x) const {
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(dimension()));
  for (int i = 0; i < ambient_size() && static_cast<int>(basis.size()) < dimension(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ambient_size());
    e[i] = 1.0;
    Eigen::VectorXd v = tangential_part(x.coords, e);
    for (const auto& b : basis) v -= minkowski(b.vec, v) * b.vec;
    const double n2 = minkowski(v, v);
    if (n2 < 1e-10) continue;
    v /= std::sqrt(n2);
    basis.push_back(TangentVector{x, std::move(v)});
  }
  if (static_cast<int>(basis.size()) != dimension())
    throw NumericalError("hyperboloid: orthonormal basis construction failed");
  return basis;
}

Eigen::MatrixXd Hyperboloid::curvature_matrix(
    const ManifoldPoint& /*p*/,
    const std::vector<TangentVector>& /*basis*/) const {
  // Constant curvature: the plane spanned by e1 and any orthogonal vector
  // has sectional curvature kappa, and e1 itself is flat.
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(dimension(), curvature_);
  diag[0] = 0.0;
  return diag.asDiagonal();
}

ManifoldPoint Hyperboloid::from_poincare(const Eigen::VectorXd& u) const {
  if (u.size() != dimension())
    throw ValidationError("hyperboloid: Poincare coordinates have wrong size");
  const double n2 = u.squaredNorm();
  if (n2 >= 1.0)
    throw ValidationError("hyperboloid: Poincare point outside the unit ball");
  Eigen::VectorXd x(ambient_size());
  x[0] = (1.0 + n2) / (1.0 - n2);
  x.tail(dimension()) = 2.0 / (1.0 - n2) * u;
  x *= radius_;
  return point(x, 1e-9);
}

Eigen::VectorXd Hyperboloid::to_poincare(const ManifoldPoint& x) const {
  require_point(x);
  const Eigen::VectorXd scaled = x.coords / radius_;
  return scaled.tail(dimension()) / (1.0 + scaled[0]);
}

}  // namespace hadaq

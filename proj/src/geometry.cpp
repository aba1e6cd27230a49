#include "hadaq/geometry.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace hadaq {

namespace {

std::uint64_t next_manifold_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

Manifold::Manifold(std::string name, int dim, int ambient)
    : id_(next_manifold_id()), name_(std::move(name)), dim_(dim),
      ambient_(ambient) {
  if (dim < 1) throw ContractViolation("manifold dimension must be >= 1");
}

ManifoldPoint Manifold::base_point() const {
  return ManifoldPoint{base_coords(), id_};
}

ManifoldPoint Manifold::point(const Eigen::VectorXd& coords, double tol) const {
  if (coords.size() != ambient_) {
    std::ostringstream os;
    os << name_ << ": expected " << ambient_ << " coordinates, got "
       << coords.size();
    throw ValidationError(os.str());
  }
  if (!coords.allFinite())
    throw ValidationError(name_ + ": point coordinates must be finite");
  return ManifoldPoint{validate_coords(coords, tol), id_};
}

TangentVector Manifold::tangent(const ManifoldPoint& base,
                                const Eigen::VectorXd& vec, double tol) const {
  require_point(base);
  if (vec.size() != ambient_)
    throw ValidationError(name_ + ": tangent vector has wrong ambient size");
  if (!vec.allFinite())
    throw ValidationError(name_ + ": tangent vector must be finite");
  Eigen::VectorXd projected = project_tangent(base, vec);
  const double drift = (projected - vec).norm();
  if (drift > tol * std::max(1.0, vec.norm()))
    throw ValidationError(name_ + ": vector is not tangent at the base point");
  return TangentVector{base, std::move(projected)};
}

BoundaryDirection Manifold::direction(const ManifoldPoint& anchor,
                                      const Eigen::VectorXd& vec) const {
  TangentVector t = tangent(anchor, vec);
  const double n = norm(anchor, t);
  if (n < 1e-12)
    throw ValidationError(name_ + ": boundary direction vector is zero");
  t.vec /= n;
  return BoundaryDirection{std::move(t)};
}

double Manifold::metric_inner(const ManifoldPoint& x, const TangentVector& u,
                              const TangentVector& v) const {
  require_tangent(x, u);
  require_tangent(x, v);
  return inner_impl(x, u.vec, v.vec);
}

double Manifold::norm(const ManifoldPoint& x, const TangentVector& v) const {
  require_tangent(x, v);
  return std::sqrt(std::max(0.0, inner_impl(x, v.vec, v.vec)));
}

double Manifold::distance(const ManifoldPoint& x, const ManifoldPoint& y) const {
  require_point(x);
  require_point(y);
  return distance_impl(x, y);
}

ManifoldPoint Manifold::exp_map(const ManifoldPoint& x,
                                const TangentVector& v) const {
  require_tangent(x, v);
  return exp_impl(x, v);
}

TangentVector Manifold::log_map(const ManifoldPoint& x,
                                const ManifoldPoint& y) const {
  require_point(x);
  require_point(y);
  return log_impl(x, y);
}

TangentVector Manifold::transport(const ManifoldPoint& x,
                                  const ManifoldPoint& y,
                                  const TangentVector& v) const {
  require_tangent(x, v);
  require_point(y);
  return transport_impl(x, y, v);
}

TangentVector Manifold::radial_field(const BoundaryDirection& xi,
                                     const ManifoldPoint& x) const {
  require_tangent(xi.anchor(), xi.unit_dir());
  require_point(x);
  // At the anchor itself the field is the defining direction.
  if (x.coords == xi.anchor().coords)
    return TangentVector{x, xi.unit_dir().vec};
  return radial_field_impl(xi, x);
}

TangentVector Manifold::radial_field_limit(const BoundaryDirection& xi,
                                           const ManifoldPoint& x,
                                           double t) const {
  require_tangent(xi.anchor(), xi.unit_dir());
  require_point(x);
  TangentVector scaled = xi.unit_dir();
  scaled.vec *= t;
  const ManifoldPoint far = exp_impl(xi.anchor(), scaled);
  TangentVector lg = log_impl(x, far);
  const double n = norm(x, lg);
  if (n < 1e-12)
    throw NumericalError(name_ + ": radial field limit hit a coincident point");
  lg.vec /= n;
  return lg;
}

TangentVector Manifold::radial_field_via_limit(const BoundaryDirection& xi,
                                               const ManifoldPoint& x,
                                               double accept,
                                               double t_max) const {
  double t = t_max / 2.0;
  TangentVector prev = radial_field_limit(xi, x, t);
  double change = 0.0;
  while (t < t_max * (1.0 + 1e-12)) {
    t *= 2.0;
    TangentVector cur = radial_field_limit(xi, x, t);
    change = std::sqrt(std::max(
        0.0, inner_impl(x, cur.vec - prev.vec, cur.vec - prev.vec)));
    if (change < accept) return cur;
    prev = std::move(cur);
  }
  std::ostringstream os;
  os << name_ << ": radial field limit did not settle by t=" << t_max
     << " (change " << change << ")";
  throw NumericalError(os.str(), change);
}

std::vector<TangentVector> Manifold::adapted_basis(
    const ManifoldPoint& x, const TangentVector& e1) const {
  require_tangent(x, e1);
  std::vector<TangentVector> candidates;
  candidates.push_back(e1);
  for (auto& b : orthonormal_basis(x)) candidates.push_back(std::move(b));

  // Modified Gram-Schmidt in the metric at x; exactly one candidate drops.
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(dim_));
  for (auto& c : candidates) {
    Eigen::VectorXd v = c.vec;
    for (const auto& b : basis) v -= inner_impl(x, b.vec, v) * b.vec;
    const double n2 = inner_impl(x, v, v);
    if (n2 < 1e-14) continue;
    v /= std::sqrt(n2);
    basis.push_back(TangentVector{x, std::move(v)});
    if (static_cast<int>(basis.size()) == dim_) break;
  }
  if (static_cast<int>(basis.size()) != dim_)
    throw NumericalError(name_ + ": failed to build an adapted basis");
  return basis;
}

CurvatureOperator Manifold::curvature_operator(const ManifoldPoint& p,
                                               const TangentVector& e1) const {
  require_tangent(p, e1);
  const double n = norm(p, e1);
  if (std::abs(n - 1.0) > 1e-8)
    throw ContractViolation(
        name_ + ": curvature operator requires a unit reference vector");
  CurvatureOperator co;
  co.basis = adapted_basis(p, e1);
  co.matrix = curvature_matrix(p, co.basis);
  return co;
}

TangentVector Manifold::numerical_gradient(
    const std::function<double(const ManifoldPoint&)>& f,
    const ManifoldPoint& p, double h) const {
  require_point(p);
  if (!(h > 0)) throw ContractViolation("finite-difference step must be > 0");
  const auto basis = orthonormal_basis(p);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(ambient_);
  for (const auto& b : basis) {
    TangentVector step = b;
    step.vec *= h;
    const double fp = f(exp_impl(p, step));
    step.vec = -step.vec;
    const double fm = f(exp_impl(p, step));
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError(name_ + ": non-finite value in numerical gradient");
    acc += ((fp - fm) / (2.0 * h)) * b.vec;
  }
  return TangentVector{p, std::move(acc)};
}

void Manifold::require_point(const ManifoldPoint& x) const {
  if (x.manifold_id != id_)
    throw ContractViolation(name_ + ": point belongs to a different manifold");
  if (x.coords.size() != ambient_)
    throw ContractViolation(name_ + ": point has wrong ambient size");
}

void Manifold::require_tangent(const ManifoldPoint& x,
                               const TangentVector& v) const {
  require_point(x);
  require_point(v.base);
  if (v.vec.size() != ambient_)
    throw ContractViolation(name_ + ": tangent has wrong ambient size");
  const double gap = (v.base.coords - x.coords).lpNorm<Eigen::Infinity>();
  if (gap > 1e-9 * std::max(1.0, x.coords.lpNorm<Eigen::Infinity>()))
    throw ContractViolation(name_ + ": tangent base point mismatch");
}

}  // namespace hadaq

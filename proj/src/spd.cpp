#include "hadaq/spd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <sstream>

namespace hadaq {

namespace {

using Mat = Eigen::MatrixXd;

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

struct SymEig {
  Eigen::VectorXd values;
  Mat vectors;
};

SymEig sym_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(a));
  if (solver.info() != Eigen::Success)
    throw NumericalError("spd: symmetric eigendecomposition failed");
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

Mat apply_spectral(const SymEig& eig, const std::function<double(double)>& f) {
  Eigen::VectorXd mapped(eig.values.size());
  for (int i = 0; i < eig.values.size(); ++i) mapped[i] = f(eig.values[i]);
  return symmetrize(eig.vectors * mapped.asDiagonal() *
                    eig.vectors.transpose());
}

constexpr double kFloor = 1e-12;

// Log of an SPD matrix. Eigenvalues are floored at 1e-12; clamping beyond
// 1e-8 relative to the largest eigenvalue is treated as a failure.
Mat spd_log(const Mat& a) {
  const SymEig eig = sym_eig(a);
  const double top = std::max(eig.values.maxCoeff(), kFloor);
  for (int i = 0; i < eig.values.size(); ++i) {
    if (eig.values[i] < kFloor && (kFloor - eig.values[i]) > 1e-8 * top) {
      std::ostringstream os;
      os << "spd: matrix log needs eigenvalue clamping beyond tolerance "
            "(eigenvalue "
         << eig.values[i] << ")";
      throw NumericalError(os.str(), kFloor - eig.values[i]);
    }
  }
  return apply_spectral(
      eig, [](double l) { return std::log(std::max(l, kFloor)); });
}

Mat sym_exp(const Mat& a) {
  return apply_spectral(sym_eig(a), [](double l) { return std::exp(l); });
}

Mat spd_sqrt(const Mat& a) {
  return apply_spectral(sym_eig(a),
                        [](double l) { return std::sqrt(std::max(l, 0.0)); });
}

Mat spd_inv_sqrt(const Mat& a) {
  return apply_spectral(sym_eig(a), [](double l) {
    return 1.0 / std::sqrt(std::max(l, 1e-300));
  });
}

}  // namespace

Spd::Spd(int m) : Manifold("spd", m * (m + 1) / 2, m * m), m_(m) {
  if (m < 1) throw ContractViolation("spd: matrix size must be >= 1");
}

Mat Spd::to_matrix(const Eigen::VectorXd& flat) const {
  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMat>(flat.data(), m_, m_);
}

Eigen::VectorXd Spd::to_flat(const Mat& mat) const {
  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat rm = mat;
  return Eigen::Map<const Eigen::VectorXd>(rm.data(), m_ * m_);
}

std::map<std::string, double> Spd::params() const {
  return {{"size", static_cast<double>(m_)}};
}

Eigen::VectorXd Spd::validate_coords(const Eigen::VectorXd& coords,
                                     double tol) const {
  Mat a = to_matrix(coords);
  const double asym = (a - a.transpose()).lpNorm<Eigen::Infinity>();
  if (asym > tol * std::max(1.0, a.lpNorm<Eigen::Infinity>())) {
    std::ostringstream os;
    os << "spd: matrix is not symmetric (asymmetry " << asym << ")";
    throw ValidationError(os.str());
  }
  a = symmetrize(a);
  const SymEig eig = sym_eig(a);
  if (eig.values.minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "spd: matrix is not positive definite (min eigenvalue "
       << eig.values.minCoeff() << ")";
    throw ValidationError(os.str());
  }
  return to_flat(a);
}

Eigen::VectorXd Spd::project_tangent(const ManifoldPoint& /*base*/,
                                     const Eigen::VectorXd& vec) const {
  return to_flat(symmetrize(to_matrix(vec)));
}

Eigen::VectorXd Spd::base_coords() const {
  return to_flat(Mat::Identity(m_, m_));
}

double Spd::inner_impl(const ManifoldPoint& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v) const {
  const Mat xm = to_matrix(x.coords);
  Eigen::LLT<Mat> llt(xm);
  if (llt.info() != Eigen::Success)
    throw NumericalError("spd: point is numerically not positive definite");
  const Mat a = llt.solve(to_matrix(u));
  const Mat b = llt.solve(to_matrix(v));
  // tr(a b) with a, b = x^-1 u, x^-1 v.
  return (a.array() * b.transpose().array()).sum();
}

double Spd::distance_impl(const ManifoldPoint& x,
                          const ManifoldPoint& y) const {
  const Mat xis = spd_inv_sqrt(to_matrix(x.coords));
  const Mat middle = symmetrize(xis * to_matrix(y.coords) * xis);
  return spd_log(middle).norm();
}

ManifoldPoint Spd::exp_impl(const ManifoldPoint& x,
                            const TangentVector& v) const {
  const Mat xm = to_matrix(x.coords);
  const Mat xs = spd_sqrt(xm);
  const Mat xis = spd_inv_sqrt(xm);
  const Mat inner = symmetrize(xis * to_matrix(v.vec) * xis);
  const Mat out = symmetrize(xs * sym_exp(inner) * xs);
  return ManifoldPoint{to_flat(out), id()};
}

TangentVector Spd::log_impl(const ManifoldPoint& x,
                            const ManifoldPoint& y) const {
  const Mat xm = to_matrix(x.coords);
  const Mat xs = spd_sqrt(xm);
  const Mat xis = spd_inv_sqrt(xm);
  const Mat middle = symmetrize(xis * to_matrix(y.coords) * xis);
  const Mat out = symmetrize(xs * spd_log(middle) * xs);
  return TangentVector{x, to_flat(out)};
}

TangentVector Spd::transport_impl(const ManifoldPoint& x,
                                  const ManifoldPoint& y,
                                  const TangentVector& v) const {
  // E = (y x^-1)^{1/2} realized as x^{1/2} (x^{-1/2} y x^{-1/2})^{1/2} x^{-1/2};
  // transported vector is E v E^T.
  const Mat xm = to_matrix(x.coords);
  const Mat xs = spd_sqrt(xm);
  const Mat xis = spd_inv_sqrt(xm);
  const Mat middle = symmetrize(xis * to_matrix(y.coords) * xis);
  const Mat e = xs * spd_sqrt(middle) * xis;
  const Mat out = symmetrize(e * to_matrix(v.vec) * e.transpose());
  return TangentVector{y, to_flat(out)};
}

TangentVector Spd::radial_field_impl(const BoundaryDirection& xi,
                                     const ManifoldPoint& x) const {
  // Write the anchor ray as gamma(t) = b exp(tH) b^T with H diagonal
  // (eigenvalues of the normalized direction, sorted descending) and
  // b = anchor^{1/2} k. The ray from x asymptotic to gamma is
  // c exp(tH) c^T where c = b p, p upper triangular with positive diagonal
  // and p p^T = b^-1 x b^-T; its initial velocity is c H c^T. The
  // triangular factor is unique, and any residual freedom inside repeated
  // eigenvalue blocks commutes with H, so the field is well defined.
  const Mat a = to_matrix(xi.anchor().coords);
  const Mat as = spd_sqrt(a);
  const Mat asi = spd_inv_sqrt(a);
  const Mat dir = symmetrize(asi * to_matrix(xi.unit_dir().vec) * asi);

  SymEig eig = sym_eig(dir);
  const int m = m_;
  Eigen::VectorXd h(m);
  Mat k(m, m);
  for (int i = 0; i < m; ++i) {  // descending order
    h[i] = eig.values[m - 1 - i];
    k.col(i) = eig.vectors.col(m - 1 - i);
  }

  const Mat b = as * k;
  Eigen::PartialPivLU<Mat> blu(b);
  const Mat binv_x = blu.solve(to_matrix(x.coords));
  const Mat y = symmetrize(blu.solve(binv_x.transpose()).transpose());

  // y = U U^T with U upper triangular: reverse-order Cholesky.
  Mat rev = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) rev(i, j) = y(m - 1 - i, m - 1 - j);
  Eigen::LLT<Mat> llt(rev);
  if (llt.info() != Eigen::Success)
    throw NumericalError("spd: radial field factorization failed");
  const Mat l = llt.matrixL();
  Mat u = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) u(i, j) = l(m - 1 - i, m - 1 - j);

  const Mat c = b * u;
  const Mat out = symmetrize(c * h.asDiagonal() * c.transpose());
  return TangentVector{x, to_flat(out)};
}

std::vector<Eigen::MatrixXd> Spd::symmetric_basis() const {
  std::vector<Mat> basis;
  basis.reserve(static_cast<std::size_t>(dimension()));
  for (int i = 0; i < m_; ++i) {
    Mat s = Mat::Zero(m_, m_);
    s(i, i) = 1.0;
    basis.push_back(std::move(s));
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < m_; ++i)
    for (int j = i + 1; j < m_; ++j) {
      Mat s = Mat::Zero(m_, m_);
      s(i, j) = inv_sqrt2;
      s(j, i) = inv_sqrt2;
      basis.push_back(std::move(s));
    }
  return basis;
}

std::vector<TangentVector> Spd::orthonormal_basis(
    const ManifoldPoint& x) const {
  const Mat xs = spd_sqrt(to_matrix(x.coords));
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(dimension()));
  for (const Mat& s : symmetric_basis())
    basis.push_back(TangentVector{x, to_flat(symmetrize(xs * s * xs))});
  return basis;
}

Eigen::MatrixXd Spd::curvature_matrix(
    const ManifoldPoint& p, const std::vector<TangentVector>& basis) const {
  // Entry (k,l) is tr([p^-1 e1, p^-1 w_k] [p^-1 e1, p^-1 w_l]) / 4 with
  // [.,.] the matrix commutator; e1 is basis[0].
  const int n = dimension();
  const Mat pm = to_matrix(p.coords);
  Eigen::LLT<Mat> llt(pm);
  if (llt.info() != Eigen::Success)
    throw NumericalError("spd: point is numerically not positive definite");
  std::vector<Mat> scaled;
  scaled.reserve(basis.size());
  for (const auto& w : basis) scaled.push_back(llt.solve(to_matrix(w.vec)));
  const Mat& e1 = scaled[0];
  std::vector<Mat> brackets;
  brackets.reserve(basis.size());
  for (const Mat& w : scaled) brackets.push_back(e1 * w - w * e1);
  Mat out(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      const double val =
          0.25 * (brackets[static_cast<std::size_t>(k)].array() *
                  brackets[static_cast<std::size_t>(l)].transpose().array())
                     .sum();
      out(k, l) = val;
      out(l, k) = val;
    }
  return out;
}

}  // namespace hadaq

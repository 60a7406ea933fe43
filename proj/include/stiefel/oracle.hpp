#pragma once

// Independent reference computations for tests and acceptance runs. None of
// these call the code path they certify: the Kronecker solve never touches the
// Schur-based Sylvester solver, and the finite-difference Fréchet derivative
// only uses expm.

#include <algorithm>
#include <cmath>
#include <utility>

#include "stiefel/ssaf.hpp"

namespace stiefel::oracle {

/// Great-circle distance on the unit sphere, arccos(x^T y) with clamping.
inline double sphere_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::ShapeMismatch, "sphere_distance: length mismatch");
  if (std::abs(x.norm() - 1.0) > 1e-10 || std::abs(y.norm() - 1.0) > 1e-10) {
    throw Error(ErrorKind::NotUnit, "sphere_distance: inputs must be unit vectors");
  }
  return std::acos(std::clamp(x.dot(y), -1.0, 1.0));
}

/// Dense solve of (I (x) P + S^T (x) I) vec(X) = vec(C). p <= 30.
inline Matrix kronecker_sylvester(const Matrix& p, const Matrix& s, const Matrix& c) {
  if (p.rows() != p.cols() || s.rows() != s.cols() || c.rows() != p.rows() || c.cols() != s.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "kronecker_sylvester: incompatible shapes");
  }
  if (p.rows() > 30 || s.rows() > 30) {
    throw Error(ErrorKind::SizeGuard, "kronecker_sylvester: dimension above 30");
  }
  const Eigen::Index m = p.rows();
  const Eigen::Index k = s.rows();
  Matrix op = Matrix::Zero(m * k, m * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    op.block(j * m, j * m, m, m) += p;
    for (Eigen::Index l = 0; l < k; ++l) {
      op.block(l * m, j * m, m, m).diagonal().array() += s(j, l);
    }
  }
  Eigen::FullPivLU<Matrix> lu(op);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularPencil, "kronecker_sylvester: singular system");
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  Eigen::VectorXd x = lu.solve(rhs);
  return Eigen::Map<Matrix>(x.data(), m, k);
}

/// Central difference (expm(A + hE) - expm(A - hE)) / 2h.
inline Matrix finite_difference_frechet(const Matrix& a, const Matrix& e, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw Error(ErrorKind::InvalidArgument, "finite_difference_frechet: h must lie in [1e-7, 1e-3]");
  }
  detail::require_same_shape(a, e, "finite_difference_frechet");
  return (expm(a + h * e) - expm(a - h * e)) / (2.0 * h);
}

/// Number of free coordinates of (dOmega, dK): p(p-1)/2 + (n-p)p.
inline Eigen::Index tangent_dimension(Eigen::Index n, Eigen::Index p) { return p * (p - 1) / 2 + (n - p) * p; }

/// Newton update from the un-truncated linearization
///   D expm(A)[[dOmega, -dK^T], [dK, 0]] I_{n,p} = [W; N]
/// assembled column by column with the exact Fréchet derivative over a basis
/// of (dOmega, dK) and solved in the least-squares sense. n <= 12.
inline NewtonUpdate exact_step_reference(const StiefelFrame& frame, const TangentFactors& f,
                                         const MismatchPartition& part) {
  const Eigen::Index n = frame.n();
  const Eigen::Index p = frame.p();
  if (n > 12) throw Error(ErrorKind::SizeGuard, "exact_step_reference: n above 12");
  if (f.n() != n || f.p() != p || part.w.rows() != p || part.n.rows() != n - p) {
    throw Error(ErrorKind::ShapeMismatch, "exact_step_reference: inputs do not match the frame");
  }
  const Matrix a = build_A(f);
  const Eigen::Index dim = tangent_dimension(n, p);

  // Basis element b -> direction E_b = DA[delta_b].
  auto direction = [&](Eigen::Index b) {
    Matrix d_omega = Matrix::Zero(p, p);
    Matrix d_k = Matrix::Zero(n - p, p);
    Eigen::Index idx = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < j; ++i, ++idx) {
        if (idx == b) {
          d_omega(i, j) = 1.0;
          d_omega(j, i) = -1.0;
        }
      }
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < n - p; ++i, ++idx) {
        if (idx == b) d_k(i, j) = 1.0;
      }
    }
    return std::pair{d_omega, d_k};
  };

  Matrix op(n * p, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const auto [d_omega, d_k] = direction(b);
    Matrix e = Matrix::Zero(n, n);
    e.topLeftCorner(p, p) = d_omega;
    if (n > p) {
      e.bottomLeftCorner(n - p, p) = d_k;
      e.topRightCorner(p, n - p) = -d_k.transpose();
    }
    const Matrix column = frechet_expm_exact(a, e).leftCols(p);
    op.col(b) = Eigen::Map<const Eigen::VectorXd>(column.data(), n * p);
  }

  Matrix rhs_m(n, p);
  rhs_m << part.w, part.n;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_m.data(), n * p);
  const Eigen::VectorXd coeffs = op.colPivHouseholderQr().solve(rhs);

  NewtonUpdate out{Matrix::Zero(p, p), Matrix::Zero(n - p, p)};
  for (Eigen::Index b = 0; b < dim; ++b) {
    const auto [d_omega, d_k] = direction(b);
    out.d_omega += coeffs(b) * d_omega;
    out.d_k += coeffs(b) * d_k;
  }
  return out;
}

}  // namespace stiefel::oracle

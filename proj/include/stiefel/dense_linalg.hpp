#pragma once

// Dense real matrix kernels used by the Stiefel geometry and the shooting
// solver. Matrices are Eigen::MatrixXd, stored column-major.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stiefel/errors.hpp"

namespace stiefel {

using Matrix = Eigen::MatrixXd;

namespace detail {

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NotSquare, std::string(who) + ": got " + shape_str(m));
  }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(who) + ": " + shape_str(a) + " vs " + shape_str(b));
  }
}

inline void require_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFinite, std::string(who) + ": non-finite entry");
}

}  // namespace detail

/// Thin QR factors with the nonnegative-diagonal convention on R.
struct ThinQr {
  Matrix q;  // n x p, orthonormal columns
  Matrix r;  // p x p, upper triangular, r(i,i) >= 0
  bool rank_deficient = false;
};

/// Householder thin QR of an n x p matrix (n >= p). A diagonal entry of R
/// below 1e-12 * ||M||_F sets `rank_deficient`; the factors are still returned.
inline ThinQr thin_qr(const Matrix& m) {
  const Eigen::Index n = m.rows();
  const Eigen::Index p = m.cols();
  if (n < p) {
    throw Error(ErrorKind::InvalidArgument, "thin_qr: needs rows >= cols, got " + detail::shape_str(m));
  }
  detail::require_finite(m, "thin_qr");

  Eigen::HouseholderQR<Matrix> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(n, p);
  out.r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  for (Eigen::Index i = 0; i < p; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }

  const double threshold = 1e-12 * m.norm();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(out.r(i, i) > threshold)) {
      out.rank_deficient = true;
      break;
    }
  }
  return out;
}

/// Orthonormal basis of span(Y)^perp: trailing n - p columns of the full
/// Householder Q of Y. Returns an n x 0 matrix when p == n.
inline Matrix orthonormal_complement(const Matrix& y) {
  const Eigen::Index n = y.rows();
  const Eigen::Index p = y.cols();
  if (p > n || p < 1) {
    throw Error(ErrorKind::InvalidArgument, "orthonormal_complement: bad shape " + detail::shape_str(y));
  }
  detail::require_finite(y, "orthonormal_complement");
  const double residual = (y.transpose() * y - Matrix::Identity(p, p)).norm();
  if (!(residual <= 1e-10)) {
    throw Error(ErrorKind::NotOrthonormal,
                "orthonormal_complement: ||Y^T Y - I||_F = " + std::to_string(residual));
  }
  if (p == n) return Matrix(n, 0);

  Eigen::HouseholderQR<Matrix> qr(y);
  Matrix trailing = Matrix::Zero(n, n - p);
  trailing.bottomRows(n - p).setIdentity();
  return qr.householderQ() * trailing;
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
inline Matrix expm(const Matrix& a) {
  detail::require_square(a, "expm");
  detail::require_finite(a, "expm");
  if (a.rows() == 0) return a;
  Matrix out = a.exp();
  detail::require_finite(out, "expm (overflow)");
  return out;
}

/// First two terms of the Fréchet derivative series of expm at A in direction E:
/// E + (A E + E A) / 2.
inline Matrix frechet_expm_truncated(const Matrix& a, const Matrix& e) {
  detail::require_square(a, "frechet_expm_truncated");
  detail::require_same_shape(a, e, "frechet_expm_truncated");
  return e + 0.5 * (a * e + e * a);
}

/// Exact Fréchet derivative of expm, read off the top-right block of
/// expm([[A, E], [0, A]]).
inline Matrix frechet_expm_exact(const Matrix& a, const Matrix& e) {
  detail::require_square(a, "frechet_expm_exact");
  detail::require_same_shape(a, e, "frechet_expm_exact");
  const Eigen::Index n = a.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = e;
  block.bottomRightCorner(n, n) = a;
  return expm(block).topRightCorner(n, n);
}

inline Matrix skew_part(const Matrix& m) {
  detail::require_square(m, "skew_part");
  return 0.5 * (m - m.transpose());
}

inline Matrix sym_part(const Matrix& m) {
  detail::require_square(m, "sym_part");
  return 0.5 * (m + m.transpose());
}

namespace detail {

// Diagonal block boundaries of a quasi-upper-triangular matrix: each block is
// 1x1 or a 2x2 standard block with nonzero subdiagonal.
inline std::vector<Eigen::Index> quasi_triangular_blocks(const Matrix& t) {
  std::vector<Eigen::Index> starts;
  const Eigen::Index n = t.rows();
  Eigen::Index i = 0;
  while (i < n) {
    starts.push_back(i);
    i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
  }
  starts.push_back(n);
  return starts;
}

// Solves T Z + Z R = G for tiny (<= 2x2) T and R through the 4x4-at-most
// vectorized system.
inline Matrix solve_small_sylvester(const Matrix& t, const Matrix& r, const Matrix& g,
                                    double singular_threshold) {
  const Eigen::Index m = t.rows();
  const Eigen::Index k = r.rows();
  if (m == 1 && k == 1) {
    const double denom = t(0, 0) + r(0, 0);
    if (std::abs(denom) <= singular_threshold) {
      throw Error(ErrorKind::SingularPencil, "solve_sylvester: eigenvalues of P and -S overlap");
    }
    return Matrix::Constant(1, 1, g(0, 0) / denom);
  }
  Matrix op = Matrix::Zero(m * k, m * k);
  for (Eigen::Index j = 0; j < k; ++j) {
    op.block(j * m, j * m, m, m) += t;
    for (Eigen::Index l = 0; l < k; ++l) {
      op.block(l * m, j * m, m, m).diagonal().array() += r(j, l);
    }
  }
  Eigen::JacobiSVD<Matrix> svd(op);
  if (svd.singularValues()(m * k - 1) <= singular_threshold) {
    throw Error(ErrorKind::SingularPencil, "solve_sylvester: eigenvalues of P and -S overlap");
  }
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(g.data(), m * k);
  Eigen::VectorXd z = op.fullPivLu().solve(rhs);
  return Eigen::Map<Matrix>(z.data(), m, k);
}

inline Eigen::RealSchur<Matrix> real_schur(const Matrix& a) {
  Eigen::RealSchur<Matrix> schur(a.rows());
  schur.setMaxIterations(30 * std::max<Eigen::Index>(a.rows(), 1));
  schur.compute(a, true);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularPencil, "solve_sylvester: real Schur iteration did not converge");
  }
  return schur;
}

}  // namespace detail

/// Solves P X + X S = C by Bartels-Stewart: real Schur forms of P and S, then
/// block back-substitution on the quasi-triangular system. O(p^3).
inline Matrix solve_sylvester(const Matrix& p, const Matrix& s, const Matrix& c) {
  detail::require_square(p, "solve_sylvester(P)");
  detail::require_square(s, "solve_sylvester(S)");
  if (c.rows() != p.rows() || c.cols() != s.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "solve_sylvester: C is " + detail::shape_str(c));
  }
  detail::require_finite(p, "solve_sylvester(P)");
  detail::require_finite(s, "solve_sylvester(S)");
  detail::require_finite(c, "solve_sylvester(C)");
  if (c.size() == 0) return c;

  const auto schur_p = detail::real_schur(p);
  const auto schur_s = detail::real_schur(s);
  const Matrix& t = schur_p.matrixT();
  const Matrix& u = schur_p.matrixU();
  const Matrix& r = schur_s.matrixT();
  const Matrix& v = schur_s.matrixU();

  const double scale = std::max(p.norm() + s.norm(), std::numeric_limits<double>::min());
  const double singular_threshold = 1e-12 * scale;

  const Matrix f = u.transpose() * c * v;
  Matrix y = Matrix::Zero(f.rows(), f.cols());

  const auto row_blocks = detail::quasi_triangular_blocks(t);
  const auto col_blocks = detail::quasi_triangular_blocks(r);

  for (std::size_t jb = 0; jb + 1 < col_blocks.size(); ++jb) {
    const Eigen::Index j0 = col_blocks[jb];
    const Eigen::Index jk = col_blocks[jb + 1] - j0;
    Matrix g = f.middleCols(j0, jk);
    if (j0 > 0) g.noalias() -= y.leftCols(j0) * r.block(0, j0, j0, jk);
    const Matrix r_jj = r.block(j0, j0, jk, jk);

    for (std::size_t ib = row_blocks.size() - 1; ib-- > 0;) {
      const Eigen::Index i0 = row_blocks[ib];
      const Eigen::Index ik = row_blocks[ib + 1] - i0;
      const Eigen::Index tail = t.rows() - (i0 + ik);
      Matrix rhs = g.middleRows(i0, ik);
      if (tail > 0) {
        rhs.noalias() -= t.block(i0, i0 + ik, ik, tail) * y.block(i0 + ik, j0, tail, jk);
      }
      y.block(i0, j0, ik, jk) =
          detail::solve_small_sylvester(t.block(i0, i0, ik, ik), r_jj, rhs, singular_threshold);
    }
  }
  return u * y * v.transpose();
}

}  // namespace stiefel

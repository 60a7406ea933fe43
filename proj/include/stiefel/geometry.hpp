#pragma once

// Points, frames and tangent vectors on the compact Stiefel manifold
// St(n,p) = { Y in R^{n x p} : Y^T Y = I_p } with the canonical metric.

#include <cmath>
#include <string>
#include <utility>

#include "stiefel/dense_linalg.hpp"

namespace stiefel {

/// A point Y on St(n,p). Orthonormality is checked on construction.
class StiefelPoint {
 public:
  static constexpr double kOrthonormalTol = 1e-10;

  explicit StiefelPoint(Matrix y) : y_(std::move(y)) {
    if (y_.cols() < 1 || y_.cols() > y_.rows()) {
      throw Error(ErrorKind::InvalidArgument, "StiefelPoint: need 1 <= p <= n, got " + detail::shape_str(y_));
    }
    detail::require_finite(y_, "StiefelPoint");
    const double residual = orthonormality_residual(y_);
    if (!(residual <= kOrthonormalTol)) {
      throw Error(ErrorKind::NotOrthonormal, "StiefelPoint: ||Y^T Y - I||_F = " + std::to_string(residual));
    }
  }

  Eigen::Index n() const noexcept { return y_.rows(); }
  Eigen::Index p() const noexcept { return y_.cols(); }
  const Matrix& matrix() const noexcept { return y_; }

  static double orthonormality_residual(const Matrix& y) {
    return (y.transpose() * y - Matrix::Identity(y.cols(), y.cols())).norm();
  }

 private:
  Matrix y_;
};

/// Y0 together with an orthonormal complement and Q = [Y0 Y0perp], Q^T Q = I_n.
class StiefelFrame {
 public:
  StiefelFrame(StiefelPoint base, Matrix complement)
      : base_(std::move(base)), complement_(std::move(complement)) {
    const Eigen::Index n = base_.n();
    if (complement_.rows() != n || complement_.cols() != n - base_.p()) {
      throw Error(ErrorKind::ShapeMismatch, "StiefelFrame: complement is " + detail::shape_str(complement_));
    }
    q_.resize(n, n);
    q_ << base_.matrix(), complement_;
    const double residual = (q_.transpose() * q_ - Matrix::Identity(n, n)).norm();
    if (!(residual <= 1e-12 * static_cast<double>(n))) {
      throw Error(ErrorKind::NotOrthonormal, "StiefelFrame: ||Q^T Q - I||_F = " + std::to_string(residual));
    }
  }

  const StiefelPoint& base() const noexcept { return base_; }
  const Matrix& complement() const noexcept { return complement_; }
  const Matrix& q() const noexcept { return q_; }
  Eigen::Index n() const noexcept { return base_.n(); }
  Eigen::Index p() const noexcept { return base_.p(); }

 private:
  StiefelPoint base_;
  Matrix complement_;
  Matrix q_;
};

/// Factor pair (Omega, K) of xi = Y0 Omega + Y0perp K. Omega is stored as
/// skew_part of whatever is passed in, so it is exactly antisymmetric.
class TangentFactors {
 public:
  TangentFactors(const Matrix& omega, Matrix k) : omega_(skew_part(omega)), k_(std::move(k)) {
    if (k_.cols() != omega_.cols()) {
      throw Error(ErrorKind::ShapeMismatch,
                  "TangentFactors: Omega " + detail::shape_str(omega_) + ", K " + detail::shape_str(k_));
    }
  }

  static TangentFactors zero(Eigen::Index n, Eigen::Index p) {
    return TangentFactors(Matrix::Zero(p, p), Matrix::Zero(n - p, p));
  }

  const Matrix& omega() const noexcept { return omega_; }
  const Matrix& k() const noexcept { return k_; }
  Eigen::Index p() const noexcept { return omega_.rows(); }
  Eigen::Index n() const noexcept { return omega_.rows() + k_.rows(); }

  TangentFactors scaled(double s) const { return TangentFactors(s * omega_, s * k_); }

 private:
  Matrix omega_;
  Matrix k_;
};

/// Ambient representation of a tangent vector xi at a point.
class AmbientTangent {
 public:
  static constexpr double kTangencyTol = 1e-10;

  AmbientTangent(StiefelPoint at, Matrix xi) : at_(std::move(at)), xi_(std::move(xi)) {
    detail::require_same_shape(at_.matrix(), xi_, "AmbientTangent");
    detail::require_finite(xi_, "AmbientTangent");
    const double violation = sym_part(at_.matrix().transpose() * xi_).norm();
    if (!(violation <= kTangencyTol * std::max(1.0, xi_.norm()))) {
      throw Error(ErrorKind::NotTangent, "AmbientTangent: ||sym(Y^T xi)||_F = " + std::to_string(violation));
    }
  }

  const StiefelPoint& at() const noexcept { return at_; }
  const Matrix& matrix() const noexcept { return xi_; }

 private:
  StiefelPoint at_;
  Matrix xi_;
};

inline StiefelFrame make_frame(const StiefelPoint& y0) {
  return StiefelFrame(y0, orthonormal_complement(y0.matrix()));
}

/// P_Y V = Y skew(Y^T V) + (I - Y Y^T) V.
inline AmbientTangent project_tangent(const StiefelPoint& y, const Matrix& v) {
  detail::require_same_shape(y.matrix(), v, "project_tangent");
  const Matrix& ym = y.matrix();
  const Matrix ytv = ym.transpose() * v;
  // Y skew(Y^T V) + V - Y Y^T V = V - Y sym(Y^T V)
  Matrix xi = v - ym * sym_part(ytv);
  return AmbientTangent(y, std::move(xi));
}

namespace detail {

inline void require_same_base(const StiefelPoint& a, const StiefelPoint& b, const char* who) {
  if (a.n() != b.n() || a.p() != b.p() || a.matrix() != b.matrix()) {
    throw Error(ErrorKind::BasePointMismatch, who);
  }
}

}  // namespace detail

/// Omega = skew(Y0^T xi), K = Y0perp^T xi.
inline TangentFactors factors_from_ambient(const StiefelFrame& frame, const AmbientTangent& xi) {
  detail::require_same_base(frame.base(), xi.at(), "factors_from_ambient: tangent lives at another point");
  const Matrix y0t_xi = frame.base().matrix().transpose() * xi.matrix();
  const double violation = sym_part(y0t_xi).norm();
  if (violation > 1e-8 * xi.matrix().norm()) {
    throw Error(ErrorKind::NotTangent, "factors_from_ambient: ||sym(Y0^T xi)||_F = " + std::to_string(violation));
  }
  return TangentFactors(y0t_xi, frame.complement().transpose() * xi.matrix());
}

/// xi = Y0 Omega + Y0perp K.
inline AmbientTangent ambient_from_factors(const StiefelFrame& frame, const TangentFactors& f) {
  if (f.p() != frame.p() || f.n() != frame.n()) {
    throw Error(ErrorKind::ShapeMismatch, "ambient_from_factors: factors do not match the frame");
  }
  Matrix xi = frame.base().matrix() * f.omega();
  if (f.k().rows() > 0) xi.noalias() += frame.complement() * f.k();
  return AmbientTangent(frame.base(), std::move(xi));
}

namespace detail {

// trace(a^T (I - Y Y^T / 2) b), defined for arbitrary ambient a, b.
inline double canonical_form(const Matrix& y, const Matrix& a, const Matrix& b) {
  const Matrix yta = y.transpose() * a;
  const Matrix ytb = y.transpose() * b;
  return (a.array() * b.array()).sum() - 0.5 * (yta.array() * ytb.array()).sum();
}

}  // namespace detail

/// g_c(xi, zeta) = trace(xi^T (I - Y Y^T / 2) zeta).
inline double canonical_inner(const StiefelPoint& y, const AmbientTangent& xi, const AmbientTangent& zeta) {
  detail::require_same_base(y, xi.at(), "canonical_inner: xi lives at another point");
  detail::require_same_base(y, zeta.at(), "canonical_inner: zeta lives at another point");
  return detail::canonical_form(y.matrix(), xi.matrix(), zeta.matrix());
}

inline double canonical_norm(const StiefelPoint& y, const AmbientTangent& xi) {
  return std::sqrt(std::max(0.0, canonical_inner(y, xi, xi)));
}

/// Canonical norm straight from the factors: sqrt(||Omega||_F^2 / 2 + ||K||_F^2).
inline double canonical_norm(const TangentFactors& f) {
  return std::sqrt(0.5 * f.omega().squaredNorm() + f.k().squaredNorm());
}

inline double embedded_norm(const AmbientTangent& xi) { return xi.matrix().norm(); }

/// A = [[Omega, -K^T], [K, 0]].
inline Matrix build_A(const TangentFactors& f) {
  const Eigen::Index p = f.p();
  const Eigen::Index m = f.n();
  Matrix a = Matrix::Zero(m, m);
  a.topLeftCorner(p, p) = f.omega();
  if (m > p) {
    a.bottomLeftCorner(m - p, p) = f.k();
    a.topRightCorner(p, m - p) = -f.k().transpose();
  }
  return a;
}

/// Position Z1(t) and velocity Z2(t) of a geodesic. Kept as raw matrices:
/// far outside the well-conditioned range the position can drift off the manifold.
struct GeodesicSample {
  Matrix position;
  Matrix velocity;
};

/// Z1(t) = Q expm(A t) I_{n,p},  Z2(t) = Q expm(A t) [Omega; K].
/// One exponential serves both; I_{n,p} is a column slice.
inline GeodesicSample geodesic(const StiefelFrame& frame, const TangentFactors& f, double t) {
  if (f.p() != frame.p() || f.n() != frame.n()) {
    throw Error(ErrorKind::ShapeMismatch, "geodesic: factors do not match the frame");
  }
  const Eigen::Index p = frame.p();
  const Matrix e = expm(t * build_A(f));
  Matrix stacked(frame.n(), p);
  stacked << f.omega(), f.k();
  GeodesicSample out;
  out.position = frame.q() * e.leftCols(p);
  out.velocity = frame.q() * (e * stacked);
  return out;
}

/// Riemannian exponential Exp_Y(xi) from the ambient tangent. Uses the compact
/// 2p x 2p form [Y Qk] expm([[Y^T xi, -Rk^T], [Rk, 0]]) [I; 0], where
/// Qk Rk = (I - Y Y^T) xi, whenever 2p < n; otherwise the full frame.
inline Matrix exp_map(const AmbientTangent& xi) {
  const StiefelPoint& y = xi.at();
  const Eigen::Index n = y.n();
  const Eigen::Index p = y.p();
  if (xi.matrix().norm() == 0.0) return y.matrix();
  if (2 * p >= n) {
    const StiefelFrame frame = make_frame(y);
    return geodesic(frame, factors_from_ambient(frame, xi), 1.0).position;
  }
  const Matrix& ym = y.matrix();
  const Matrix omega = skew_part(ym.transpose() * xi.matrix());
  const Matrix normal = xi.matrix() - ym * (ym.transpose() * xi.matrix());
  const ThinQr qr = thin_qr(normal);
  // Columns of qr.q paired with zero rows of R are multiplied by zero below,
  // so rank deficiency is harmless here.
  Matrix a = Matrix::Zero(2 * p, 2 * p);
  a.topLeftCorner(p, p) = omega;
  a.bottomLeftCorner(p, p) = qr.r;
  a.topRightCorner(p, p) = -qr.r.transpose();
  const Matrix e = expm(a);
  return ym * e.topLeftCorner(p, p) + qr.q * e.bottomLeftCorner(p, p);
}

/// Frobenius norm of Y'' + Y' Y'^T Y + Y ((Y^T Y')^2 + Y'^T Y') at time t,
/// with Y'' from a central second difference of step h and Y' = Z2(t).
inline double geodesic_ode_residual(const StiefelFrame& frame, const TangentFactors& f, double t, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "geodesic_ode_residual: h must be positive");
  const GeodesicSample mid = geodesic(frame, f, t);
  const Matrix ahead = geodesic(frame, f, t + h).position;
  const Matrix behind = geodesic(frame, f, t - h).position;
  const Matrix accel = (ahead - 2.0 * mid.position + behind) / (h * h);
  const Matrix& y = mid.position;
  const Matrix& yd = mid.velocity;
  const Matrix yty = y.transpose() * yd;
  const Matrix lhs = accel + yd * (yd.transpose() * y) + y * (yty * yty + yd.transpose() * yd);
  return lhs.norm();
}

}  // namespace stiefel

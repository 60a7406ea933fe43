#pragma once

// Single shooting with an approximate Fréchet derivative (SSAF) for the
// Riemannian logarithm on St(n,p) under the canonical metric.
//
// Newton iteration on F(xi) = Z1(1, xi) - Y1. Each step linearizes the
// exponential with its first two Fréchet terms, which reduces to a p x p
// Sylvester equation for dOmega followed by dK = N - K dOmega / 2. A solve
// counts as converged once the update norm is at most tol and the endpoint
// mismatch ||F||_F at the final iterate is at most 100 tol.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stiefel/geometry.hpp"

namespace stiefel {

enum class NormChoice { Frobenius, Canonical };

struct SolverOptions {
  double tol = 1e-8;  // bound on the update norm
  int max_iter = 100;
  bool use_small_formulation = true;
  NormChoice norm_choice = NormChoice::Frobenius;

  void validate() const {
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "SolverOptions: tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "SolverOptions: max_iter must be >= 1");
  }
};

class GeodesicProblem {
 public:
  GeodesicProblem(StiefelPoint y0, StiefelPoint y1, SolverOptions options = {})
      : y0_(std::move(y0)), y1_(std::move(y1)), options_(options) {
    if (y0_.n() != y1_.n() || y0_.p() != y1_.p()) {
      throw Error(ErrorKind::ShapeMismatch, "GeodesicProblem: endpoints on different manifolds");
    }
    options_.validate();
  }

  const StiefelPoint& y0() const noexcept { return y0_; }
  const StiefelPoint& y1() const noexcept { return y1_; }
  const SolverOptions& options() const noexcept { return options_; }
  SolverOptions& options() noexcept { return options_; }

 private:
  StiefelPoint y0_;
  StiefelPoint y1_;
  SolverOptions options_;
};

/// Rows [0, p) and [p, n) of Q^T (Y1 - Z1).
struct MismatchPartition {
  Matrix w;
  Matrix n;
};

// Stagnated: the update fell below tol while the endpoint mismatch stayed
// above 100 tol, i.e. the iteration settled on a point that is not a solution.
enum class StopCause { None, MaxIterations, SingularPencil, NonFinite, Stagnated };

inline std::string_view to_string(StopCause cause) {
  switch (cause) {
    case StopCause::None: return "none";
    case StopCause::MaxIterations: return "max_iterations";
    case StopCause::SingularPencil: return "singular_pencil";
    case StopCause::NonFinite: return "non_finite";
    case StopCause::Stagnated: return "stagnated";
  }
  return "unknown";
}

struct SsafReport {
  explicit SsafReport(AmbientTangent xi) : xi_star(std::move(xi)) {}

  AmbientTangent xi_star;
  double distance = 0.0;
  int iterations = 0;
  std::vector<double> update_norm_history;
  std::vector<double> residual_norm_history;  // ||F||_F before each step
  double final_residual_norm = 0.0;           // ||F||_F at xi_star
  bool converged = false;
  StopCause cause = StopCause::None;
  double wall_time = 0.0;  // seconds
  bool used_small_formulation = false;
};

namespace detail {

inline double norm_of(const StiefelPoint& y, const Matrix& v, NormChoice choice) {
  if (choice == NormChoice::Frobenius) return v.norm();
  return std::sqrt(std::max(0.0, canonical_form(y.matrix(), v, v)));
}

}  // namespace detail

/// Starting tangent: project Y1 - Y0 onto the tangent space at Y0 and rescale
/// it back to the length of Y1 - Y0. Degenerate projections give zero.
inline AmbientTangent initial_guess(const StiefelPoint& y0, const StiefelPoint& y1,
                                    NormChoice norm_choice = NormChoice::Frobenius) {
  detail::require_same_shape(y0.matrix(), y1.matrix(), "initial_guess");
  const Matrix& a = y0.matrix();
  const Matrix& b = y1.matrix();
  const Matrix chord = b - a;
  Matrix projected = b - a * sym_part(a.transpose() * b);

  const double chord_norm = detail::norm_of(y0, chord, norm_choice);
  const double projected_norm = detail::norm_of(y0, projected, norm_choice);
  if (chord_norm == 0.0 || projected_norm < 1e-14 * chord_norm) {
    return AmbientTangent(y0, Matrix::Zero(a.rows(), a.cols()));
  }
  projected *= chord_norm / projected_norm;
  return AmbientTangent(y0, std::move(projected));
}

/// Y1 and its frame coordinates Q^T Y1, which do not change across iterations.
struct ShootingTarget {
  Matrix y1;
  Matrix qt_y1;
};

inline ShootingTarget make_target(const StiefelFrame& frame, const StiefelPoint& y1) {
  detail::require_same_shape(frame.base().matrix(), y1.matrix(), "make_target");
  return {y1.matrix(), frame.q().transpose() * y1.matrix()};
}

struct ShootingResidual {
  Matrix f;   // Z1(1, xi) - Y1
  Matrix z1;  // Z1(1, xi)
  MismatchPartition part;
};

/// Mismatch at t = 1, using Q^T Z1 = expm(A) I_{n,p}.
inline ShootingResidual residual(const StiefelFrame& frame, const TangentFactors& f, const ShootingTarget& target) {
  if (f.p() != frame.p() || f.n() != frame.n()) {
    throw Error(ErrorKind::ShapeMismatch, "residual: factors do not match the frame");
  }
  const Eigen::Index n = frame.n();
  const Eigen::Index p = frame.p();
  const Matrix qt_z1 = expm(build_A(f)).leftCols(p);
  const Matrix gap = target.qt_y1 - qt_z1;

  ShootingResidual out;
  out.part.w = gap.topRows(p);
  out.part.n = gap.bottomRows(n - p);
  out.z1 = frame.q() * qt_z1;
  out.f = out.z1 - target.y1;
  return out;
}

inline ShootingResidual residual(const StiefelFrame& frame, const TangentFactors& f, const StiefelPoint& y1) {
  return residual(frame, f, make_target(frame, y1));
}

struct NewtonUpdate {
  Matrix d_omega;
  Matrix d_k;
};

/// Solves
///   (I + Omega/2 + K^T K/4) dOmega + dOmega (Omega/2 - K^T K/4) = W + (K^T N + N^T K)/2
/// then dK = N - K dOmega / 2. dOmega is re-skewed before returning.
/// Throws SingularPencil when the Sylvester operator is singular.
inline NewtonUpdate newton_step(const TangentFactors& f, const MismatchPartition& part) {
  const Eigen::Index p = f.p();
  if (part.w.rows() != p || part.w.cols() != p || part.n.rows() != f.k().rows() || part.n.cols() != p) {
    throw Error(ErrorKind::ShapeMismatch, "newton_step: partition does not match the factors");
  }
  const Matrix& omega = f.omega();
  const Matrix& k = f.k();
  const Matrix ktk = k.transpose() * k;
  const Matrix ktn = k.transpose() * part.n;

  const Matrix left = Matrix::Identity(p, p) + 0.5 * omega + 0.25 * ktk;
  const Matrix right = 0.5 * omega - 0.25 * ktk;
  const Matrix rhs = part.w + 0.5 * (ktn + ktn.transpose());

  NewtonUpdate out;
  out.d_omega = skew_part(solve_sylvester(left, right, rhs));
  out.d_k = part.n - 0.5 * k * out.d_omega;
  return out;
}

/// Endpoint problem on St(2p, p) equivalent to the one on St(n, p), plus the
/// basis [Y0 Qr] that maps reduced tangents back.
struct ReducedProblem {
  StiefelPoint x0;  // [I_p; 0]
  StiefelPoint x1;  // [M; R]
  Matrix lift_basis;  // n x 2p, orthonormal columns [Y0 Qr]
  StiefelPoint y0;
};

/// M = Y0^T Y1, Qr R = thin_qr(Y1 - Y0 M). Requires p < n/2. Qr is read off
/// the QR factorization of [Y0, Y1 - Y0 M], which spans the same space as
/// thin_qr(Y1 - Y0 M) but stays orthogonal to Y0 when Y1 - Y0 M is tiny or
/// rank deficient; R = Qr^T (Y1 - Y0 M).
inline ReducedProblem reduce_to_small(const StiefelPoint& y0, const StiefelPoint& y1) {
  detail::require_same_shape(y0.matrix(), y1.matrix(), "reduce_to_small");
  const Eigen::Index n = y0.n();
  const Eigen::Index p = y0.p();
  if (2 * p >= n) {
    throw Error(ErrorKind::ReductionUnavailable, "reduce_to_small: needs p < n/2");
  }
  const Matrix& a = y0.matrix();
  const Matrix m = a.transpose() * y1.matrix();
  const Matrix normal = y1.matrix() - a * m;

  Matrix augmented(n, 2 * p);
  augmented << a, normal;
  const Matrix qr_q = thin_qr(augmented).q.rightCols(p);
  const Matrix r = qr_q.transpose() * normal;

  Matrix x0 = Matrix::Zero(2 * p, p);
  x0.topRows(p).setIdentity();
  Matrix x1(2 * p, p);
  x1 << m, r;
  Matrix basis(n, 2 * p);
  basis << a, qr_q;
  return {StiefelPoint(std::move(x0)), StiefelPoint(std::move(x1)), std::move(basis), y0};
}

/// xi = [Y0 Qr] xi_hat, i.e. Y0 Omega_hat + Qr K_hat.
inline AmbientTangent lift_tangent(const ReducedProblem& reduced, const AmbientTangent& xi_hat) {
  detail::require_same_base(reduced.x0, xi_hat.at(), "lift_tangent: tangent is not at the reduced base point");
  return AmbientTangent(reduced.y0, reduced.lift_basis * xi_hat.matrix());
}

namespace detail {

struct ShootingRun {
  Matrix xi;
  int iterations = 0;
  std::vector<double> update_norms;
  std::vector<double> residual_norms;
  double final_residual = 0.0;
  bool converged = false;
  StopCause cause = StopCause::None;
};

inline double update_norm(const NewtonUpdate& step, NormChoice choice) {
  const double omega_sq = step.d_omega.squaredNorm();
  const double k_sq = step.d_k.squaredNorm();
  return choice == NormChoice::Frobenius ? std::sqrt(omega_sq + k_sq) : std::sqrt(0.5 * omega_sq + k_sq);
}

inline ShootingRun shoot(const StiefelPoint& y0, const StiefelPoint& y1, const SolverOptions& options) {
  const StiefelFrame frame = make_frame(y0);
  const ShootingTarget target = make_target(frame, y1);
  const Eigen::Index p = frame.p();

  AmbientTangent xi = initial_guess(y0, y1, options.norm_choice);
  TangentFactors factors = factors_from_ambient(frame, xi);

  ShootingRun run;
  run.cause = StopCause::MaxIterations;
  bool step_small = false;
  try {
    for (;;) {
      const ShootingResidual res = residual(frame, factors, target);
      const double mismatch = res.f.norm();
      run.final_residual = mismatch;
      if (step_small) {
        run.converged = mismatch <= 100.0 * options.tol;
        run.cause = run.converged ? StopCause::None : StopCause::Stagnated;
        break;
      }
      if (run.iterations >= options.max_iter) break;
      run.residual_norms.push_back(mismatch);

      const NewtonUpdate step = newton_step(factors, res.part);
      Matrix stacked(frame.n(), p);
      stacked << step.d_omega, step.d_k;
      xi = project_tangent(y0, xi.matrix() + frame.q() * stacked);
      factors = factors_from_ambient(frame, xi);

      const double norm = update_norm(step, options.norm_choice);
      run.update_norms.push_back(norm);
      ++run.iterations;
      if (!std::isfinite(norm)) {
        run.cause = StopCause::NonFinite;
        break;
      }
      step_small = norm <= options.tol;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularPencil) {
      run.cause = StopCause::SingularPencil;
    } else if (e.kind() == ErrorKind::NonFinite || e.kind() == ErrorKind::NotTangent) {
      run.cause = StopCause::NonFinite;
    } else {
      throw;
    }
  }
  run.xi = xi.matrix();
  return run;
}

}  // namespace detail

/// Riemannian logarithm of Y1 at Y0 by SSAF. Nonconvergence is reported
/// through `converged` and `cause`, not thrown.
inline SsafReport solve_log(const GeodesicProblem& problem) {
  const auto start = std::chrono::steady_clock::now();
  const StiefelPoint& y0 = problem.y0();
  const StiefelPoint& y1 = problem.y1();
  const SolverOptions& options = problem.options();

  const auto finish = [&](SsafReport report) {
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  };

  if (y0.matrix() == y1.matrix()) {
    SsafReport report(AmbientTangent(y0, Matrix::Zero(y0.n(), y0.p())));
    report.converged = true;
    return finish(std::move(report));
  }

  const bool small = options.use_small_formulation && 2 * y0.p() < y0.n();
  detail::ShootingRun run;
  std::optional<AmbientTangent> xi_star;
  if (small) {
    const ReducedProblem reduced = reduce_to_small(y0, y1);
    run = detail::shoot(reduced.x0, reduced.x1, options);
    xi_star.emplace(lift_tangent(reduced, AmbientTangent(reduced.x0, run.xi)));
  } else {
    run = detail::shoot(y0, y1, options);
    xi_star.emplace(y0, run.xi);
  }

  SsafReport report(std::move(*xi_star));
  report.distance = canonical_norm(y0, report.xi_star);
  report.iterations = run.iterations;
  report.update_norm_history = std::move(run.update_norms);
  report.residual_norm_history = std::move(run.residual_norms);
  report.final_residual_norm = run.final_residual;
  report.converged = run.converged;
  report.cause = run.cause;
  report.used_small_formulation = small;
  return finish(std::move(report));
}

/// Geodesic distance d(Y0, Y1) = ||Log_{Y0}(Y1)||_c. Throws Nonconvergence.
inline double distance(const StiefelPoint& y0, const StiefelPoint& y1, const SolverOptions& options = {}) {
  const SsafReport report = solve_log(GeodesicProblem(y0, y1, options));
  if (!report.converged) {
    throw Error(ErrorKind::Nonconvergence,
                "distance: SSAF stopped after " + std::to_string(report.iterations) +
                    " iterations (" + std::string(to_string(report.cause)) + ")");
  }
  return report.distance;
}

}  // namespace stiefel

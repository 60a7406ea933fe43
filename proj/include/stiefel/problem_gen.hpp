#pragma once

// Seeded generation of Stiefel points, tangent vectors of prescribed
// canonical norm, and endpoint pairs at a prescribed geodesic distance.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "stiefel/ssaf.hpp"

namespace stiefel {

/// Counter-based generator built on the SplitMix64 finalizer.
///
///   mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///            return z ^ (z >> 31)
///   key    = mix(seed ^ mix(stream + 0x9E3779B97F4A7C15))
///   draw_i = mix(key + i * 0x9E3779B97F4A7C15),  i = 1, 2, ...
///
/// Uniforms take the top 53 bits. Normals use Box-Muller in pairs
/// (cos branch first, then sin). Everything is a function of (seed, stream).
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + kGamma))) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Standard normal entries, filled column by column.
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    }
    return m;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct GeneratorSpec {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double prescribed_distance = 0.5 * std::numbers::pi;
  std::uint64_t seed = 0;
  int trials = 1;

  void validate() const {
    if (p < 1 || p > n) throw Error(ErrorKind::InvalidArgument, "GeneratorSpec: need 1 <= p <= n");
    if (!(prescribed_distance >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "GeneratorSpec: prescribed distance must be >= 0");
    }
  }
};

/// Q factor of an n x p Gaussian matrix; redraws on rank deficiency.
inline StiefelPoint random_stiefel(Eigen::Index n, Eigen::Index p, CounterRng& rng) {
  if (p < 1 || p > n) throw Error(ErrorKind::InvalidArgument, "random_stiefel: need 1 <= p <= n");
  for (;;) {
    ThinQr qr = thin_qr(rng.normal_matrix(n, p));
    if (!qr.rank_deficient) return StiefelPoint(std::move(qr.q));
  }
}

/// Omega = skew(G1), K = G2 with Gaussian G1, G2, jointly scaled so that
/// ||Omega||_F^2 / 2 + ||K||_F^2 = d^2.
inline TangentFactors random_tangent_with_norm(const StiefelFrame& frame, double d, CounterRng& rng) {
  if (!(d >= 0.0)) throw Error(ErrorKind::InvalidArgument, "random_tangent_with_norm: d must be >= 0");
  const Eigen::Index n = frame.n();
  const Eigen::Index p = frame.p();
  const Matrix g1 = rng.normal_matrix(p, p);
  const Matrix g2 = rng.normal_matrix(n - p, p);
  TangentFactors raw(g1, g2);
  const double norm = canonical_norm(raw);
  if (d == 0.0 || norm == 0.0) return TangentFactors::zero(n, p);
  return raw.scaled(d / norm);
}

/// Endpoint pair with the planted tangent that produced it.
struct PlantedPair {
  GeodesicProblem problem;
  TangentFactors planted;
  AmbientTangent planted_xi;
};

/// Y0 random, xi random with ||xi||_c = d, Y1 = Exp_{Y0}(xi). Each trial draws
/// from its own stream (seed, trial_index).
inline PlantedPair pair_with_distance(const GeneratorSpec& spec, std::uint64_t trial_index,
                                      const SolverOptions& options = {}) {
  spec.validate();
  CounterRng rng(spec.seed, trial_index);
  StiefelPoint y0 = random_stiefel(spec.n, spec.p, rng);
  const StiefelFrame frame = make_frame(y0);
  TangentFactors planted = random_tangent_with_norm(frame, spec.prescribed_distance, rng);
  AmbientTangent xi = ambient_from_factors(frame, planted);
  StiefelPoint y1(exp_map(xi));
  return {GeodesicProblem(std::move(y0), std::move(y1), options), std::move(planted), std::move(xi)};
}

}  // namespace stiefel

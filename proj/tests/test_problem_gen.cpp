#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stiefel/problem_gen.hpp"

using namespace stiefel;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(CounterRng, SameSeedAndStreamReproduce) {
  CounterRng a(17, 3);
  CounterRng b(17, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.normal_matrix(4, 3), b.normal_matrix(4, 3));
}

TEST(CounterRng, StreamsDiffer) {
  CounterRng a(17, 0);
  CounterRng b(17, 1);
  CounterRng c(18, 0);
  const std::uint64_t x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(CounterRng, FirstDrawFollowsDocumentedConstants) {
  const std::uint64_t seed = 42;
  const std::uint64_t stream = 7;
  const std::uint64_t key = CounterRng::mix(seed ^ CounterRng::mix(stream + CounterRng::kGamma));
  CounterRng rng(seed, stream);
  EXPECT_EQ(rng.next_u64(), CounterRng::mix(key + CounterRng::kGamma));
  EXPECT_EQ(rng.next_u64(), CounterRng::mix(key + 2 * CounterRng::kGamma));
  // SplitMix64 finalizer of zero is zero.
  EXPECT_EQ(CounterRng::mix(0), 0u);
}

TEST(CounterRng, MomentsAreStandard) {
  CounterRng rng(5);
  const int count = 200000;
  double sum = 0.0;
  double sq = 0.0;
  double usum = 0.0;
  for (int i = 0; i < count; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    usum += u;
  }
  EXPECT_NEAR(sum / count, 0.0, 0.01);
  EXPECT_NEAR(sq / count, 1.0, 0.02);
  EXPECT_NEAR(usum / count, 0.5, 0.005);
}

TEST(RandomStiefel, DeterministicAndOrthonormal) {
  CounterRng a(9);
  CounterRng b(9);
  const StiefelPoint x = random_stiefel(30, 4, a);
  const StiefelPoint y = random_stiefel(30, 4, b);
  EXPECT_EQ(x.matrix(), y.matrix());
  EXPECT_LE(StiefelPoint::orthonormality_residual(x.matrix()), 1e-12);
}

TEST(RandomStiefel, SquareIsOrthogonal) {
  CounterRng rng(10);
  const Matrix q = random_stiefel(6, 6, rng).matrix();
  EXPECT_LE((q.transpose() * q - Matrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_LE((q * q.transpose() - Matrix::Identity(6, 6)).norm(), 1e-12);
}

TEST(RandomStiefel, ManyDrawsAllOrthonormal) {
  CounterRng rng(11);
  Matrix mean = Matrix::Zero(2, 2);
  for (int i = 0; i < 1000; ++i) {
    const Matrix y = random_stiefel(5, 2, rng).matrix();
    mean += y.transpose() * y;
  }
  EXPECT_LE((mean / 1000.0 - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(RandomStiefel, InvalidDimensionsThrow) {
  CounterRng rng(12);
  EXPECT_THROW(random_stiefel(3, 4, rng), Error);
  EXPECT_THROW(random_stiefel(3, 0, rng), Error);
}

TEST(RandomTangent, PrescribedCanonicalNorm) {
  CounterRng rng(13);
  for (int i = 0; i < 20; ++i) {
    const StiefelFrame frame = make_frame(random_stiefel(15, 4, rng));
    const TangentFactors f = random_tangent_with_norm(frame, 0.5 * kPi, rng);
    const double sq = 0.5 * f.omega().squaredNorm() + f.k().squaredNorm();
    EXPECT_NEAR(sq, 0.25 * kPi * kPi, 1e-13);
    EXPECT_NEAR(canonical_norm(f), 0.5 * kPi, 1e-14);
  }
}

TEST(RandomTangent, ZeroNorm) {
  CounterRng rng(14);
  const StiefelFrame frame = make_frame(random_stiefel(8, 3, rng));
  const TangentFactors f = random_tangent_with_norm(frame, 0.0, rng);
  EXPECT_EQ(f.omega().norm(), 0.0);
  EXPECT_EQ(f.k().norm(), 0.0);
  EXPECT_THROW(random_tangent_with_norm(frame, -1.0, rng), Error);
}

TEST(RandomTangent, SingleColumnHasNoSkewPart) {
  CounterRng rng(15);
  const StiefelFrame frame = make_frame(random_stiefel(9, 1, rng));
  const TangentFactors f = random_tangent_with_norm(frame, 1.3, rng);
  EXPECT_EQ(f.omega()(0, 0), 0.0);
  EXPECT_NEAR(f.k().norm(), 1.3, 1e-14);
}

TEST(PairWithDistance, ZeroDistanceGivesIdenticalEndpoints) {
  const GeneratorSpec spec{10, 3, 0.0, 1, 1};
  const PlantedPair pair = pair_with_distance(spec, 0);
  EXPECT_EQ(pair.problem.y0().matrix(), pair.problem.y1().matrix());
}

TEST(PairWithDistance, ConstructionResiduals) {
  const GeneratorSpec spec{20, 3, 0.5 * kPi, 2, 1};
  for (std::uint64_t t = 0; t < 10; ++t) {
    const PlantedPair pair = pair_with_distance(spec, t);
    EXPECT_NEAR(canonical_norm(pair.planted), 0.5 * kPi, 1e-13);
    EXPECT_NEAR(canonical_norm(pair.problem.y0(), pair.planted_xi), 0.5 * kPi, 1e-12);
    EXPECT_LE(StiefelPoint::orthonormality_residual(pair.problem.y1().matrix()), 1e-11);
  }
}

TEST(PairWithDistance, EndpointLiesOnPlantedGeodesic) {
  for (auto [n, p] : {std::pair<Eigen::Index, Eigen::Index>{20, 3}, {7, 4}, {5, 5}}) {
    const GeneratorSpec spec{n, p, 1.1, 3, 1};
    const PlantedPair pair = pair_with_distance(spec, 4);
    const StiefelFrame frame = make_frame(pair.problem.y0());
    const Matrix expected = geodesic(frame, pair.planted, 1.0).position;
    EXPECT_LE((pair.problem.y1().matrix() - expected).norm(), 1e-12) << n << "x" << p;
  }
}

TEST(PairWithDistance, StreamsAreIndependentAndReproducible) {
  const GeneratorSpec spec{12, 2, 0.5 * kPi, 99, 2};
  const PlantedPair a0 = pair_with_distance(spec, 0);
  const PlantedPair a1 = pair_with_distance(spec, 1);
  const PlantedPair b0 = pair_with_distance(spec, 0);
  EXPECT_EQ(a0.problem.y0().matrix(), b0.problem.y0().matrix());
  EXPECT_EQ(a0.problem.y1().matrix(), b0.problem.y1().matrix());
  EXPECT_NE(a0.problem.y0().matrix(), a1.problem.y0().matrix());
  EXPECT_NE(a0.problem.y1().matrix(), a1.problem.y1().matrix());
}

TEST(PairWithDistance, OptionsArePassedThrough) {
  SolverOptions o;
  o.tol = 1e-4;
  o.max_iter = 7;
  const PlantedPair pair = pair_with_distance({10, 2, 0.3, 0, 1}, 0, o);
  EXPECT_EQ(pair.problem.options().tol, 1e-4);
  EXPECT_EQ(pair.problem.options().max_iter, 7);
}

TEST(PairWithDistance, SolverNeverExceedsPlantedDistance) {
  const GeneratorSpec spec{25, 3, 0.5 * kPi, 4, 1};
  SolverOptions o;
  o.tol = 1e-8;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const PlantedPair pair = pair_with_distance(spec, t, o);
    const SsafReport report = solve_log(pair.problem);
    ASSERT_TRUE(report.converged);
    EXPECT_LE(std::abs(report.distance - canonical_norm(pair.planted)), 10 * o.tol);
  }
}

TEST(GeneratorSpec, Validation) {
  EXPECT_THROW((GeneratorSpec{3, 4, 1.0, 0, 1}.validate()), Error);
  EXPECT_THROW((GeneratorSpec{3, 2, -1.0, 0, 1}.validate()), Error);
  EXPECT_NO_THROW((GeneratorSpec{3, 3, 0.0, 0, 1}.validate()));
}

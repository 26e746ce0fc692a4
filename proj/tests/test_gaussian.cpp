#include "lanekit/error.hpp"
#include "lanekit/gaussian.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace lanekit;
using std::numbers::pi;

namespace {

SegmentGaussian random_gaussian(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SegmentGaussian g;
  g.mu = Vec3(4 * u(rng) - 2, 4 * u(rng) - 2, u(rng) - 0.5);
  g.lambda_l = 0.5 + 3 * u(rng);
  g.lambda_w = 0.2 + 1.5 * u(rng);
  g.lambda_h = 0.2 + 1.5 * u(rng);
  g.theta_x = (u(rng) - 0.5) * pi / 2;
  g.theta_z = (2 * u(rng) - 1) * pi;
  return g;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const LaneError& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST(Segment, ForwardSegment) {
  const SegmentGeometry s = segment_params({0, 0, 0}, {0, 5, 0});
  EXPECT_EQ(s.mu, Vec3(0, 2.5, 0));
  EXPECT_DOUBLE_EQ(s.length, 5.0);
  EXPECT_DOUBLE_EQ(s.theta_x, 0.0);
  EXPECT_DOUBLE_EQ(s.theta_z, pi / 2);
}

TEST(Segment, DiagonalSegment) {
  const SegmentGeometry s = segment_params({1, 1, 1}, {2, 2, 1 + std::sqrt(2.0)});
  EXPECT_NEAR(s.length, 2.0, 1e-15);
  EXPECT_NEAR(s.theta_x, pi / 4, 1e-15);
  EXPECT_NEAR(s.theta_z, pi / 4, 1e-15);
}

TEST(Segment, LateralSegment) {
  const SegmentGeometry s = segment_params({0, 0, 0}, {1, 0, 0});
  EXPECT_EQ(s.theta_z, 0.0);
  EXPECT_EQ(s.theta_x, 0.0);
  EXPECT_EQ(s.length, 1.0);
}

TEST(Segment, ZeroLength) {
  EXPECT_EQ(code_of([] { segment_params({1, 2, 3}, {1, 2, 3}); }), ErrorCode::kZeroLengthSegment);
}

TEST(Rotation, Examples) {
  EXPECT_TRUE(rotation_matrix(0, 0).isIdentity(0.0));
  Mat3 yaw;
  yaw << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_TRUE(rotation_matrix(0, pi / 2).isApprox(yaw, 1e-15));
  EXPECT_LT((rotation_matrix(0, pi / 2) - yaw).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotation, OrthonormalAndMatchesProduct) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int i = 0; i < 10000; ++i) {
    const double tx = u(rng);
    const double tz = u(rng);
    const Mat3 r = rotation_matrix(tx, tz);
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_LT((r - oracle::rz(tz) * oracle::rx(tx)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Rotation, DirectionAlignedFirstColumnIsSegmentDirection) {
  const Vec3 a(0.3, -1, 2), b(1.1, 2.5, 2.9);
  const SegmentGeometry s = segment_params(a, b);
  const Mat3 r = rotation_matrix(s.theta_x, s.theta_z, RotationConvention::kDirectionAligned);
  EXPECT_LT((r.col(0) - (b - a).normalized()).norm(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

TEST(Covariance, Examples) {
  SegmentGaussian g;
  g.lambda_l = 2;
  g.lambda_w = 1;
  g.lambda_h = 0.5;
  EXPECT_LT((covariance(g) - Vec3(1, 0.25, 0.0625).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(),
            1e-15);
  g.theta_z = pi / 2;
  EXPECT_LT((covariance(g) - Vec3(0.25, 1, 0.0625).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(Covariance, EigenvaluesAreHalfScalesSquared) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 2000; ++i) {
    const SegmentGaussian g = random_gaussian(rng);
    const Mat3 s = covariance(g);
    EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Mat3> es(s);
    std::array<double, 3> want{g.lambda_l * g.lambda_l / 4, g.lambda_w * g.lambda_w / 4,
                               g.lambda_h * g.lambda_h / 4};
    std::sort(want.begin(), want.end());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(es.eigenvalues()[k], want[static_cast<std::size_t>(k)], 1e-9);
    EXPECT_LT((precision(g) * s - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((s - oracle::to_gaussian(g).sigma).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kld, IdenticalIsZero) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const SegmentGaussian g = random_gaussian(rng);
    EXPECT_NEAR(kld(g, g), 0.0, 1e-9);
    EXPECT_NEAR(symmetric_kld(g, g), 0.0, 1e-9);
  }
}

TEST(Kld, UnitShift) {
  for (const Vec3 axis : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1).normalized()}) {
    for (const double d : {0.1, 1.0, 3.7}) {
      SegmentGaussian a, b;
      a.lambda_l = a.lambda_w = a.lambda_h = 2;
      b = a;
      b.theta_x = 0.4;
      b.theta_z = -1.3;
      b.mu = d * axis;
      EXPECT_NEAR(kld(a, b), d * d / 2, 1e-12);
      EXPECT_NEAR(kld(b, a), d * d / 2, 1e-12);
      EXPECT_NEAR(symmetric_kld(a, b), d * d / 2, 1e-12);
    }
  }
}

TEST(Kld, NonNegative) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const SegmentGaussian a = random_gaussian(rng);
    const SegmentGaussian b = random_gaussian(rng);
    EXPECT_GE(kld(a, b), 0.0);
    EXPECT_NEAR(symmetric_kld(a, b), symmetric_kld(b, a), 1e-12 * (1 + symmetric_kld(a, b)));
  }
}

TEST(Kld, MatchesMonteCarlo) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    SegmentGaussian a = random_gaussian(rng);
    SegmentGaussian b = random_gaussian(rng);
    b.mu = a.mu + 0.5 * (b.mu - a.mu);
    const double closed = kld(a, b);
    const double mc = oracle::monte_carlo_kl(oracle::to_gaussian(a), oracle::to_gaussian(b), 200000,
                                             static_cast<std::uint64_t>(i));
    EXPECT_NEAR(mc, closed, 0.02 * closed) << "pair " << i;
  }
}

TEST(Kld, RigidInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a0(u(rng), 3 * u(rng), 0.2 * u(rng));
    const Vec3 a1 = a0 + Vec3(0.3 * u(rng), 1.5 + u(rng), 0.1 * u(rng));
    const Vec3 b0 = a0 + Vec3(0.3 * u(rng), 0.2 * u(rng), 0.1 * u(rng));
    const Vec3 b1 = a1 + Vec3(0.3 * u(rng), 0.2 * u(rng), 0.1 * u(rng));
    // Yaw-only rotation keeps the heading/pitch parametrisation consistent.
    const Eigen::Matrix3d rot = oracle::rz(pi * u(rng));
    const Vec3 t(10 * u(rng), 10 * u(rng), u(rng));
    const auto f = [&](const Vec3& p) -> Vec3 { return rot * p + t; };
    const GaussianPair p0 = paired_segment_gaussians(a0, a1, b0, b1, 0.3, 0.2);
    const GaussianPair p1 = paired_segment_gaussians(f(a0), f(a1), f(b0), f(b1), 0.3, 0.2);
    EXPECT_NEAR(symmetric_kld(p0.pred, p0.gt), symmetric_kld(p1.pred, p1.gt), 1e-9);
  }
}

TEST(Kld, PairedIdenticalSegmentsAreZero) {
  for (const double w : {0.01, 0.3, 5.0}) {
    const GaussianPair p = paired_segment_gaussians({0, 0, 0}, {0.2, 2, 0.1}, {0, 0, 0}, {0.2, 2, 0.1}, w, w);
    EXPECT_NEAR(symmetric_kld(p.pred, p.gt), 0.0, 1e-12);
  }
}

TEST(Kld, WiderLateralScaleLowersOffsetPenalty) {
  const auto value = [](double w) {
    const GaussianPair p =
        paired_segment_gaussians({0.2, 0, 0}, {0.2, 2, 0}, {0, 0, 0}, {0, 2, 0}, w, 0.1);
    return symmetric_kld(p.pred, p.gt);
  };
  EXPECT_LT(value(0.2), value(0.1));
  EXPECT_LT(value(0.4), value(0.2));
}

TEST(Kld, TinyScaleIsSingular) {
  EXPECT_EQ(code_of([] {
              const GaussianPair p =
                  paired_segment_gaussians({0, 0, 0}, {0, 1, 0}, {0, 0, 0}, {0, 1, 0}, 0.1, 1e-7);
              symmetric_kld(p.pred, p.gt);
            }),
            ErrorCode::kNumericallySingular);
}

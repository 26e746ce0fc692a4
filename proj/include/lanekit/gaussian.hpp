#pragma once

#include "lanekit/lane.hpp"

#include <Eigen/Core>

namespace lanekit {

using Mat3 = Eigen::Matrix3d;

/// How the segment frame is built from (theta_x, theta_z).
///
/// kPrinted: R = Rz(theta_z) * Rx(theta_x). The length axis is the horizontal
///   heading and pitch tilts the lateral/vertical axes about it.
/// kDirectionAligned: R = Rz(theta_z) * Ry(-theta_x), so the first column is
///   the full 3D segment direction.
enum class RotationConvention { kPrinted, kDirectionAligned };

/// 3D Gaussian describing one lane segment.
struct SegmentGaussian {
  Vec3 mu = Vec3::Zero();
  double lambda_l = 1.0;  ///< segment length, m
  double lambda_w = 1.0;  ///< lateral uncertainty, m
  double lambda_h = 1.0;  ///< vertical uncertainty, m
  double theta_x = 0.0;   ///< pitch, rad
  double theta_z = 0.0;   ///< yaw, rad
  RotationConvention convention = RotationConvention::kPrinted;
};

/// Geometry of the segment from `a` to `b`.
struct SegmentGeometry {
  Vec3 mu;
  double length;
  double theta_x;  ///< atan2(dz, |(dx, dy)|)
  double theta_z;  ///< atan2(dy, dx)
};

inline constexpr double kMinSegmentLength = 1e-9;
inline constexpr double kMinScale = 1e-6;

/// Throws kZeroLengthSegment if |b - a| < kMinSegmentLength.
SegmentGeometry segment_params(const Vec3& a, const Vec3& b);

Mat3 rotation_matrix(double theta_x, double theta_z,
                     RotationConvention convention = RotationConvention::kPrinted);

/// R * diag(l/2, w/2, h/2)^2 * R^T
Mat3 covariance(const SegmentGaussian& g);

/// R * diag(l/2, w/2, h/2)^-2 * R^T, built analytically.
Mat3 precision(const SegmentGaussian& g);

/// Closed-form KL(a || b). Throws kNumericallySingular when any scale of
/// either Gaussian is below kMinScale.
double kld(const SegmentGaussian& a, const SegmentGaussian& b);

/// (KL(a||b) + KL(b||a)) / 2
double symmetric_kld(const SegmentGaussian& a, const SegmentGaussian& b);

struct GaussianPair {
  SegmentGaussian pred;
  SegmentGaussian gt;
};

/// Both Gaussians take their geometry from their own endpoints and share the
/// predicted (lambda_w, lambda_h).
GaussianPair paired_segment_gaussians(const Vec3& pred_a, const Vec3& pred_b, const Vec3& gt_a,
                                      const Vec3& gt_b, double lambda_w_hat, double lambda_h_hat,
                                      RotationConvention convention = RotationConvention::kPrinted);

}  // namespace lanekit

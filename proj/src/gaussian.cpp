#include "lanekit/gaussian.hpp"

#include "lanekit/error.hpp"

#include <cmath>
#include <string>

namespace lanekit {

SegmentGeometry segment_params(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double length = d.norm();
  if (!(length >= kMinSegmentLength)) {
    throw LaneError(ErrorCode::kZeroLengthSegment, "segment endpoints coincide");
  }
  const double horizontal = std::sqrt(d.x() * d.x() + d.y() * d.y());
  return {0.5 * (a + b), length, std::atan2(d.z(), horizontal), std::atan2(d.y(), d.x())};
}

Mat3 rotation_matrix(double theta_x, double theta_z, RotationConvention convention) {
  const double cx = std::cos(theta_x);
  const double sx = std::sin(theta_x);
  const double cz = std::cos(theta_z);
  const double sz = std::sin(theta_z);
  Mat3 r;
  if (convention == RotationConvention::kPrinted) {
    r << cz, -sz * cx, sx * sz,
         sz, cz * cx, -cz * sx,
         0.0, sx, cx;
  } else {
    r << cz * cx, -sz, -cz * sx,
         sz * cx, cz, -sz * sx,
         sx, 0.0, cx;
  }
  return r;
}

namespace {

void check_scales(const SegmentGaussian& g) {
  if (!(g.lambda_l >= kMinScale && g.lambda_w >= kMinScale && g.lambda_h >= kMinScale)) {
    throw LaneError(ErrorCode::kNumericallySingular,
                    "segment scale below " + std::to_string(kMinScale) + " m");
  }
}

Eigen::Vector3d half_axes(const SegmentGaussian& g) {
  return {0.5 * g.lambda_l, 0.5 * g.lambda_w, 0.5 * g.lambda_h};
}

}  // namespace

Mat3 covariance(const SegmentGaussian& g) {
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_z, g.convention);
  const Eigen::Vector3d var = half_axes(g).array().square();
  return r * var.asDiagonal() * r.transpose();
}

Mat3 precision(const SegmentGaussian& g) {
  const Mat3 r = rotation_matrix(g.theta_x, g.theta_z, g.convention);
  const Eigen::Vector3d inv_var = half_axes(g).array().square().inverse();
  return r * inv_var.asDiagonal() * r.transpose();
}

double kld(const SegmentGaussian& a, const SegmentGaussian& b) {
  check_scales(a);
  check_scales(b);
  const Mat3 sigma_a = covariance(a);
  const Mat3 prec_b = precision(b);
  const Vec3 diff = b.mu - a.mu;

  const double trace_term = (prec_b * sigma_a).trace();
  const double mahalanobis = diff.dot(prec_b * diff);
  // ln det(Sigma_b) - ln det(Sigma_a), from the axis lengths directly.
  const double log_det_ratio = 2.0 * (std::log(b.lambda_l / a.lambda_l) +
                                      std::log(b.lambda_w / a.lambda_w) +
                                      std::log(b.lambda_h / a.lambda_h));
  const double value = 0.5 * (trace_term + mahalanobis - 3.0 + log_det_ratio);
  // Rounding can leave identical Gaussians a hair below zero.
  return value < 0.0 ? 0.0 : value;
}

double symmetric_kld(const SegmentGaussian& a, const SegmentGaussian& b) {
  // Sum in a fixed order so the result does not depend on argument order.
  const double ab = kld(a, b);
  const double ba = kld(b, a);
  return 0.5 * (ab < ba ? ab + ba : ba + ab);
}

GaussianPair paired_segment_gaussians(const Vec3& pred_a, const Vec3& pred_b, const Vec3& gt_a,
                                      const Vec3& gt_b, double lambda_w_hat, double lambda_h_hat,
                                      RotationConvention convention) {
  const auto build = [&](const Vec3& a, const Vec3& b) {
    const SegmentGeometry geo = segment_params(a, b);
    SegmentGaussian g;
    g.mu = geo.mu;
    g.lambda_l = geo.length;
    g.lambda_w = lambda_w_hat;
    g.lambda_h = lambda_h_hat;
    g.theta_x = geo.theta_x;
    g.theta_z = geo.theta_z;
    g.convention = convention;
    check_scales(g);
    return g;
  };
  return {build(pred_a, pred_b), build(gt_a, gt_b)};
}

}  // namespace lanekit

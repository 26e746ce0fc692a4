#include "lanekit/camera.hpp"

#include "lanekit/error.hpp"

#include <cmath>
#include <numbers>

namespace lanekit {

Vec3 CameraModel::right_axis() const { return {1.0, 0.0, 0.0}; }

Vec3 CameraModel::down_axis() const {
  return {0.0, -std::sin(pitch), -std::cos(pitch)};
}

Vec3 CameraModel::forward_axis() const {
  return {0.0, std::cos(pitch), -std::sin(pitch)};
}

void validate(const CameraModel& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (!(camera.height > 0.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "camera height must be positive");
  }
  if (!(camera.pitch >= 0.0 && camera.pitch < std::numbers::pi / 2.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "pitch must lie in [0, pi/2)");
  }
  if (camera.image_size.height <= 0 || camera.image_size.width <= 0) {
    throw LaneError(ErrorCode::kInvalidArgument, "image size must be positive");
  }
}

Vec3 ground_to_camera(const CameraModel& camera, const Vec3& p) {
  const Vec3 rel = p - Vec3(0.0, 0.0, camera.height);
  return {rel.dot(camera.right_axis()), rel.dot(camera.down_axis()),
          rel.dot(camera.forward_axis())};
}

Eigen::Vector2d project_ground_to_image(const CameraModel& camera, const Vec3& p) {
  const Vec3 c = ground_to_camera(camera, p);
  if (!(c.z() > kMinDepth)) {
    throw LaneError(ErrorCode::kBehindCamera,
                    "camera-frame depth " + std::to_string(c.z()) + " m");
  }
  return {camera.cx + camera.fx * c.x() / c.z(), camera.cy + camera.fy * c.y() / c.z()};
}

Vec3 unproject_to_ground(const CameraModel& camera, double u, double v) {
  const double rx = (u - camera.cx) / camera.fx;
  const double ry = (v - camera.cy) / camera.fy;
  const Vec3 ray = rx * camera.right_axis() + ry * camera.down_axis() + camera.forward_axis();
  // Rays must descend; a near-zero slope puts the intersection at infinity.
  if (!(ray.z() < -1e-12)) {
    throw LaneError(ErrorCode::kNoGroundIntersection,
                    "pixel ray does not reach the ground (v=" + std::to_string(v) + ")");
  }
  const double t = camera.height / -ray.z();
  Vec3 hit = Vec3(0.0, 0.0, camera.height) + t * ray;
  hit.z() = 0.0;
  return hit;
}

double horizon_row(const CameraModel& camera) {
  return camera.cy - camera.fy * std::tan(camera.pitch);
}

}  // namespace lanekit

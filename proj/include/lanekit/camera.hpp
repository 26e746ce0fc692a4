#pragma once

#include "lanekit/lane.hpp"

#include <Eigen/Core>

namespace lanekit {

struct ImageSize {
  int height = 720;
  int width = 960;
};

/// Pinhole camera mounted `height` meters above the ground-frame origin,
/// pitched down by `pitch` radians, with zero roll and yaw.
///
/// Camera frame: x right, y down, z forward.
struct CameraModel {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 480.0;
  double cy = 360.0;
  double height = 1.5;
  double pitch = 0.0;
  ImageSize image_size{};

  /// Ground-frame direction of the camera axes.
  Vec3 right_axis() const;
  Vec3 down_axis() const;
  Vec3 forward_axis() const;
};

/// Throws kInvalidArgument on fx, fy, height <= 0 or pitch outside [0, pi/2).
void validate(const CameraModel& camera);

inline constexpr double kMinDepth = 1e-3;

/// Ground point to camera frame.
Vec3 ground_to_camera(const CameraModel& camera, const Vec3& p);

/// Throws kBehindCamera when the camera-frame depth is <= kMinDepth.
Eigen::Vector2d project_ground_to_image(const CameraModel& camera, const Vec3& p);

/// Intersect the pixel ray with z = 0. Throws kNoGroundIntersection when the
/// ray does not point downward (horizon row and above).
Vec3 unproject_to_ground(const CameraModel& camera, double u, double v);

/// Image row of the horizon, where pixel rays run parallel to the ground.
double horizon_row(const CameraModel& camera);

}  // namespace lanekit

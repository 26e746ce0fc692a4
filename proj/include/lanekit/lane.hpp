#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace lanekit {

using Vec3 = Eigen::Vector3d;
using Polyline3 = std::vector<Vec3>;

/// A lane in the ground frame (x right, y forward, z up; meters).
///
/// Points are ordered away from the vehicle, so y is strictly increasing.
/// `visibility` holds one 0/1 flag per point.
struct Lane3D {
  Polyline3 points;
  std::vector<int> visibility;
  std::optional<double> score;

  /// All points visible, no score.
  static Lane3D from_points(Polyline3 pts);

  std::size_t size() const { return points.size(); }
  std::size_t visible_count() const;
};

/// Throws kInvalidArgument naming the violated invariant.
void validate(const Lane3D& lane);

/// Visible points in order. Invisible gaps are bridged by the caller's
/// polyline, so this is simply a filter.
Polyline3 visible_polyline(const Lane3D& lane);

/// Resample the visible polyline to `n` points evenly spaced in arc length.
/// Both endpoints are reproduced exactly. Throws kDegenerateLane if fewer than
/// two visible points (or zero total length) remain.
Polyline3 interpolate_lane(const Lane3D& lane, int n);
Polyline3 interpolate_polyline(std::span<const Vec3> polyline, int n);

double polyline_length(std::span<const Vec3> polyline);

/// Linear interpolation of x and z at fixed longitudinal anchors. Anchors
/// outside the visible y-extent come back invisible with x, z held at the
/// nearest endpoint.
Lane3D resample_to_anchors(const Lane3D& lane, std::span<const double> y_anchors);

}  // namespace lanekit

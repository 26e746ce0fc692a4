#include "lanekit/lane.hpp"

#include "lanekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanekit {

Lane3D Lane3D::from_points(Polyline3 pts) {
  Lane3D lane;
  lane.visibility.assign(pts.size(), 1);
  lane.points = std::move(pts);
  return lane;
}

std::size_t Lane3D::visible_count() const {
  return static_cast<std::size_t>(std::count_if(visibility.begin(), visibility.end(),
                                                [](int v) { return v != 0; }));
}

void validate(const Lane3D& lane) {
  if (lane.points.empty()) {
    throw LaneError(ErrorCode::kInvalidArgument, "lane has no points");
  }
  if (lane.visibility.size() != lane.points.size()) {
    throw LaneError(ErrorCode::kInvalidArgument,
                    "visibility has " + std::to_string(lane.visibility.size()) +
                        " entries for " + std::to_string(lane.points.size()) + " points");
  }
  for (std::size_t i = 0; i < lane.points.size(); ++i) {
    if (!lane.points[i].allFinite()) {
      throw LaneError(ErrorCode::kInvalidArgument, "non-finite point " + std::to_string(i));
    }
    if (i > 0 && !(lane.points[i].y() > lane.points[i - 1].y())) {
      throw LaneError(ErrorCode::kInvalidArgument,
                      "y not strictly increasing at point " + std::to_string(i));
    }
    if (lane.visibility[i] != 0 && lane.visibility[i] != 1) {
      throw LaneError(ErrorCode::kInvalidArgument,
                      "visibility flag at " + std::to_string(i) + " is not 0/1");
    }
  }
  if (lane.score && !(*lane.score >= 0.0 && *lane.score <= 1.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "score outside [0,1]");
  }
}

Polyline3 visible_polyline(const Lane3D& lane) {
  Polyline3 out;
  out.reserve(lane.points.size());
  for (std::size_t i = 0; i < lane.points.size(); ++i) {
    if (i >= lane.visibility.size() || lane.visibility[i] != 0) out.push_back(lane.points[i]);
  }
  return out;
}

double polyline_length(std::span<const Vec3> polyline) {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) total += (polyline[i] - polyline[i - 1]).norm();
  return total;
}

Polyline3 interpolate_polyline(std::span<const Vec3> polyline, int n) {
  if (n < 2) throw LaneError(ErrorCode::kInvalidArgument, "interpolation size must be >= 2");
  if (polyline.size() < 2) {
    throw LaneError(ErrorCode::kDegenerateLane, "fewer than two visible points");
  }

  std::vector<double> cumulative(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) throw LaneError(ErrorCode::kDegenerateLane, "lane has zero length");

  Polyline3 out(static_cast<std::size_t>(n));
  out.front() = polyline.front();
  out.back() = polyline.back();

  std::size_t seg = 0;
  for (int k = 1; k + 1 < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < polyline.size() && cumulative[seg + 1] < s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
    out[static_cast<std::size_t>(k)] = polyline[seg] + t * (polyline[seg + 1] - polyline[seg]);
  }
  return out;
}

Polyline3 interpolate_lane(const Lane3D& lane, int n) {
  const Polyline3 visible = visible_polyline(lane);
  return interpolate_polyline(visible, n);
}

Lane3D resample_to_anchors(const Lane3D& lane, std::span<const double> y_anchors) {
  const Polyline3 visible = visible_polyline(lane);
  Lane3D out;
  out.score = lane.score;
  out.points.reserve(y_anchors.size());
  out.visibility.reserve(y_anchors.size());

  for (const double y : y_anchors) {
    if (visible.empty()) {
      out.points.emplace_back(0.0, y, 0.0);
      out.visibility.push_back(0);
      continue;
    }
    if (y < visible.front().y() || y > visible.back().y()) {
      const Vec3& nearest = y < visible.front().y() ? visible.front() : visible.back();
      out.points.emplace_back(nearest.x(), y, nearest.z());
      out.visibility.push_back(0);
      continue;
    }
    // First vertex with vertex.y >= y.
    auto it = std::lower_bound(visible.begin(), visible.end(), y,
                               [](const Vec3& p, double value) { return p.y() < value; });
    if (it->y() == y || it == visible.begin()) {
      out.points.emplace_back(it->x(), y, it->z());
    } else {
      const Vec3& hi = *it;
      const Vec3& lo = *(it - 1);
      const double t = (y - lo.y()) / (hi.y() - lo.y());
      out.points.emplace_back(lo.x() + t * (hi.x() - lo.x()), y, lo.z() + t * (hi.z() - lo.z()));
    }
    out.visibility.push_back(1);
  }
  return out;
}

}  // namespace lanekit

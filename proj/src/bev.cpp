#include "lanekit/bev.hpp"

#include "lanekit/error.hpp"

#include <algorithm>
#include <cmath>

namespace lanekit {

namespace {

std::int64_t pack(std::int64_t i, std::int64_t j) {
  return (i << 32) ^ (j & 0xffffffffLL);
}

double segment_distance_squared(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  const double ex = px - (ax + t * dx);
  const double ey = py - (ay + t * dy);
  return ex * ex + ey * ey;
}

}  // namespace

BevMask rasterize_polyline(std::span<const Vec3> polyline, double width, double resolution) {
  if (!(width > 0.0) || !(resolution > 0.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "lane width and resolution must be positive");
  }
  BevMask mask;
  mask.resolution = resolution;
  const double half = 0.5 * width;
  const double half2 = half * half;

  const std::size_t segments = polyline.size() > 1 ? polyline.size() - 1 : 1;
  for (std::size_t s = 0; s < segments; ++s) {
    const Vec3& a = polyline[s];
    const Vec3& b = polyline[std::min(s + 1, polyline.size() - 1)];
    const auto i0 = static_cast<std::int64_t>(std::floor((std::min(a.x(), b.x()) - half) / resolution));
    const auto i1 = static_cast<std::int64_t>(std::floor((std::max(a.x(), b.x()) + half) / resolution));
    const auto j0 = static_cast<std::int64_t>(std::floor((std::min(a.y(), b.y()) - half) / resolution));
    const auto j1 = static_cast<std::int64_t>(std::floor((std::max(a.y(), b.y()) + half) / resolution));
    for (std::int64_t i = i0; i <= i1; ++i) {
      const double cx = (static_cast<double>(i) + 0.5) * resolution;
      for (std::int64_t j = j0; j <= j1; ++j) {
        const double cy = (static_cast<double>(j) + 0.5) * resolution;
        if (segment_distance_squared(cx, cy, a.x(), a.y(), b.x(), b.y()) <= half2) {
          mask.cells.push_back(pack(i, j));
        }
      }
    }
  }
  std::sort(mask.cells.begin(), mask.cells.end());
  mask.cells.erase(std::unique(mask.cells.begin(), mask.cells.end()), mask.cells.end());
  return mask;
}

double mask_iou(const BevMask& a, const BevMask& b) {
  std::size_t inter = 0;
  auto ia = a.cells.begin();
  auto ib = b.cells.begin();
  while (ia != a.cells.end() && ib != b.cells.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.cells.size() + b.cells.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double bev_iou(const Lane3D& gt, const Lane3D& pred, const BevConfig& config) {
  const Polyline3 g = interpolate_lane(gt, config.n_interp);
  const Polyline3 p = interpolate_lane(pred, config.n_interp);
  return mask_iou(rasterize_polyline(g, config.lane_width, config.resolution),
                  rasterize_polyline(p, config.lane_width, config.resolution));
}

}  // namespace lanekit

#pragma once

#include "lanekit/lane.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lanekit {

/// Set of bird's-eye-view grid cells covered by a lane stroke.
///
/// The grid is anchored at the ground origin, so masks of different lanes
/// share cells. Cell (i, j) spans [i r, (i+1) r) x [j r, (j+1) r).
struct BevMask {
  double resolution = 0.05;
  std::vector<std::int64_t> cells;  // sorted, unique

  std::size_t area_cells() const { return cells.size(); }
};

/// A cell is covered when its center lies within width/2 of the (x, y)
/// polyline.
BevMask rasterize_polyline(std::span<const Vec3> polyline, double width, double resolution);

double mask_iou(const BevMask& a, const BevMask& b);

struct BevConfig {
  double lane_width = 0.3;
  double resolution = 0.05;
  int n_interp = 100;
};

/// IoU of the two stroked n-point interpolations.
double bev_iou(const Lane3D& gt, const Lane3D& pred, const BevConfig& config);

}  // namespace lanekit

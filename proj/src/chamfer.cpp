#include "lanekit/chamfer.hpp"

#include "lanekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lanekit {

NearestIndex::NearestIndex(std::span<const Vec3> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].y() < points[b].y(); });
  xs_.reserve(points.size());
  ys_.reserve(points.size());
  zs_.reserve(points.size());
  for (const std::size_t i : order) {
    xs_.push_back(points[i].x());
    ys_.push_back(points[i].y());
    zs_.push_back(points[i].z());
  }
  for (std::size_t b = 0; b * kBlock < ys_.size(); ++b) {
    Box box{{xs_[b * kBlock], ys_[b * kBlock], zs_[b * kBlock]}, {xs_[b * kBlock], ys_[b * kBlock], zs_[b * kBlock]}};
    for (std::size_t i = b * kBlock; i < std::min(ys_.size(), (b + 1) * kBlock); ++i) {
      const double v[3] = {xs_[i], ys_[i], zs_[i]};
      for (int c = 0; c < 3; ++c) {
        box.lo[c] = std::min(box.lo[c], v[c]);
        box.hi[c] = std::max(box.hi[c], v[c]);
      }
    }
    boxes_.push_back(box);
  }
}

double NearestIndex::scan_block(std::size_t b, double qx, double qy, double qz, double best) const {
  const std::size_t end = std::min(ys_.size(), (b + 1) * kBlock);
  for (std::size_t i = b * kBlock; i < end; ++i) {
    const double dx = qx - xs_[i];
    const double dy = qy - ys_[i];
    const double dz = qz - zs_[i];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best) best = d2;
  }
  return best;
}

// Blocks are visited outward from the one holding qy. A block is skipped
// when the squared distance to its box already exceeds the best; rounding
// is monotone, so the box bound never exceeds a member's computed d2 and
// the result equals an exhaustive scan bit for bit.
double NearestIndex::nearest_squared(const Vec3& q) const {
  const double qx = q.x();
  const double qy = q.y();
  const double qz = q.z();
  const std::size_t n = ys_.size();
  if (n == 0) return std::numeric_limits<double>::infinity();

  const auto gap = [](double v, double lo, double hi) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  };
  const auto bound = [&](const Box& box) {
    const double gx = gap(qx, box.lo[0], box.hi[0]);
    const double gy = gap(qy, box.lo[1], box.hi[1]);
    const double gz = gap(qz, box.lo[2], box.hi[2]);
    return gx * gx + gy * gy + gz * gz;
  };

  // Last block starting at or below qy; any start block gives the same result.
  std::size_t b0 = 0;
  while (b0 + 1 < boxes_.size() && boxes_[b0 + 1].lo[1] <= qy) ++b0;
  double best = scan_block(b0, qx, qy, qz, std::numeric_limits<double>::infinity());

  for (std::size_t b = b0 + 1; b < boxes_.size(); ++b) {
    const double dy = boxes_[b].lo[1] - qy;
    if (dy > 0.0 && dy * dy > best) break;
    if (bound(boxes_[b]) > best) continue;
    best = scan_block(b, qx, qy, qz, best);
  }
  for (std::size_t b = b0; b-- > 0;) {
    const double dy = qy - boxes_[b].hi[1];
    if (dy > 0.0 && dy * dy > best) break;
    if (bound(boxes_[b]) > best) continue;
    best = scan_block(b, qx, qy, qz, best);
  }
  return best;
}

double NearestIndex::nearest(const Vec3& q) const { return std::sqrt(nearest_squared(q)); }

DirectedStats directed_distance(std::span<const Vec3> from, const NearestIndex& to) {
  DirectedStats out;
  if (from.empty()) return out;
  double sum = 0.0;
  for (const Vec3& p : from) {
    const double d = to.nearest(p);
    sum += d;
    if (d > out.max) out.max = d;
  }
  out.mean = sum / static_cast<double>(from.size());
  return out;
}

ChamferPair chamfer_pair(std::span<const Vec3> gt, std::span<const Vec3> pred) {
  const NearestIndex gt_index(gt);
  const NearestIndex pred_index(pred);
  return {directed_distance(gt, pred_index), directed_distance(pred, gt_index)};
}

double unilateral_cd(const Lane3D& gt, const Lane3D& pred, int n) {
  const Polyline3 g = interpolate_lane(gt, n);
  const Polyline3 p = interpolate_lane(pred, n);
  return directed_distance(g, NearestIndex(p)).mean;
}

double bidirectional_cd(const Lane3D& gt, const Lane3D& pred, int n) {
  const Polyline3 g = interpolate_lane(gt, n);
  const Polyline3 p = interpolate_lane(pred, n);
  return chamfer_pair(g, p).bidirectional();
}

DistanceMatrix bcd_distance_matrix(std::span<const Polyline3> gt, std::span<const Polyline3> pred) {
  DistanceMatrix d;
  d.rows = static_cast<int>(gt.size());
  d.cols = static_cast<int>(pred.size());
  d.values.resize(gt.size() * pred.size());

  std::vector<NearestIndex> gt_index;
  gt_index.reserve(gt.size());
  for (const auto& g : gt) gt_index.emplace_back(g);
  std::vector<NearestIndex> pred_index;
  pred_index.reserve(pred.size());
  for (const auto& p : pred) pred_index.emplace_back(p);

  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double p_to_g = directed_distance(pred[j], gt_index[i]).mean;
      const double g_to_p = directed_distance(gt[i], pred_index[j]).mean;
      d.values[i * pred.size() + j] = 0.5 * (p_to_g + g_to_p);
    }
  }
  return d;
}

BcdSelection bcd_select(const DistanceMatrix& distances, double tau) {
  const auto ng = static_cast<std::size_t>(distances.rows);
  const auto np = static_cast<std::size_t>(distances.cols);
  BcdSelection s;
  s.tp.assign(np, 0);
  s.fp.assign(np, 0);
  s.covered.assign(ng, 0);
  s.best_gt.assign(np, -1);
  s.best_distance.assign(np, std::numeric_limits<double>::infinity());
  if (np == 0) return s;
  if (ng == 0) {
    s.fp.assign(np, 1);
    return s;
  }

  for (int j = 0; j < distances.cols; ++j) {
    int best = 0;
    for (int i = 1; i < distances.rows; ++i) {
      if (distances(i, j) < distances(best, j)) best = i;
    }
    const auto jj = static_cast<std::size_t>(j);
    s.best_gt[jj] = best;
    s.best_distance[jj] = distances(best, j);
    if (distances(best, j) <= tau && s.covered[static_cast<std::size_t>(best)] == 0) {
      s.tp[jj] = 1;
      s.covered[static_cast<std::size_t>(best)] = 1;
    } else {
      s.fp[jj] = 1;
    }
  }
  return s;
}

BcdSelection bcd_select_tp_fp(std::span<const Lane3D> gt, std::span<const Lane3D> pred,
                              double tau, int n) {
  std::vector<Polyline3> g, p;
  g.reserve(gt.size());
  p.reserve(pred.size());
  for (const auto& lane : gt) g.push_back(interpolate_lane(lane, n));
  for (const auto& lane : pred) p.push_back(interpolate_lane(lane, n));
  return bcd_select(bcd_distance_matrix(g, p), tau);
}

}  // namespace lanekit

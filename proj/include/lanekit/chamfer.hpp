#pragma once

#include "lanekit/lane.hpp"

#include <span>
#include <vector>

namespace lanekit {

/// Point set sorted by y for exact nearest-neighbour queries.
///
/// A query walks outward from its y position and stops once dy^2 exceeds
/// the best squared distance found, so it returns exactly the brute-force
/// minimum of sqrt(dx*dx + dy*dy + dz*dz).
class NearestIndex {
 public:
  explicit NearestIndex(std::span<const Vec3> points);

  /// Squared distance from q to the nearest indexed point.
  double nearest_squared(const Vec3& q) const;
  double nearest(const Vec3& q) const;

  std::size_t size() const { return ys_.size(); }

 private:
  static constexpr std::size_t kBlock = 8;

  struct Box {
    double lo[3];
    double hi[3];
  };

  double scan_block(std::size_t b, double qx, double qy, double qz, double best) const;

  // Points sorted by y, with bounding boxes of consecutive runs of kBlock.
  std::vector<double> xs_, ys_, zs_;
  std::vector<Box> boxes_;
};

/// Mean and max over `from` of the distance to the nearest point of `to`.
struct DirectedStats {
  double mean = 0.0;
  double max = 0.0;
};

/// Summed in `from` order and divided by |from|.
DirectedStats directed_distance(std::span<const Vec3> from, const NearestIndex& to);

/// Both directed distances between two interpolated lanes.
struct ChamferPair {
  DirectedStats gt_to_pred;
  DirectedStats pred_to_gt;

  double unilateral() const { return gt_to_pred.mean; }
  double bidirectional() const { return 0.5 * (pred_to_gt.mean + gt_to_pred.mean); }
  /// Symmetric Hausdorff distance.
  double hausdorff() const {
    return gt_to_pred.max > pred_to_gt.max ? gt_to_pred.max : pred_to_gt.max;
  }
};

ChamferPair chamfer_pair(std::span<const Vec3> gt, std::span<const Vec3> pred);

/// Mean over the n-point GT interpolation of the nearest n-point prediction
/// distance. Throws kDegenerateLane.
double unilateral_cd(const Lane3D& gt, const Lane3D& pred, int n);

/// Average of both directed mean nearest-neighbour distances.
double bidirectional_cd(const Lane3D& gt, const Lane3D& pred, int n);

/// Outcome of the greedy bidirectional-Chamfer selection.
struct BcdSelection {
  std::vector<int> tp;       ///< per prediction
  std::vector<int> fp;       ///< per prediction
  std::vector<int> covered;  ///< per ground truth
  std::vector<int> best_gt;  ///< argmin ground truth per prediction, -1 when none
  std::vector<double> best_distance;
};

/// Bidirectional distance matrix D(i, j), ground truth i by prediction j.
struct DistanceMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major

  double operator()(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(j)];
  }
};

DistanceMatrix bcd_distance_matrix(std::span<const Polyline3> gt, std::span<const Polyline3> pred);

/// Predictions are visited in input order. Each takes its nearest ground
/// truth (lowest index on ties); it is a TP when that distance is <= tau and
/// the ground truth is not yet covered, otherwise an FP.
BcdSelection bcd_select(const DistanceMatrix& distances, double tau);

BcdSelection bcd_select_tp_fp(std::span<const Lane3D> gt, std::span<const Lane3D> pred,
                              double tau, int n);

}  // namespace lanekit

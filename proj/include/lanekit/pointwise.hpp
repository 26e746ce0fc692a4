#pragma once

#include "lanekit/hungarian.hpp"
#include "lanekit/metrics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lanekit {

/// Matching cost between two lanes on the same anchors: mean over anchors
/// where either lane is visible of the (x, z) distance, capped at
/// cost_cap_factor * tau_dist. An anchor visible in only one lane costs the
/// cap. Throws kAnchorMismatch if the anchor grids differ.
double pointwise_pair_cost(const Lane3D& gt, const Lane3D& pred, const PointwiseConfig& config);

/// Minimum-cost one-to-one assignment, rows = ground truths.
MatchResult pointwise_match(std::span<const Lane3D> gt, std::span<const Lane3D> pred,
                            const PointwiseConfig& config);

/// TP iff at least tp_fraction of the GT-visible anchors have a visible
/// prediction within tau_dist (closed threshold) in the (x, z) plane.
bool pointwise_tp(const Lane3D& gt, const Lane3D& pred, const PointwiseConfig& config);

/// Sums and counts behind the near/far error means, so results from
/// disjoint frame sets can be merged.
struct RangeErrorAccumulator {
  StableSum x_near, x_far, z_near, z_far;
  long long near_count = 0;
  long long far_count = 0;

  void add_pair(const Lane3D& gt, const Lane3D& pred, const PointwiseConfig& config);
  void merge(const RangeErrorAccumulator& other);
};

struct RangeErrors {
  std::optional<double> x_near, x_far, z_near, z_far;
};

RangeErrors range_errors(const RangeErrorAccumulator& acc);

struct MatchedPair {
  const Lane3D* gt;
  const Lane3D* pred;
};

/// Mean |dx| and |dz| over anchors visible in both lanes, split by the GT y
/// into the near range [lo, hi) and the far range [lo, hi]. Ranges without
/// anchors are absent.
RangeErrors xz_errors(std::span<const MatchedPair> pairs, const PointwiseConfig& config);

}  // namespace lanekit

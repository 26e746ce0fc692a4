#include "lanekit/pointwise.hpp"

#include "lanekit/error.hpp"
#include "lanekit/parallel.hpp"

#include <cmath>
#include <string>

namespace lanekit {

namespace {

void require_same_anchors(const Lane3D& gt, const Lane3D& pred) {
  if (gt.size() != pred.size()) {
    throw LaneError(ErrorCode::kAnchorMismatch, std::to_string(gt.size()) + " vs " +
                                                    std::to_string(pred.size()) + " anchors");
  }
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (gt.points[j].y() != pred.points[j].y()) {
      throw LaneError(ErrorCode::kAnchorMismatch, "anchor " + std::to_string(j) + " differs in y");
    }
  }
}

double xz_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dz * dz);
}

}  // namespace

double pointwise_pair_cost(const Lane3D& gt, const Lane3D& pred, const PointwiseConfig& config) {
  require_same_anchors(gt, pred);
  const double cap = config.cost_cap_factor * config.tau_dist;
  double sum = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < gt.size(); ++j) {
    const bool g = gt.visibility[j] != 0;
    const bool p = pred.visibility[j] != 0;
    if (!g && !p) continue;
    sum += (g && p) ? std::min(xz_distance(gt.points[j], pred.points[j]), cap) : cap;
    ++count;
  }
  return count == 0 ? cap : sum / count;
}

MatchResult pointwise_match(std::span<const Lane3D> gt, std::span<const Lane3D> pred,
                            const PointwiseConfig& config) {
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pointwise_pair_cost(gt[i], pred[j], config);
    }
  }
  return hungarian(cost);
}

bool pointwise_tp(const Lane3D& gt, const Lane3D& pred, const PointwiseConfig& config) {
  require_same_anchors(gt, pred);
  int visible = 0;
  int within = 0;
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (gt.visibility[j] == 0) continue;
    ++visible;
    if (pred.visibility[j] != 0 && xz_distance(gt.points[j], pred.points[j]) <= config.tau_dist) {
      ++within;
    }
  }
  if (visible == 0) return false;
  return static_cast<double>(within) >= config.tp_fraction * static_cast<double>(visible);
}

void RangeErrorAccumulator::add_pair(const Lane3D& gt, const Lane3D& pred,
                                     const PointwiseConfig& config) {
  require_same_anchors(gt, pred);
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (gt.visibility[j] == 0 || pred.visibility[j] == 0) continue;
    const double y = gt.points[j].y();
    const double dx = std::abs(pred.points[j].x() - gt.points[j].x());
    const double dz = std::abs(pred.points[j].z() - gt.points[j].z());
    if (y >= config.near_range[0] && y < config.near_range[1]) {
      x_near.add(dx);
      z_near.add(dz);
      ++near_count;
    } else if (y >= config.far_range[0] && y <= config.far_range[1]) {
      x_far.add(dx);
      z_far.add(dz);
      ++far_count;
    }
  }
}

void RangeErrorAccumulator::merge(const RangeErrorAccumulator& other) {
  x_near.add(other.x_near.value());
  x_far.add(other.x_far.value());
  z_near.add(other.z_near.value());
  z_far.add(other.z_far.value());
  near_count += other.near_count;
  far_count += other.far_count;
}

RangeErrors range_errors(const RangeErrorAccumulator& acc) {
  RangeErrors out;
  if (acc.near_count > 0) {
    out.x_near = acc.x_near.value() / static_cast<double>(acc.near_count);
    out.z_near = acc.z_near.value() / static_cast<double>(acc.near_count);
  }
  if (acc.far_count > 0) {
    out.x_far = acc.x_far.value() / static_cast<double>(acc.far_count);
    out.z_far = acc.z_far.value() / static_cast<double>(acc.far_count);
  }
  return out;
}

RangeErrors xz_errors(std::span<const MatchedPair> pairs, const PointwiseConfig& config) {
  RangeErrorAccumulator acc;
  for (const auto& p : pairs) acc.add_pair(*p.gt, *p.pred, config);
  return range_errors(acc);
}

MetricReport openlane_report(std::span<const EvalFrame> frames, const PointwiseConfig& config) {
  validate(config);

  struct FrameResult {
    FrameMetrics metrics;
    RangeErrorAccumulator errors;
  };
  std::vector<FrameResult> results(frames.size());

  parallel_for(frames.size(), config.threads, [&](std::size_t i) {
    const EvalFrame& frame = frames[i];
    std::vector<Lane3D> gt, pred;
    gt.reserve(frame.gt.size());
    pred.reserve(frame.pred.size());
    for (const auto& l : frame.gt) gt.push_back(resample_to_anchors(l, config.y_anchors));
    for (const auto& l : frame.pred) pred.push_back(resample_to_anchors(l, config.y_anchors));

    const MatchResult match = pointwise_match(gt, pred, config);
    FrameResult& out = results[i];
    out.metrics.frame_id = frame.frame_id;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      const int j = match.row_to_col[k];
      if (j == MatchResult::kUnmatched) continue;
      const Lane3D& p = pred[static_cast<std::size_t>(j)];
      if (!pointwise_tp(gt[k], p, config)) continue;
      ++out.metrics.tp;
      out.metrics.pairs.push_back({static_cast<int>(k), j, pointwise_pair_cost(gt[k], p, config)});
      out.errors.add_pair(gt[k], p, config);
    }
    out.metrics.fp = static_cast<int>(pred.size()) - out.metrics.tp;
    out.metrics.fn = static_cast<int>(gt.size()) - out.metrics.tp;
  });

  MetricReport r;
  r.protocol = Protocol::kOpenLane;
  r.tau = config.tau_dist;
  r.ordering_hash = ordering_hash(frames);
  RangeErrorAccumulator total;
  for (auto& f : results) {
    r.tp += f.metrics.tp;
    r.fp += f.metrics.fp;
    r.fn += f.metrics.fn;
    total.merge(f.errors);
    r.per_frame.push_back(std::move(f.metrics));
  }
  finalize_counts(r);
  const RangeErrors e = range_errors(total);
  r.extra["x_near"] = e.x_near;
  r.extra["x_far"] = e.x_far;
  r.extra["z_near"] = e.z_near;
  r.extra["z_far"] = e.z_far;
  return r;
}

}  // namespace lanekit

#include "lanekit/losses.hpp"

#include "lanekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanekit {

void validate(const LossConfig& config) {
  for (double g : config.gamma) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw LaneError(ErrorCode::kConfigError, "loss weights must be finite and >= 0");
    }
  }
  if (!(config.background_weight >= 0.0)) {
    throw LaneError(ErrorCode::kConfigError, "background weight must be >= 0");
  }
}

double binary_cross_entropy(double p, int label) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return label != 0 ? -std::log(q) : -std::log1p(-q);
}

double curve_fit_loss(const Curve2D& gt, const Curve2D& pred, const CameraModel& camera,
                      const SampleGrid& grid, const LossConfig& config) {
  const auto gt_samples = sample_curve(gt, camera, grid, config.curve_form);
  const auto pred_samples = sample_curve(pred, camera, grid, config.curve_form);
  double u_term = 0.0;
  for (std::size_t j = 0; j < gt_samples.size(); ++j) {
    if (gt_samples[j].valid && pred_samples[j].valid) {
      u_term += std::abs(pred_samples[j].u - gt_samples[j].u);
    }
  }
  const double bounds = std::abs(pred.v_low - gt.v_low) + std::abs(pred.v_up - gt.v_up);
  return config.g(5) * u_term + config.g(6) * bounds;
}

Eigen::MatrixXd curve_match_cost(std::span<const Curve2D> gt, std::span<const Curve2D> pred,
                                 const CameraModel& camera, const SampleGrid& grid,
                                 const LossConfig& config) {
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t k = 0; k < gt.size(); ++k) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) =
          config.g(4) * (1.0 - pred[p].confidence) +
          curve_fit_loss(gt[k], pred[p], camera, grid, config);
    }
  }
  return cost;
}

namespace {

void require_same_anchors(const LaneRecord& gt, const LaneRecord& pred, std::size_t k) {
  if (gt.lane.size() != pred.lane.size()) {
    throw LaneError(ErrorCode::kAnchorMismatch,
                    "ground truth " + std::to_string(k) + " has " + std::to_string(gt.lane.size()) +
                        " anchors, its match has " + std::to_string(pred.lane.size()));
  }
}

double location_term(const LaneRecord& gt, const LaneRecord& pred, const LossConfig& config) {
  double sum = 0.0;
  for (std::size_t j = 0; j < gt.lane.size(); ++j) {
    if (gt.lane.visibility[j] == 0) continue;
    const Vec3& a = gt.lane.points[j];
    const Vec3& b = pred.lane.points[j];
    sum += config.g(2) * std::abs(b.x() - a.x()) + config.g(3) * std::abs(b.z() - a.z());
  }
  return sum;
}

}  // namespace

Eigen::MatrixXd location_match_cost(std::span<const LaneRecord> gt,
                                    std::span<const LaneRecord> pred, const LossConfig& config) {
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t k = 0; k < gt.size(); ++k) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      require_same_anchors(gt[k], pred[p], k);
      cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) =
          location_term(gt[k], pred[p], config);
    }
  }
  return cost;
}

double loss_loc(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match, const LossConfig& config) {
  double sum = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const int p = match.row_to_col[k];
    if (p == MatchResult::kUnmatched) continue;
    const LaneRecord& prediction = pred[static_cast<std::size_t>(p)];
    require_same_anchors(gt[k], prediction, k);
    sum += location_term(gt[k], prediction, config);
  }
  return sum;
}

double loss_vis(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const int p = match.row_to_col[k];
    if (p == MatchResult::kUnmatched) continue;
    const LaneRecord& prediction = pred[static_cast<std::size_t>(p)];
    require_same_anchors(gt[k], prediction, k);
    for (std::size_t j = 0; j < gt[k].lane.size(); ++j) {
      const double prob = prediction.vis_prob ? (*prediction.vis_prob)[j]
                                              : static_cast<double>(prediction.lane.visibility[j]);
      sum += binary_cross_entropy(prob, gt[k].lane.visibility[j]);
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double loss_unc(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match, const LossConfig& config) {
  double sum = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const int p = match.row_to_col[k];
    if (p == MatchResult::kUnmatched) continue;
    const LaneRecord& prediction = pred[static_cast<std::size_t>(p)];
    require_same_anchors(gt[k], prediction, k);
    if (!prediction.uncertainty) {
      throw LaneError(ErrorCode::kMissingField, "prediction " + std::to_string(p) + " uncertainty");
    }
    const auto& unc = *prediction.uncertainty;
    if (unc.size() + 1 != prediction.lane.size()) {
      throw LaneError(ErrorCode::kInvalidArgument,
                      "prediction " + std::to_string(p) + " needs one uncertainty per segment");
    }
    const auto& g = gt[k].lane;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
      if (g.visibility[j] == 0 || g.visibility[j + 1] == 0) continue;
      const GaussianPair pair = paired_segment_gaussians(
          prediction.lane.points[j], prediction.lane.points[j + 1], g.points[j], g.points[j + 1],
          unc[j][0], unc[j][1], config.rotation);
      sum += symmetric_kld(pair.pred, pair.gt);
    }
  }
  return sum;
}

CurveLoss loss_curve(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                     const MatchResult& match, const CameraModel& camera, const SampleGrid& grid,
                     const LossConfig& config) {
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].curve) throw LaneError(ErrorCode::kMissingField, "ground truth " + std::to_string(i) + " curve");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred[i].curve) throw LaneError(ErrorCode::kMissingField, "prediction " + std::to_string(i) + " curve");
  }

  const std::vector<int> owner = match.col_to_row(static_cast<int>(pred.size()));
  CurveLoss out;
  double ce = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double c_hat = pred[p].curve->confidence;
    if (owner[p] != MatchResult::kUnmatched) {
      ce += binary_cross_entropy(c_hat, 1);
    } else {
      ce += config.background_weight * binary_cross_entropy(c_hat, 0);
    }
  }
  out.ce = config.g(4) * ce;

  for (std::size_t k = 0; k < gt.size(); ++k) {
    const int p = match.row_to_col[k];
    if (p == MatchResult::kUnmatched) continue;
    out.fit += curve_fit_loss(*gt[k].curve, *pred[static_cast<std::size_t>(p)].curve, camera, grid,
                              config);
  }
  return out;
}

LossBreakdown loss_total(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                         const CameraModel& camera, const SampleGrid& grid,
                         const LossConfig& config) {
  validate(config);
  const auto has_curve = [](const LaneRecord& r) { return r.curve.has_value(); };
  const bool gt_curves = !gt.empty() && std::all_of(gt.begin(), gt.end(), has_curve);
  const bool pred_curves = !pred.empty() && std::all_of(pred.begin(), pred.end(), has_curve);
  const bool any_curve = std::any_of(gt.begin(), gt.end(), has_curve) ||
                         std::any_of(pred.begin(), pred.end(), has_curve);
  const bool use_curves = any_curve;
  if (any_curve && !((gt.empty() || gt_curves) && (pred.empty() || pred_curves))) {
    throw LaneError(ErrorCode::kMissingField, "curve (present on some lanes only)");
  }

  LossBreakdown out;
  if (use_curves) {
    std::vector<Curve2D> gc, pc;
    for (const auto& r : gt) gc.push_back(*r.curve);
    for (const auto& r : pred) pc.push_back(*r.curve);
    out.match = hungarian(curve_match_cost(gc, pc, camera, grid, config));
    out.matched_on_curves = true;
  } else {
    out.match = hungarian(location_match_cost(gt, pred, config));
  }

  out.loc = loss_loc(gt, pred, out.match, config);
  out.vis = loss_vis(gt, pred, out.match);

  bool have_unc = true;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const int p = out.match.row_to_col[k];
    if (p != MatchResult::kUnmatched && !pred[static_cast<std::size_t>(p)].uncertainty) have_unc = false;
  }
  if (have_unc) out.unc = loss_unc(gt, pred, out.match, config);

  if (use_curves) {
    const CurveLoss curve = loss_curve(gt, pred, out.match, camera, grid, config);
    out.ce = curve.ce;
    out.fit = curve.fit;
  }

  const double weighted_unc = out.unc ? config.g(1) * *out.unc : 0.0;
  out.point = weighted_unc + out.vis + out.loc;
  out.curve = out.ce.value_or(0.0) + out.fit.value_or(0.0);
  out.total = out.point + out.curve;
  return out;
}

}  // namespace lanekit

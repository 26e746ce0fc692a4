#pragma once

#include "lanekit/curve.hpp"
#include "lanekit/gaussian.hpp"
#include "lanekit/hungarian.hpp"
#include "lanekit/lane.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace lanekit {

/// A lane plus the optional per-lane quantities a detector emits.
struct LaneRecord {
  Lane3D lane;
  /// Predicted visibility probabilities, one per point.
  std::optional<std::vector<double>> vis_prob;
  std::optional<Curve2D> curve;
  /// (lambda_w, lambda_h) per segment, size = points - 1.
  std::optional<std::vector<std::array<double, 2>>> uncertainty;
};

struct LossConfig {
  /// gamma_1..gamma_6: uncertainty, x, z, classification, curve u-term,
  /// curve boundary term.
  std::array<double, 6> gamma{0.5, 2.0, 10.0, 3.0, 5.0, 2.0};
  /// Weight on the classification term of unmatched (background) predictions.
  double background_weight = 1.0;
  CurveForm curve_form = CurveForm::kRoadProjection;
  RotationConvention rotation = RotationConvention::kPrinted;

  double g(int i) const { return gamma[static_cast<std::size_t>(i - 1)]; }
};

void validate(const LossConfig& config);

inline constexpr double kProbClamp = 1e-7;

/// -ln p for label 1, -ln(1-p) for label 0, after clamping p to
/// [kProbClamp, 1 - kProbClamp].
double binary_cross_entropy(double p, int label);

/// Curve-level matching cost, rows = ground truths:
/// gamma4 (1 - c_hat) + gamma5 sum|u_hat - u| + gamma6 (|dv_low| + |dv_up|).
/// The u-term runs over sample rows valid in both curves.
Eigen::MatrixXd curve_match_cost(std::span<const Curve2D> gt, std::span<const Curve2D> pred,
                                 const CameraModel& camera, const SampleGrid& grid,
                                 const LossConfig& config);

/// The curve-fitting term L_f for one matched pair.
double curve_fit_loss(const Curve2D& gt, const Curve2D& pred, const CameraModel& camera,
                      const SampleGrid& grid, const LossConfig& config);

/// Point-level matching cost used when neither side carries curves:
/// gamma2 |dx| + gamma3 |dz| over GT-visible anchors.
Eigen::MatrixXd location_match_cost(std::span<const LaneRecord> gt,
                                    std::span<const LaneRecord> pred, const LossConfig& config);

/// Sum over matched lanes and GT-visible anchors of gamma2 |dx| + gamma3 |dz|.
/// Throws kAnchorMismatch when a matched pair has different point counts.
double loss_loc(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match, const LossConfig& config);

/// Mean BCE over every anchor of matched lanes. Predictions without
/// vis_prob use their 0/1 flags.
double loss_vis(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match);

/// Unweighted uncertainty loss: half the sum of both KL directions over
/// segments whose GT endpoints are both visible. Throws kMissingField if a
/// matched prediction has no uncertainties.
double loss_unc(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                const MatchResult& match, const LossConfig& config);

struct CurveLoss {
  double ce = 0.0;   ///< gamma4-weighted classification over all predictions
  double fit = 0.0;  ///< L_f summed over matched pairs
};

/// Throws kMissingField if any lane lacks a curve.
CurveLoss loss_curve(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                     const MatchResult& match, const CameraModel& camera,
                     const SampleGrid& grid, const LossConfig& config);

/// Itemized total. Absent components (no uncertainties, no curves) are
/// empty and contribute nothing.
struct LossBreakdown {
  std::optional<double> unc;  ///< unweighted L_unc
  double vis = 0.0;
  double loc = 0.0;
  std::optional<double> ce;
  std::optional<double> fit;
  double point = 0.0;  ///< gamma1 L_unc + L_vis + L_loc
  double curve = 0.0;  ///< L_ce + L_f
  double total = 0.0;
  MatchResult match;
  bool matched_on_curves = false;
};

/// Matches on curves when both sides have them, else on point locations.
LossBreakdown loss_total(std::span<const LaneRecord> gt, std::span<const LaneRecord> pred,
                         const CameraModel& camera, const SampleGrid& grid,
                         const LossConfig& config);

}  // namespace lanekit

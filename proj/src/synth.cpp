#include "lanekit/synth.hpp"

#include "lanekit/error.hpp"

#include <cmath>
#include <random>

namespace lanekit {

namespace {

constexpr double kMinLambda = 0.01;

struct LaneShape {
  double offset, c1, c2, c3, g1, g2;

  double x(double y) const { return offset + y * (c1 + y * (c2 + y * c3)); }
  double dx(double y) const { return c1 + y * (2.0 * c2 + y * 3.0 * c3); }
  double z(double y) const { return y * (g1 + y * g2); }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Image points of a lane that fall inside the image.
std::vector<Pixel> visible_pixels(const Lane3D& lane, const CameraModel& camera) {
  std::vector<Pixel> out;
  const ImageSize& im = camera.image_size;
  for (const auto& p : lane.points) {
    if (ground_to_camera(camera, p).z() <= kMinDepth) continue;
    const Eigen::Vector2d uv = project_ground_to_image(camera, p);
    if (uv.x() >= 0.0 && uv.x() < im.width && uv.y() >= 0.0 && uv.y() < im.height) out.push_back(uv);
  }
  return out;
}

// Fit curves for every lane of a record. Returns false, leaving the record
// untouched, when some lane cannot support a fit.
bool attach_curves(std::vector<LaneRecord>& lanes, const CameraModel& camera) {
  std::vector<std::vector<Pixel>> pixels;
  for (const auto& l : lanes) pixels.push_back(visible_pixels(l.lane, camera));
  CurveFitResult fit;
  try {
    fit = fit_curves(pixels, camera.image_size);
  } catch (const LaneError&) {
    return false;
  }
  for (std::size_t k = 0; k < lanes.size(); ++k) lanes[k].curve = fit.curves[k];
  return true;
}

}  // namespace

void validate(const NoiseModel& noise) {
  for (double s : {noise.sigma_w0, noise.sigma_w_slope, noise.sigma_h0, noise.sigma_h_slope}) {
    if (!std::isfinite(s) || s < 0.0) {
      throw LaneError(ErrorCode::kInvalidArgument, "noise parameters must be finite and >= 0");
    }
  }
}

void validate(const ScenarioParams& params) {
  if (params.n_frames <= 0) throw LaneError(ErrorCode::kInvalidArgument, "frames must be positive");
  if (params.lanes_per_frame <= 0) throw LaneError(ErrorCode::kInvalidArgument, "lanes must be positive");
  if (!(params.curvature_range[0] <= params.curvature_range[1])) {
    throw LaneError(ErrorCode::kInvalidArgument, "curvature range must satisfy lo <= hi");
  }
  if (!(params.lane_spacing > 0.0)) throw LaneError(ErrorCode::kInvalidArgument, "lane spacing must be positive");
  if (!(params.max_grade >= 0.0)) throw LaneError(ErrorCode::kInvalidArgument, "max grade must be >= 0");
  if (params.y_anchors.size() < 2) throw LaneError(ErrorCode::kInvalidArgument, "need at least two anchors");
  for (std::size_t i = 1; i < params.y_anchors.size(); ++i) {
    if (!(params.y_anchors[i] > params.y_anchors[i - 1])) {
      throw LaneError(ErrorCode::kInvalidArgument, "anchors must be strictly increasing");
    }
  }
  validate(params.noise);
  validate(params.camera);
}

Scenario generate_scenario(const ScenarioParams& params) {
  validate(params);
  // Separate streams so the ground truth does not depend on emit_pred.
  std::mt19937_64 shape_rng(params.noise.seed);
  std::mt19937_64 noise_rng(params.noise.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  Scenario out;
  if (params.emit_pred) out.pred.emplace();
  StableSum abs_w, sq_w, abs_h, sq_h;

  const int width = 1 + static_cast<int>(std::log10(static_cast<double>(params.n_frames)));
  const double centre = 0.5 * (params.lanes_per_frame - 1);

  for (int f = 0; f < params.n_frames; ++f) {
    std::string id = std::to_string(f);
    id.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0');
    FrameFileRecord gt{"frame_" + id, params.camera, {}};
    FrameFileRecord pred{gt.frame_id, std::nullopt, {}};

    const double c1 = uniform(shape_rng, -0.02, 0.02);
    const double c2 = uniform(shape_rng, params.curvature_range[0], params.curvature_range[1]);
    const double c3 = uniform(shape_rng, params.curvature_range[0], params.curvature_range[1]) * 1e-2;
    const double g1 = uniform(shape_rng, -params.max_grade, params.max_grade);
    const double g2 = uniform(shape_rng, -params.max_grade, params.max_grade) * 1e-3;

    for (int k = 0; k < params.lanes_per_frame; ++k) {
      const LaneShape shape{(k - centre) * params.lane_spacing, c1, c2, c3, g1, g2};
      LaneRecord g;
      for (double y : params.y_anchors) g.lane.points.emplace_back(shape.x(y), y, shape.z(y));
      g.lane.visibility.assign(g.lane.points.size(), 1);
      gt.lanes.push_back(g);
      if (!params.emit_pred) continue;

      LaneRecord p;
      p.lane.score = 1.0;
      p.lane.visibility = g.lane.visibility;
      p.vis_prob = std::vector<double>(g.lane.points.size(), 1.0);
      for (double y : params.y_anchors) {
        const double ew = normal(noise_rng) * params.noise.sigma_w(y);
        const double eh = normal(noise_rng) * params.noise.sigma_h(y);
        const double slope = shape.dx(y);
        const double norm = std::sqrt(1.0 + slope * slope);
        p.lane.points.emplace_back(shape.x(y) + ew / norm, y - ew * slope / norm, shape.z(y) + eh);
        abs_w.add(std::abs(ew));
        sq_w.add(ew * ew);
        abs_h.add(std::abs(eh));
        sq_h.add(eh * eh);
        ++out.stats.points;
      }
      std::vector<std::array<double, 2>> unc;
      for (std::size_t j = 0; j + 1 < params.y_anchors.size(); ++j) {
        const double y = 0.5 * (params.y_anchors[j] + params.y_anchors[j + 1]);
        unc.push_back({std::max(2.0 * params.noise.sigma_w(y), kMinLambda),
                       std::max(2.0 * params.noise.sigma_h(y), kMinLambda)});
      }
      p.uncertainty = std::move(unc);
      validate(p.lane);
      pred.lanes.push_back(std::move(p));
    }

    if (params.emit_curves) {
      std::vector<LaneRecord> gt_lanes = gt.lanes;
      std::vector<LaneRecord> pred_lanes = pred.lanes;
      if (attach_curves(gt_lanes, params.camera) &&
          (!params.emit_pred || attach_curves(pred_lanes, params.camera))) {
        gt.lanes = std::move(gt_lanes);
        pred.lanes = std::move(pred_lanes);
        ++out.curve_frames;
      }
    }

    out.gt.push_back(std::move(gt));
    if (out.pred) out.pred->push_back(std::move(pred));
  }

  if (out.stats.points > 0) {
    const double n = static_cast<double>(out.stats.points);
    out.stats.mean_abs_lateral = abs_w.value() / n;
    out.stats.rms_lateral = std::sqrt(sq_w.value() / n);
    out.stats.mean_abs_vertical = abs_h.value() / n;
    out.stats.rms_vertical = std::sqrt(sq_h.value() / n);
  }
  return out;
}

nlohmann::json scenario_manifest(const ScenarioParams& params, const Scenario& scenario) {
  using nlohmann::json;
  const NoiseModel& n = params.noise;
  return json{
      {"frames", params.n_frames},
      {"lanes_per_frame", params.lanes_per_frame},
      {"curvature_range", params.curvature_range},
      {"lane_spacing", params.lane_spacing},
      {"max_grade", params.max_grade},
      {"anchors", params.y_anchors.size()},
      {"camera", to_json(params.camera)},
      {"noise", {{"sigma_w0", n.sigma_w0}, {"sigma_w_slope", n.sigma_w_slope},
                 {"sigma_h0", n.sigma_h0}, {"sigma_h_slope", n.sigma_h_slope}, {"seed", n.seed}}},
      {"emit_pred", params.emit_pred},
      {"emit_curves", params.emit_curves},
      {"curve_frames", scenario.curve_frames},
      {"noise_points", scenario.stats.points},
      {"mean_abs_lateral", scenario.stats.mean_abs_lateral},
      {"rms_lateral", scenario.stats.rms_lateral},
      {"mean_abs_vertical", scenario.stats.mean_abs_vertical},
      {"rms_vertical", scenario.stats.rms_vertical},
  };
}

}  // namespace lanekit

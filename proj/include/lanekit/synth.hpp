#pragma once

#include "lanekit/frame_io.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace lanekit {

/// Depth-dependent Gaussian observation noise: sigma(y) = sigma0 + slope * y.
struct NoiseModel {
  double sigma_w0 = 0.0;
  double sigma_w_slope = 0.0;
  double sigma_h0 = 0.0;
  double sigma_h_slope = 0.0;
  std::uint64_t seed = 42;

  double sigma_w(double y) const { return sigma_w0 + sigma_w_slope * y; }
  double sigma_h(double y) const { return sigma_h0 + sigma_h_slope * y; }
};

/// Throws kInvalidArgument on a negative or non-finite sigma parameter.
void validate(const NoiseModel& noise);

struct ScenarioParams {
  int n_frames = 100;
  int lanes_per_frame = 4;
  /// Quadratic coefficient c2 drawn from [lo, hi]; lanes are
  /// x = offset + c1 y + c2 y^2 + c3 y^3.
  std::array<double, 2> curvature_range{-1e-3, 1e-3};
  double lane_spacing = 3.5;
  /// Grade drawn from [-g, g] for z = g y + g2 y^2; zero gives flat lanes.
  double max_grade = 0.02;
  bool emit_pred = true;
  /// Attach fitted front-view curves to every lane.
  bool emit_curves = false;
  NoiseModel noise;
  CameraModel camera;
  std::vector<double> y_anchors = SampleGrid::default_anchors();
};

void validate(const ScenarioParams& params);

/// Statistics of the noise actually injected, over every prediction point.
struct NoiseStats {
  long long points = 0;
  double mean_abs_lateral = 0.0;
  double rms_lateral = 0.0;
  double mean_abs_vertical = 0.0;
  double rms_vertical = 0.0;
};

struct Scenario {
  std::vector<FrameFileRecord> gt;
  std::optional<std::vector<FrameFileRecord>> pred;
  NoiseStats stats;
  int curve_frames = 0;  ///< frames that received curves
};

/// Deterministic in (params, noise.seed). Prediction points are the GT
/// points displaced by N(0, sigma_w(y)) along the in-plane normal to the
/// lane heading and by N(0, sigma_h(y)) along z. Predictions carry scores
/// of 1, visibility probabilities of 1 and per-segment uncertainties
/// lambda = 2 sigma at the segment midpoint (floored at 0.01).
Scenario generate_scenario(const ScenarioParams& params);

/// Parameters, counts and injected-noise statistics.
nlohmann::json scenario_manifest(const ScenarioParams& params, const Scenario& scenario);

}  // namespace lanekit

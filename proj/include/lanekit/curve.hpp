#pragma once

#include "lanekit/camera.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace lanekit {

/// Shape of u = f(v) used by Curve2D.
///
/// kRoadProjection: u = r1/(v-r2)^2 + r3/(v-r2) + r4 + b'v + b''. r2 is the
///   horizon row; this is the image of a cubic ground-plane lane seen by a
///   level pinhole camera.
/// kPoly3: u = r1 + r2 v + r3 v^2 + r4 v^3 + b'v + b''. Analytically simple,
///   used for testing.
enum class CurveForm { kRoadProjection, kPoly3 };

/// Front-view lane curve. `rho` is shared between the lanes of a frame,
/// the biases and vertical bounds are per lane.
struct Curve2D {
  std::array<double, 4> rho{0.0, 0.0, 0.0, 0.0};
  double beta_prime = 0.0;
  double beta_dprime = 0.0;
  double v_low = 0.0;
  double v_up = 0.0;
  double confidence = 1.0;
};

void validate(const Curve2D& curve, const ImageSize& image);

inline constexpr double kDenominatorEps = 1e-6;

/// Throws kSingularRow when |v - rho[1]| < kDenominatorEps (road-projection form).
double curve_eval(const Curve2D& curve, double v, CurveForm form = CurveForm::kRoadProjection);

/// Sampling configuration shared by curves and point anchors.
struct SampleGrid {
  int j_prime = 20;
  std::vector<double> y_anchors = default_anchors();
  int n_interp = 100;

  /// 20 anchors evenly spaced over [3, 103] m.
  static std::vector<double> default_anchors();
};

void validate(const SampleGrid& grid);

/// Row of the j-th curve sample: j * H / J'. Rows cover [0, H).
double sample_row(const SampleGrid& grid, const ImageSize& image, int j);

struct CurveSample {
  double u = kInvalidColumn;
  double v = 0.0;
  bool valid = false;

  static constexpr double kInvalidColumn = -1.0;
};

/// True when v lies in [v_low, v_up] and the curve column lies in [0, W).
/// Singular rows are invalid.
bool sample_valid(const Curve2D& curve, double v, const ImageSize& image,
                  CurveForm form = CurveForm::kRoadProjection);

/// One sample per grid row. Invalid samples carry CurveSample::kInvalidColumn.
std::vector<CurveSample> sample_curve(const Curve2D& curve, const CameraModel& camera,
                                      const SampleGrid& grid,
                                      CurveForm form = CurveForm::kRoadProjection);

struct CurveFitOptions {
  CurveForm form = CurveForm::kRoadProjection;
  int iterations = 10;
};

struct CurveFitResult {
  std::vector<Curve2D> curves;
  std::vector<double> lane_rms;         ///< per lane, pixels
  double residual_rms = 0.0;            ///< over all points, pixels
  std::vector<double> residual_history; ///< RMS after each iteration
};

using Pixel = Eigen::Vector2d;  ///< (u, v)

/// Fit one frame's lanes with shared curvature and per-lane biases.
///
/// rho[3] is pinned to zero: it is collinear with every lane's b''.
/// For the road-projection form every other parameter is linear given the
/// horizon row rho[1], so the fit minimizes the projected residual over the
/// horizon alone: a dense log-spaced scan, Brent refinement of the best
/// local minima, then line-searched Gauss-Newton steps. The residual never
/// increases.
///
/// Throws kUnderdetermined if any lane has fewer than 4 points or the frame
/// has fewer points than linear parameters.
CurveFitResult fit_curves(std::span<const std::vector<Pixel>> lanes, const ImageSize& image,
                          const CurveFitOptions& options = {});

}  // namespace lanekit

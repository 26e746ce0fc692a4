#include "lanekit/curve.hpp"

#include "lanekit/error.hpp"

#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lanekit {

void validate(const Curve2D& curve, const ImageSize& image) {
  if (!(curve.v_low >= 0.0 && curve.v_low < curve.v_up &&
        curve.v_up <= static_cast<double>(image.height))) {
    throw LaneError(ErrorCode::kInvalidArgument, "curve bounds must satisfy 0 <= v_low < v_up <= H");
  }
  if (!(curve.confidence >= 0.0 && curve.confidence <= 1.0)) {
    throw LaneError(ErrorCode::kInvalidArgument, "curve confidence outside [0,1]");
  }
}

double curve_eval(const Curve2D& curve, double v, CurveForm form) {
  const auto& r = curve.rho;
  if (form == CurveForm::kPoly3) {
    return r[0] + v * (r[1] + v * (r[2] + v * r[3])) + curve.beta_prime * v + curve.beta_dprime;
  }
  const double d = v - r[1];
  if (std::abs(d) < kDenominatorEps) {
    throw LaneError(ErrorCode::kSingularRow, "row " + std::to_string(v) + " hits the curve pole");
  }
  return r[0] / (d * d) + r[2] / d + r[3] + curve.beta_prime * v + curve.beta_dprime;
}

std::vector<double> SampleGrid::default_anchors() {
  std::vector<double> ys(20);
  for (int j = 0; j < 20; ++j) ys[static_cast<std::size_t>(j)] = 3.0 + 100.0 * j / 19.0;
  return ys;
}

void validate(const SampleGrid& grid) {
  if (grid.j_prime < 2) throw LaneError(ErrorCode::kInvalidArgument, "j_prime must be >= 2");
  if (grid.n_interp < 2) throw LaneError(ErrorCode::kInvalidArgument, "n_interp must be >= 2");
  for (std::size_t i = 1; i < grid.y_anchors.size(); ++i) {
    if (!(grid.y_anchors[i] > grid.y_anchors[i - 1])) {
      throw LaneError(ErrorCode::kInvalidArgument, "y anchors must be strictly increasing");
    }
  }
}

double sample_row(const SampleGrid& grid, const ImageSize& image, int j) {
  return static_cast<double>(j) * static_cast<double>(image.height) / grid.j_prime;
}

bool sample_valid(const Curve2D& curve, double v, const ImageSize& image, CurveForm form) {
  if (v < curve.v_low || v > curve.v_up) return false;
  double u = 0.0;
  try {
    u = curve_eval(curve, v, form);
  } catch (const LaneError&) {
    return false;
  }
  return u >= 0.0 && u < static_cast<double>(image.width);
}

std::vector<CurveSample> sample_curve(const Curve2D& curve, const CameraModel& camera,
                                      const SampleGrid& grid, CurveForm form) {
  std::vector<CurveSample> out(static_cast<std::size_t>(grid.j_prime));
  for (int j = 0; j < grid.j_prime; ++j) {
    auto& s = out[static_cast<std::size_t>(j)];
    s.v = sample_row(grid, camera.image_size, j);
    if (sample_valid(curve, s.v, camera.image_size, form)) {
      s.u = curve_eval(curve, s.v, form);
      s.valid = true;
    }
  }
  return out;
}

namespace {

// Linear part of the fit for a fixed horizon row. Columns are
// [shared curvature terms | b'_0 b''_0 | b'_1 b''_1 | ...].
struct LinearFit {
  Eigen::VectorXd params;
  Eigen::VectorXd residual;  // observed u minus model u
  double sse = std::numeric_limits<double>::infinity();
};

class FrameProblem {
 public:
  FrameProblem(std::span<const std::vector<Pixel>> lanes, CurveForm form) : form_(form) {
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      for (const auto& p : lanes[k]) {
        u_.push_back(p.x());
        v_.push_back(p.y());
        lane_of_.push_back(static_cast<int>(k));
      }
    }
    num_lanes_ = static_cast<int>(lanes.size());
  }

  int rows() const { return static_cast<int>(u_.size()); }
  int cols() const { return 2 + 2 * num_lanes_; }
  double min_v() const { return *std::min_element(v_.begin(), v_.end()); }

  Eigen::MatrixXd design(double horizon) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows(), cols());
    for (int i = 0; i < rows(); ++i) {
      const double v = v_[static_cast<std::size_t>(i)];
      if (form_ == CurveForm::kRoadProjection) {
        const double d = v - horizon;
        a(i, 0) = 1.0 / (d * d);
        a(i, 1) = 1.0 / d;
      } else {
        a(i, 0) = v * v;
        a(i, 1) = v * v * v;
      }
      const int k = lane_of_[static_cast<std::size_t>(i)];
      a(i, 2 + 2 * k) = v;
      a(i, 3 + 2 * k) = 1.0;
    }
    return a;
  }

  LinearFit solve(double horizon) const {
    const Eigen::MatrixXd a = design(horizon);
    const Eigen::Map<const Eigen::VectorXd> b(u_.data(), rows());
    // Column equilibration keeps pixel-scale and 1/d^2-scale columns comparable.
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
      if (!(scale(c) > 0.0)) scale(c) = 1.0;
    }
    const Eigen::MatrixXd scaled = a * scale.cwiseInverse().asDiagonal();
    LinearFit fit;
    fit.params = scaled.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
    fit.residual = b - a * fit.params;
    fit.sse = fit.residual.squaredNorm();
    if (!std::isfinite(fit.sse)) fit.sse = std::numeric_limits<double>::infinity();
    return fit;
  }

  Curve2D curve(const LinearFit& fit, double horizon, int lane) const {
    Curve2D c;
    if (form_ == CurveForm::kRoadProjection) {
      c.rho = {fit.params(0), horizon, fit.params(1), 0.0};
    } else {
      c.rho = {0.0, 0.0, fit.params(0), fit.params(1)};
    }
    c.beta_prime = fit.params(2 + 2 * lane);
    c.beta_dprime = fit.params(3 + 2 * lane);
    c.v_low = std::numeric_limits<double>::infinity();
    c.v_up = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows(); ++i) {
      if (lane_of_[static_cast<std::size_t>(i)] != lane) continue;
      c.v_low = std::min(c.v_low, v_[static_cast<std::size_t>(i)]);
      c.v_up = std::max(c.v_up, v_[static_cast<std::size_t>(i)]);
    }
    c.confidence = 1.0;
    return c;
  }

  std::vector<double> lane_rms(const LinearFit& fit) const {
    std::vector<double> sse(static_cast<std::size_t>(num_lanes_), 0.0);
    std::vector<int> count(static_cast<std::size_t>(num_lanes_), 0);
    for (int i = 0; i < rows(); ++i) {
      const auto k = static_cast<std::size_t>(lane_of_[static_cast<std::size_t>(i)]);
      sse[k] += fit.residual(i) * fit.residual(i);
      ++count[k];
    }
    for (std::size_t k = 0; k < sse.size(); ++k) sse[k] = std::sqrt(sse[k] / count[k]);
    return sse;
  }

 private:
  CurveForm form_;
  std::vector<double> u_, v_;
  std::vector<int> lane_of_;
  int num_lanes_ = 0;
};

}  // namespace

CurveFitResult fit_curves(std::span<const std::vector<Pixel>> lanes, const ImageSize& image,
                          const CurveFitOptions& options) {
  if (lanes.empty()) throw LaneError(ErrorCode::kUnderdetermined, "no lanes to fit");
  for (std::size_t k = 0; k < lanes.size(); ++k) {
    if (lanes[k].size() < 4) {
      throw LaneError(ErrorCode::kUnderdetermined,
                      "lane " + std::to_string(k) + " has " + std::to_string(lanes[k].size()) +
                          " points, need at least 4");
    }
    for (const auto& p : lanes[k]) {
      if (!(p.x() >= 0.0 && p.x() < image.width && p.y() >= 0.0 && p.y() <= image.height)) {
        throw LaneError(ErrorCode::kInvalidArgument,
                        "lane " + std::to_string(k) + " has a point outside the image");
      }
    }
  }

  const FrameProblem problem(lanes, options.form);
  if (problem.rows() < problem.cols()) {
    throw LaneError(ErrorCode::kUnderdetermined,
                    std::to_string(problem.rows()) + " points for " +
                        std::to_string(problem.cols()) + " parameters");
  }

  const auto rms = [&](double sse) { return std::sqrt(sse / problem.rows()); };
  CurveFitResult result;
  double horizon = 0.0;
  LinearFit fit;

  if (options.form == CurveForm::kPoly3) {
    fit = problem.solve(0.0);
    result.residual_history.push_back(rms(fit.sse));
  } else {
    // The pole must stay above every observed row.
    const double ceiling = problem.min_v() - kDenominatorEps;
    const double span = std::max(1.0, static_cast<double>(image.height));

    // Scan over the pole distance, log-spaced from 0.5 px to 40 H. The
    // residual has narrow basins, so the scan is dense and the best few
    // local minima are each refined with Brent's method.
    constexpr int kScan = 1024;
    constexpr int kRefine = 4;
    const auto scan_dist = [&](int s) {
      return 0.5 * std::pow(80.0 * span, static_cast<double>(s) / (kScan - 1));
    };
    std::vector<double> scan_sse(kScan);
    for (int s = 0; s < kScan; ++s) scan_sse[static_cast<std::size_t>(s)] = problem.solve(problem.min_v() - scan_dist(s)).sse;

    std::vector<int> minima;
    for (int s = 0; s < kScan; ++s) {
      const double here = scan_sse[static_cast<std::size_t>(s)];
      const bool left = s == 0 || here <= scan_sse[static_cast<std::size_t>(s - 1)];
      const bool right = s == kScan - 1 || here < scan_sse[static_cast<std::size_t>(s + 1)];
      if (left && right && std::isfinite(here)) minima.push_back(s);
    }
    std::stable_sort(minima.begin(), minima.end(), [&](int a, int b) {
      return scan_sse[static_cast<std::size_t>(a)] < scan_sse[static_cast<std::size_t>(b)];
    });
    if (minima.size() > kRefine) minima.resize(kRefine);

    for (const int s : minima) {
      const double h_scan = problem.min_v() - scan_dist(s);
      if (scan_sse[static_cast<std::size_t>(s)] < fit.sse) {
        fit = problem.solve(h_scan);
        horizon = h_scan;
      }
      const double log_lo = std::log(scan_dist(std::max(s - 1, 0)));
      const double log_hi = std::log(scan_dist(std::min(s + 1, kScan - 1)));
      const auto [log_best, sse_best] = boost::math::tools::brent_find_minima(
          [&](double t) { return problem.solve(problem.min_v() - std::exp(t)).sse; }, log_lo, log_hi,
          std::numeric_limits<double>::digits / 2);
      if (sse_best < fit.sse) {
        horizon = problem.min_v() - std::exp(log_best);
        fit = problem.solve(horizon);
      }
    }

    for (int it = 0; it < options.iterations; ++it) {
      // Variable-projection Gauss-Newton step on the horizon row, with the
      // Jacobian of the projected residual taken by central differences.
      const double step = 1e-4 * std::max(1.0, std::abs(problem.min_v() - horizon));
      const double lo = horizon - step;
      const double hi = std::min(horizon + step, ceiling);
      const LinearFit f_lo = problem.solve(lo);
      const LinearFit f_hi = problem.solve(hi);
      const Eigen::VectorXd jac = (f_hi.residual - f_lo.residual) / (hi - lo);
      const double jj = jac.squaredNorm();

      if (jj > 0.0 && std::isfinite(jj)) {
        double delta = -jac.dot(fit.residual) / jj;
        for (int halving = 0; halving < 40; ++halving, delta *= 0.5) {
          const double h = std::min(horizon + delta, ceiling);
          LinearFit candidate = problem.solve(h);
          if (candidate.sse < fit.sse) {
            fit = std::move(candidate);
            horizon = h;
            break;
          }
        }
      }
      result.residual_history.push_back(rms(fit.sse));
    }
  }

  result.residual_rms = rms(fit.sse);
  result.lane_rms = problem.lane_rms(fit);
  for (int k = 0; k < static_cast<int>(lanes.size()); ++k) {
    result.curves.push_back(problem.curve(fit, horizon, k));
  }
  return result;
}

}  // namespace lanekit

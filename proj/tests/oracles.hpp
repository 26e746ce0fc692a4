#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code under test except for plain data types.

#include "lanekit/gaussian.hpp"
#include "lanekit/lane.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using lanekit::Polyline3;
using lanekit::Vec3;

/// O(N^2) directed mean/max nearest distance. Same per-pair formula and
/// summation order as any faithful implementation.
struct Directed {
  double mean = 0.0;
  double max = 0.0;
};

inline Directed directed(std::span<const Vec3> from, std::span<const Vec3> to) {
  Directed out;
  if (from.empty()) return out;
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) {
      const double dx = p.x() - q.x();
      const double dy = p.y() - q.y();
      const double dz = p.z() - q.z();
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) best = d2;
    }
    const double d = std::sqrt(best);
    sum += d;
    out.max = std::max(out.max, d);
  }
  out.mean = sum / static_cast<double>(from.size());
  return out;
}

/// Exhaustive minimum over all injective assignments of min(n, m) pairs.
/// Returns +inf when every assignment uses an infinite entry.
inline double brute_force_assignment(const Eigen::MatrixXd& c) {
  const bool transpose = c.rows() > c.cols();
  const Eigen::MatrixXd m = transpose ? Eigen::MatrixXd(c.transpose()) : c;
  const int n = static_cast<int>(m.rows());
  const int k = static_cast<int>(m.cols());
  std::vector<int> cols(static_cast<std::size_t>(k));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += m(i, cols[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Covariance and mean as plain Eigen objects, built from an explicit
/// Rz * Rx product rather than the printed matrix.
struct Gaussian3 {
  Eigen::Vector3d mu;
  Eigen::Matrix3d sigma;
};

inline Eigen::Matrix3d rz(double t) {
  Eigen::Matrix3d r;
  r << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
  return r;
}

inline Eigen::Matrix3d rx(double t) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t);
  return r;
}

inline Gaussian3 to_gaussian(const lanekit::SegmentGaussian& g) {
  const Eigen::Matrix3d r = rz(g.theta_z) * rx(g.theta_x);
  const Eigen::Vector3d s(g.lambda_l / 2, g.lambda_w / 2, g.lambda_h / 2);
  return {g.mu, r * s.cwiseAbs2().asDiagonal() * r.transpose()};
}

/// E_a[ln a(x) - ln b(x)] by sampling from a.
inline double monte_carlo_kl(const Gaussian3& a, const Gaussian3& b, int samples, std::uint64_t seed) {
  const Eigen::LLT<Eigen::Matrix3d> la(a.sigma);
  const Eigen::LLT<Eigen::Matrix3d> lb(b.sigma);
  const Eigen::Matrix3d L = la.matrixL();
  const double log_det_a = 2.0 * L.diagonal().array().log().sum();
  const Eigen::Matrix3d Lb = lb.matrixL();
  const double log_det_b = 2.0 * Lb.diagonal().array().log().sum();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Vector3d z(n01(rng), n01(rng), n01(rng));
    const Eigen::Vector3d x = a.mu + L * z;
    const double qa = z.squaredNorm();
    const Eigen::Vector3d db = lb.matrixL().solve(x - b.mu);
    const double qb = db.squaredNorm();
    sum += 0.5 * (qb - qa) + 0.5 * (log_det_b - log_det_a);
  }
  return sum / samples;
}

/// Area of the intersection of two axis-aligned rectangles.
inline double rect_overlap(double ax0, double ax1, double ay0, double ay1, double bx0, double bx1,
                           double by0, double by1) {
  const double w = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double h = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  return w * h;
}

/// IoU of two vertical strokes x = xa and x = xb over y in [y0, y1], width w
/// (flat ends; end caps are excluded).
inline double stroke_iou(double xa, double xb, double y0, double y1, double w) {
  const double area = w * (y1 - y0);
  const double inter = rect_overlap(xa - w / 2, xa + w / 2, y0, y1, xb - w / 2, xb + w / 2, y0, y1);
  return inter / (2.0 * area - inter);
}

/// A smooth random lane sampled at `n` increasing y values.
inline Polyline3 random_lane(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double x0 = 5.0 * u(rng);
  const double c1 = 0.05 * u(rng);
  const double c2 = 2e-3 * u(rng);
  const double z1 = 0.02 * u(rng);
  const double y0 = 3.0 + 2.0 * (u(rng) + 1.0);
  const double len = 30.0 + 35.0 * (u(rng) + 1.0);
  Polyline3 out;
  for (int i = 0; i < n; ++i) {
    const double y = y0 + len * i / (n - 1);
    out.emplace_back(x0 + c1 * y + c2 * y * y, y, z1 * y);
  }
  return out;
}

}  // namespace oracle

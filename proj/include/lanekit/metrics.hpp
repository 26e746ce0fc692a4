#pragma once

#include "lanekit/lane.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lanekit {

enum class Protocol { kOnce, kBcd, kMbd, kOpenLane };

std::string_view to_string(Protocol p);
/// Throws kConfigError on unknown names.
Protocol parse_protocol(std::string_view name);

/// How per-pair worst-case distances are aggregated into the MBD statistic.
enum class MbdVariant {
  kPairMaxMean,      ///< symmetric Hausdorff per pair, mean over pairs
  kDatasetMax,       ///< symmetric Hausdorff per pair, max over pairs
  kMeanDirectedMax,  ///< mean of the two directed maxima per pair, mean over pairs
};

std::string_view to_string(MbdVariant v);
MbdVariant parse_mbd_variant(std::string_view name);

struct EvalConfig {
  double tau_cd = 0.3;   ///< unilateral CD threshold, m
  double tau_iou = 0.3;  ///< BEV IoU threshold
  double tau_bcd = 0.3;  ///< bidirectional CD threshold, m
  double lane_width = 0.3;
  double bev_resolution = 0.05;
  int n_interp = 100;
  MbdVariant mbd_variant = MbdVariant::kPairMaxMean;
  unsigned threads = 1;  ///< 0 = all cores; results do not depend on it
};

struct PointwiseConfig {
  double tau_dist = 1.5;
  double tp_fraction = 0.75;
  std::array<double, 2> near_range{0.0, 40.0};  ///< [lo, hi)
  std::array<double, 2> far_range{40.0, 100.0}; ///< [lo, hi]
  double cost_cap_factor = 1.5;  ///< per-anchor matching cost cap, in units of tau_dist
  std::vector<double> y_anchors = default_anchors();
  unsigned threads = 1;

  /// 100 anchors evenly spaced over [3, 103] m.
  static std::vector<double> default_anchors();
};

void validate(const EvalConfig& config);
void validate(const PointwiseConfig& config);

/// Ground truth and predictions of one frame.
struct EvalFrame {
  std::string frame_id;
  std::vector<Lane3D> gt;
  std::vector<Lane3D> pred;
};

struct PairError {
  int gt = -1;
  int pred = -1;
  double value = 0.0;
};

struct FrameMetrics {
  std::string frame_id;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<PairError> pairs;  ///< protocol's per-pair error for counted pairs
};

struct MetricReport {
  Protocol protocol = Protocol::kBcd;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::string error_name;             ///< "cde", "mean_bcd", "mbd"; empty for openlane
  std::optional<double> error_value;  ///< absent when no pair qualifies
  /// Named secondary statistics, e.g. x_near; absent entries mean "no data".
  std::map<std::string, std::optional<double>> extra;
  std::vector<FrameMetrics> per_frame;
  std::string ordering_hash;  ///< FNV-1a of frame ids and prediction order
  double tau = 0.0;           ///< the protocol's distance threshold
};

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); each 0 when undefined.
void finalize_counts(MetricReport& report);

std::string ordering_hash(std::span<const EvalFrame> frames);

/// Compensated (Neumaier) sum.
class StableSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// --- Chamfer-based protocols -------------------------------------------------

/// TP/FP from the greedy bidirectional selection, FN = GT - TP.
/// error_value = mean bidirectional CD over TP pairs.
MetricReport bcd_report(std::span<const EvalFrame> frames, const EvalConfig& config);

/// Hungarian on BEV IoU; a matched prediction is a TP iff IoU > tau_iou and
/// unilateral CD < tau_cd. error_value = CDE, mean unilateral CD over TPs.
MetricReport once_report(std::span<const EvalFrame> frames, const EvalConfig& config);

/// IoU matching as in once_report; pairs with IoU > tau_iou count as
/// matched. error_value = MBD aggregated per config.mbd_variant.
MetricReport mbd_report(std::span<const EvalFrame> frames, const EvalConfig& config);

// --- Pointwise protocol -------------------------------------------------------

MetricReport openlane_report(std::span<const EvalFrame> frames, const PointwiseConfig& config);

// --- Sweeps ------------------------------------------------------------------

struct SweepRow {
  double tau = 0.0;
  MetricReport report;
};

/// One report per threshold. bcd varies tau_bcd, once varies tau_cd,
/// openlane varies tau_dist. mbd has no distance threshold (kConfigError).
/// Expensive per-frame quantities are computed once and reused, through the
/// same code path the standalone reports use.
std::vector<SweepRow> threshold_sweep(std::span<const EvalFrame> frames, std::span<const double> taus,
                                      Protocol protocol, const EvalConfig& eval,
                                      const PointwiseConfig& pointwise);

/// Parses "start:stop:step" or a comma list. Values are start + i*step.
std::vector<double> parse_taus(std::string_view spec);

}  // namespace lanekit

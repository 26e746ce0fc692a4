#include "lanekit/metrics.hpp"

#include "lanekit/bev.hpp"
#include "lanekit/chamfer.hpp"
#include "lanekit/error.hpp"
#include "lanekit/hungarian.hpp"
#include "lanekit/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace lanekit {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kOnce: return "once";
    case Protocol::kBcd: return "bcd";
    case Protocol::kMbd: return "mbd";
    case Protocol::kOpenLane: return "openlane";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "once") return Protocol::kOnce;
  if (name == "bcd") return Protocol::kBcd;
  if (name == "mbd") return Protocol::kMbd;
  if (name == "openlane") return Protocol::kOpenLane;
  throw LaneError(ErrorCode::kConfigError, "unknown protocol '" + std::string(name) + "'");
}

std::string_view to_string(MbdVariant v) {
  switch (v) {
    case MbdVariant::kPairMaxMean: return "pair_max_mean";
    case MbdVariant::kDatasetMax: return "dataset_max";
    case MbdVariant::kMeanDirectedMax: return "mean_directed_max";
  }
  return "unknown";
}

MbdVariant parse_mbd_variant(std::string_view name) {
  if (name == "pair_max_mean") return MbdVariant::kPairMaxMean;
  if (name == "dataset_max") return MbdVariant::kDatasetMax;
  if (name == "mean_directed_max") return MbdVariant::kMeanDirectedMax;
  throw LaneError(ErrorCode::kConfigError, "unknown MBD variant '" + std::string(name) + "'");
}

std::vector<double> PointwiseConfig::default_anchors() {
  std::vector<double> ys(100);
  for (int j = 0; j < 100; ++j) ys[static_cast<std::size_t>(j)] = 3.0 + 100.0 * j / 99.0;
  return ys;
}

void validate(const EvalConfig& c) {
  if (!(c.tau_cd > 0.0 && c.tau_iou > 0.0 && c.tau_bcd > 0.0)) {
    throw LaneError(ErrorCode::kConfigError, "thresholds must be positive");
  }
  if (!(c.lane_width > 0.0 && c.bev_resolution > 0.0)) {
    throw LaneError(ErrorCode::kConfigError, "lane width and BEV resolution must be positive");
  }
  if (c.n_interp < 2) throw LaneError(ErrorCode::kConfigError, "n_interp must be >= 2");
}

void validate(const PointwiseConfig& c) {
  if (!(c.tau_dist > 0.0)) throw LaneError(ErrorCode::kConfigError, "tau_dist must be positive");
  if (!(c.tp_fraction > 0.0 && c.tp_fraction <= 1.0)) {
    throw LaneError(ErrorCode::kConfigError, "tp_fraction must lie in (0, 1]");
  }
  if (!(c.near_range[0] < c.near_range[1] && c.near_range[1] <= c.far_range[0] &&
        c.far_range[0] < c.far_range[1])) {
    throw LaneError(ErrorCode::kConfigError, "near/far ranges must be increasing and disjoint");
  }
  if (!(c.cost_cap_factor > 0.0)) throw LaneError(ErrorCode::kConfigError, "cost cap must be positive");
  if (c.y_anchors.size() < 2) throw LaneError(ErrorCode::kConfigError, "need at least 2 anchors");
  for (std::size_t i = 1; i < c.y_anchors.size(); ++i) {
    if (!(c.y_anchors[i] > c.y_anchors[i - 1])) {
      throw LaneError(ErrorCode::kConfigError, "anchors must be strictly increasing");
    }
  }
}

void finalize_counts(MetricReport& r) {
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
}

void StableSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

std::string ordering_hash(std::span<const EvalFrame> frames) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& f : frames) {
    mix(f.frame_id.data(), f.frame_id.size());
    const std::uint64_t lanes = f.pred.size();
    mix(&lanes, sizeof lanes);
    for (const auto& lane : f.pred) {
      const std::uint64_t n = lane.points.size();
      mix(&n, sizeof n);
      for (const auto& p : lane.points) mix(p.data(), 3 * sizeof(double));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<Polyline3> interpolate_all(std::span<const Lane3D> lanes, int n) {
  std::vector<Polyline3> out;
  out.reserve(lanes.size());
  for (const auto& lane : lanes) out.push_back(interpolate_lane(lane, n));
  return out;
}

MetricReport start_report(Protocol protocol, std::span<const EvalFrame> frames, double tau) {
  MetricReport r;
  r.protocol = protocol;
  r.tau = tau;
  r.ordering_hash = ordering_hash(frames);
  r.per_frame.reserve(frames.size());
  return r;
}

// Sums counts and per-pair errors in frame order.
void accumulate(MetricReport& r, std::vector<FrameMetrics> frames) {
  StableSum errors;
  long long pairs = 0;
  for (auto& f : frames) {
    r.tp += f.tp;
    r.fp += f.fp;
    r.fn += f.fn;
    for (const auto& p : f.pairs) {
      errors.add(p.value);
      ++pairs;
    }
    r.per_frame.push_back(std::move(f));
  }
  finalize_counts(r);
  if (pairs > 0) r.error_value = errors.value() / static_cast<double>(pairs);
}

// --- bcd --------------------------------------------------------------------

struct BcdFrameCache {
  DistanceMatrix distances;
};

std::vector<BcdFrameCache> bcd_caches(std::span<const EvalFrame> frames, const EvalConfig& config) {
  std::vector<BcdFrameCache> caches(frames.size());
  parallel_for(frames.size(), config.threads, [&](std::size_t i) {
    const auto g = interpolate_all(frames[i].gt, config.n_interp);
    const auto p = interpolate_all(frames[i].pred, config.n_interp);
    caches[i].distances = bcd_distance_matrix(g, p);
  });
  return caches;
}

MetricReport bcd_from_caches(std::span<const EvalFrame> frames,
                             std::span<const BcdFrameCache> caches, double tau) {
  MetricReport r = start_report(Protocol::kBcd, frames, tau);
  r.error_name = "mean_bcd";
  std::vector<FrameMetrics> per_frame(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const BcdSelection s = bcd_select(caches[i].distances, tau);
    FrameMetrics& f = per_frame[i];
    f.frame_id = frames[i].frame_id;
    for (std::size_t j = 0; j < s.tp.size(); ++j) {
      f.tp += s.tp[j];
      f.fp += s.fp[j];
      if (s.tp[j] != 0) f.pairs.push_back({s.best_gt[j], static_cast<int>(j), s.best_distance[j]});
    }
    f.fn = static_cast<int>(frames[i].gt.size()) - f.tp;
  }
  accumulate(r, std::move(per_frame));
  return r;
}

// --- IoU-matched protocols ----------------------------------------------------

struct IouMatch {
  int gt = -1;
  int pred = -1;
  double iou = 0.0;
  ChamferPair chamfer;
};

struct IouFrameCache {
  std::vector<IouMatch> matches;  // one per Hungarian pair, GT order
};

IouFrameCache iou_cache(const EvalFrame& frame, const EvalConfig& config) {
  const auto g = interpolate_all(frame.gt, config.n_interp);
  const auto p = interpolate_all(frame.pred, config.n_interp);
  std::vector<BevMask> gm, pm;
  for (const auto& l : g) gm.push_back(rasterize_polyline(l, config.lane_width, config.bev_resolution));
  for (const auto& l : p) pm.push_back(rasterize_polyline(l, config.lane_width, config.bev_resolution));

  Eigen::MatrixXd iou(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      iou(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mask_iou(gm[i], pm[j]);
    }
  }
  const MatchResult match = hungarian((1.0 - iou.array()).matrix());

  IouFrameCache cache;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int j = match.row_to_col[i];
    if (j == MatchResult::kUnmatched) continue;
    IouMatch m;
    m.gt = static_cast<int>(i);
    m.pred = j;
    m.iou = iou(static_cast<Eigen::Index>(i), j);
    m.chamfer = chamfer_pair(g[i], p[static_cast<std::size_t>(j)]);
    cache.matches.push_back(m);
  }
  return cache;
}

std::vector<IouFrameCache> iou_caches(std::span<const EvalFrame> frames, const EvalConfig& config) {
  std::vector<IouFrameCache> caches(frames.size());
  parallel_for(frames.size(), config.threads,
               [&](std::size_t i) { caches[i] = iou_cache(frames[i], config); });
  return caches;
}

MetricReport once_from_caches(std::span<const EvalFrame> frames,
                              std::span<const IouFrameCache> caches, const EvalConfig& config,
                              double tau_cd) {
  MetricReport r = start_report(Protocol::kOnce, frames, tau_cd);
  r.error_name = "cde";
  std::vector<FrameMetrics> per_frame(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameMetrics& f = per_frame[i];
    f.frame_id = frames[i].frame_id;
    for (const auto& m : caches[i].matches) {
      const double cd = m.chamfer.unilateral();
      if (m.iou > config.tau_iou && cd < tau_cd) {
        ++f.tp;
        f.pairs.push_back({m.gt, m.pred, cd});
      }
    }
    f.fp = static_cast<int>(frames[i].pred.size()) - f.tp;
    f.fn = static_cast<int>(frames[i].gt.size()) - f.tp;
  }
  accumulate(r, std::move(per_frame));
  return r;
}

double mbd_pair_value(const ChamferPair& c, MbdVariant variant) {
  if (variant == MbdVariant::kMeanDirectedMax) return 0.5 * (c.gt_to_pred.max + c.pred_to_gt.max);
  return c.hausdorff();
}

MetricReport mbd_from_caches(std::span<const EvalFrame> frames,
                             std::span<const IouFrameCache> caches, const EvalConfig& config) {
  MetricReport r = start_report(Protocol::kMbd, frames, config.tau_iou);
  r.error_name = "mbd";
  std::vector<FrameMetrics> per_frame(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameMetrics& f = per_frame[i];
    f.frame_id = frames[i].frame_id;
    for (const auto& m : caches[i].matches) {
      if (m.iou > config.tau_iou) {
        ++f.tp;
        f.pairs.push_back({m.gt, m.pred, mbd_pair_value(m.chamfer, config.mbd_variant)});
      }
    }
    f.fp = static_cast<int>(frames[i].pred.size()) - f.tp;
    f.fn = static_cast<int>(frames[i].gt.size()) - f.tp;
  }
  accumulate(r, std::move(per_frame));
  if (config.mbd_variant == MbdVariant::kDatasetMax && r.error_value) {
    double worst = 0.0;
    for (const auto& f : r.per_frame) {
      for (const auto& p : f.pairs) worst = std::max(worst, p.value);
    }
    r.error_value = worst;
  }
  return r;
}

}  // namespace

MetricReport bcd_report(std::span<const EvalFrame> frames, const EvalConfig& config) {
  validate(config);
  const auto caches = bcd_caches(frames, config);
  return bcd_from_caches(frames, caches, config.tau_bcd);
}

MetricReport once_report(std::span<const EvalFrame> frames, const EvalConfig& config) {
  validate(config);
  const auto caches = iou_caches(frames, config);
  return once_from_caches(frames, caches, config, config.tau_cd);
}

MetricReport mbd_report(std::span<const EvalFrame> frames, const EvalConfig& config) {
  validate(config);
  const auto caches = iou_caches(frames, config);
  return mbd_from_caches(frames, caches, config);
}

std::vector<SweepRow> threshold_sweep(std::span<const EvalFrame> frames, std::span<const double> taus,
                                      Protocol protocol, const EvalConfig& eval,
                                      const PointwiseConfig& pointwise) {
  if (taus.empty()) throw LaneError(ErrorCode::kConfigError, "empty threshold list");
  for (const double t : taus) {
    if (!(t > 0.0)) throw LaneError(ErrorCode::kConfigError, "thresholds must be positive");
  }
  std::vector<SweepRow> rows;
  rows.reserve(taus.size());
  switch (protocol) {
    case Protocol::kBcd: {
      validate(eval);
      const auto caches = bcd_caches(frames, eval);
      for (const double t : taus) rows.push_back({t, bcd_from_caches(frames, caches, t)});
      break;
    }
    case Protocol::kOnce: {
      validate(eval);
      const auto caches = iou_caches(frames, eval);
      for (const double t : taus) rows.push_back({t, once_from_caches(frames, caches, eval, t)});
      break;
    }
    case Protocol::kOpenLane: {
      for (const double t : taus) {
        PointwiseConfig c = pointwise;
        c.tau_dist = t;
        rows.push_back({t, openlane_report(frames, c)});
      }
      break;
    }
    case Protocol::kMbd:
      throw LaneError(ErrorCode::kConfigError, "the mbd protocol has no distance threshold to sweep");
  }
  return rows;
}

namespace {

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw LaneError(ErrorCode::kConfigError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<double> parse_taus(std::string_view spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto first = spec.find(':');
    const auto second = spec.find(':', first + 1);
    if (second == std::string_view::npos) {
      throw LaneError(ErrorCode::kConfigError, "range must be start:stop:step");
    }
    const double start = parse_double(spec.substr(0, first));
    const double stop = parse_double(spec.substr(first + 1, second - first - 1));
    const double step = parse_double(spec.substr(second + 1));
    if (!(step > 0.0) || !(start > 0.0) || stop < start) {
      throw LaneError(ErrorCode::kConfigError, "empty or invalid threshold range");
    }
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
    // Snap to 12 decimals so 0.05 + 5 * 0.05 is the same double as 0.3.
    for (long long i = 0; i < count; ++i) {
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      const auto token = spec.substr(pos, comma == std::string_view::npos ? spec.size() - pos : comma - pos);
      if (!token.empty()) out.push_back(parse_double(token));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw LaneError(ErrorCode::kConfigError, "empty threshold list");
  for (const double t : out) {
    if (!(t > 0.0)) throw LaneError(ErrorCode::kConfigError, "thresholds must be positive");
  }
  return out;
}

}  // namespace lanekit

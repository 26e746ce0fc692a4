// lanekit command-line front end: eval, sweep, synth, loss, fit.

#include "lanekit/curve.hpp"
#include "lanekit/error.hpp"
#include "lanekit/frame_io.hpp"
#include "lanekit/losses.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lanekit;
using nlohmann::json;

// --- Layered settings: defaults < config file < environment < flags ----------

struct Setting {
  std::string key;
  std::string value;
  std::string help;
  std::string flag_value;
  CLI::Option* option = nullptr;
};

class Settings {
 public:
  void add(CLI::App* app, const std::string& key, const std::string& default_value,
           const std::string& help) {
    Setting& s = items_[key];
    s.key = key;
    s.value = default_value;
    s.help = help;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    s.option = app->add_option(flag, s.flag_value, help)->default_str(default_value);
    order_.push_back(key);
  }

  void add_config_option(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON file of setting overrides (keys as flag names with '_')");
  }

  void resolve() {
    if (!config_path_.empty()) apply_config_file();
    for (auto& [key, s] : items_) {
      std::string env = "LANEKIT_" + key;
      for (auto& c : env) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (const char* v = std::getenv(env.c_str())) s.value = v;
    }
    for (auto& [key, s] : items_) {
      if (s.option->count() > 0) s.value = s.flag_value;
    }
  }

  const std::string& str(const std::string& key) const { return items_.at(key).value; }

  double num(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw LaneError(ErrorCode::kConfigError, key + ": expected a number, got '" + v + "'");
  }

  long long integer(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t used = 0;
      const long long i = std::stoll(v, &used);
      if (used == v.size()) return i;
    } catch (const std::exception&) {
    }
    throw LaneError(ErrorCode::kConfigError, key + ": expected an integer, got '" + v + "'");
  }

  bool boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw LaneError(ErrorCode::kConfigError, key + ": expected true or false, got '" + v + "'");
  }

  std::vector<double> list(const std::string& key, std::size_t expected) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string token;
    while (std::getline(ss, token, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw LaneError(ErrorCode::kConfigError, key + ": bad number '" + token + "'");
      }
    }
    if (expected != 0 && out.size() != expected) {
      throw LaneError(ErrorCode::kConfigError,
                      key + ": expected " + std::to_string(expected) + " comma-separated values");
    }
    return out;
  }

  /// Resolved values, typed where the text is a number or boolean.
  json echo() const {
    json j = json::object();
    for (const auto& [key, s] : items_) {
      const std::string& v = s.value;
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      if (!v.empty() && end == v.c_str() + v.size()) {
        j[key] = d;
      } else if (v == "true" || v == "false") {
        j[key] = v == "true";
      } else {
        j[key] = v;
      }
    }
    return j;
  }

 private:
  void apply_config_file() {
    std::ifstream in(config_path_);
    if (!in) throw LaneError(ErrorCode::kConfigError, "cannot open config " + config_path_);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw LaneError(ErrorCode::kConfigError, config_path_ + ": " + e.what());
    }
    if (!j.is_object()) throw LaneError(ErrorCode::kConfigError, config_path_ + ": expected an object");
    for (const auto& [key, v] : j.items()) {
      const auto it = items_.find(key);
      if (it == items_.end()) throw LaneError(ErrorCode::kConfigError, config_path_ + ": unknown key '" + key + "'");
      if (v.is_string()) {
        it->second.value = v.get<std::string>();
      } else if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) joined += (joined.empty() ? "" : ",") + e.dump();
        it->second.value = joined;
      } else if (v.is_number_integer() || v.is_boolean()) {
        it->second.value = v.dump();
      } else if (v.is_number()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        it->second.value = buf;
      } else {
        throw LaneError(ErrorCode::kConfigError, config_path_ + ": bad value for '" + key + "'");
      }
    }
  }

  std::map<std::string, Setting> items_;
  std::vector<std::string> order_;
  std::string config_path_;
};

// --- Output helpers ----------------------------------------------------------

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "n/a"; }

void print_pairs(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) std::cout << k << std::string(width - k.size(), ' ') << " = " << v << '\n';
}

std::vector<double> anchor_range(const Settings& s, const std::string& key) {
  const auto v = s.list(key, 3);
  const long long n = static_cast<long long>(v[2]);
  if (n < 2 || static_cast<double>(n) != v[2] || !(v[1] > v[0])) {
    throw LaneError(ErrorCode::kConfigError, key + ": expected start,stop,count with count >= 2");
  }
  std::vector<double> out;
  for (long long i = 0; i < n; ++i) out.push_back(v[0] + (v[1] - v[0]) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

// --- Evaluation settings -------------------------------------------------------

void add_eval_settings(CLI::App* app, Settings& s, const std::string& format) {
  s.add(app, "protocol", "bcd", "once | bcd | mbd | openlane");
  s.add(app, "tau_cd", "0.3", "unilateral Chamfer threshold for once, m");
  s.add(app, "tau_iou", "0.3", "BEV IoU threshold for once and mbd");
  s.add(app, "tau_bcd", "0.3", "bidirectional Chamfer threshold for bcd, m");
  s.add(app, "lane_width", "0.3", "BEV rasterization lane width, m");
  s.add(app, "bev_resolution", "0.05", "BEV grid cell size, m");
  s.add(app, "n_interp", "100", "points per lane after arc-length resampling");
  s.add(app, "mbd_variant", "pair_max_mean", "pair_max_mean | dataset_max | mean_directed_max");
  s.add(app, "tau_dist", "1.5", "openlane point distance threshold, m");
  s.add(app, "tp_fraction", "0.75", "openlane fraction of GT anchors within tau_dist for a TP");
  s.add(app, "near_range", "0,40", "openlane near range [lo,hi), m");
  s.add(app, "far_range", "40,100", "openlane far range [lo,hi], m");
  s.add(app, "cost_cap_factor", "1.5", "openlane per-anchor matching cost cap, multiples of tau_dist");
  s.add(app, "pointwise_anchors", "3,103,100", "openlane anchors: start,stop,count (m)");
  s.add(app, "threads", "0", "worker threads, 0 = all cores; output does not depend on it");
  s.add(app, "format", format, "output format: json | csv");
  s.add_config_option(app);
}

struct EvalSettings {
  Protocol protocol;
  EvalConfig eval;
  PointwiseConfig pointwise;
  ReportFormat format;
};

EvalSettings resolve_eval(const Settings& s) {
  EvalSettings out;
  out.protocol = parse_protocol(s.str("protocol"));
  out.eval.tau_cd = s.num("tau_cd");
  out.eval.tau_iou = s.num("tau_iou");
  out.eval.tau_bcd = s.num("tau_bcd");
  out.eval.lane_width = s.num("lane_width");
  out.eval.bev_resolution = s.num("bev_resolution");
  out.eval.n_interp = static_cast<int>(s.integer("n_interp"));
  out.eval.mbd_variant = parse_mbd_variant(s.str("mbd_variant"));
  const long long threads = s.integer("threads");
  if (threads < 0) throw LaneError(ErrorCode::kConfigError, "threads: must be >= 0");
  out.eval.threads = static_cast<unsigned>(threads);
  out.pointwise.tau_dist = s.num("tau_dist");
  out.pointwise.tp_fraction = s.num("tp_fraction");
  const auto near = s.list("near_range", 2);
  const auto far = s.list("far_range", 2);
  out.pointwise.near_range = {near[0], near[1]};
  out.pointwise.far_range = {far[0], far[1]};
  out.pointwise.cost_cap_factor = s.num("cost_cap_factor");
  out.pointwise.y_anchors = anchor_range(s, "pointwise_anchors");
  out.pointwise.threads = out.eval.threads;
  const std::string& f = s.str("format");
  if (f == "json") {
    out.format = ReportFormat::kStructured;
  } else if (f == "csv") {
    out.format = ReportFormat::kCsv;
  } else {
    throw LaneError(ErrorCode::kConfigError, "format: expected json or csv");
  }
  try {
    validate(out.eval);
    validate(out.pointwise);
  } catch (const LaneError& e) {
    if (e.code() == ErrorCode::kConfigError) throw;
    throw LaneError(ErrorCode::kConfigError, e.what());
  }
  return out;
}

std::vector<std::string> eval_assumptions(Protocol p) {
  switch (p) {
    case Protocol::kOnce:
      return {"lanes resampled to n_interp points by arc length",
              "one-to-one matching maximizes BEV IoU",
              "TP iff IoU > tau_iou and unilateral CD < tau_cd",
              "cde is the mean unilateral CD over TPs"};
    case Protocol::kBcd:
      return {"lanes resampled to n_interp points by arc length",
              "greedy selection in prediction order, each GT covered at most once",
              "TP iff bidirectional CD <= tau_bcd",
              "mean_bcd is the mean bidirectional CD over TPs"};
    case Protocol::kMbd:
      return {"lanes resampled to n_interp points by arc length",
              "pairs from IoU matching with IoU > tau_iou",
              "mbd aggregated per mbd_variant"};
    case Protocol::kOpenLane:
      return {"lanes linearly interpolated at pointwise_anchors",
              "matching cost is the mean capped (x, z) distance over anchors visible in either lane",
              "TP iff at least tp_fraction of GT-visible anchors lie within tau_dist"};
  }
  return {};
}

std::vector<EvalFrame> load_eval_frames(const std::string& gt_path, const std::string& pred_path,
                                        unsigned threads) {
  const auto gt = read_frames(gt_path, threads);
  const auto pred = read_frames(pred_path, threads);
  const auto joined = join_frames(gt, pred);
  return to_eval_frames(joined);
}

MetricReport run_protocol(std::span<const EvalFrame> frames, const EvalSettings& e) {
  switch (e.protocol) {
    case Protocol::kOnce: return once_report(frames, e.eval);
    case Protocol::kBcd: return bcd_report(frames, e.eval);
    case Protocol::kMbd: return mbd_report(frames, e.eval);
    case Protocol::kOpenLane: return openlane_report(frames, e.pointwise);
  }
  throw LaneError(ErrorCode::kConfigError, "unknown protocol");
}

void print_report(const MetricReport& r, std::size_t frames) {
  std::vector<std::pair<std::string, std::string>> rows{
      {"protocol", std::string(to_string(r.protocol))},
      {"frames", std::to_string(frames)},
      {"tau", fixed(r.tau, 4)},
      {"tp", std::to_string(r.tp)},
      {"fp", std::to_string(r.fp)},
      {"fn", std::to_string(r.fn)},
      {"precision", fixed(100.0 * r.precision, 2)},
      {"recall", fixed(100.0 * r.recall, 2)},
      {"f1", fixed(100.0 * r.f1, 2)},
  };
  if (!r.error_name.empty()) rows.emplace_back(r.error_name, opt_fixed(r.error_value, 6));
  for (const auto& [k, v] : r.extra) rows.emplace_back(k, opt_fixed(v, 6));
  rows.emplace_back("ordering_hash", r.ordering_hash);
  print_pairs(rows);
}

// --- Commands -------------------------------------------------------------------

struct PathArgs {
  std::string gt, pred, out;
};

int cmd_eval(const Settings& s, const PathArgs& paths) {
  const EvalSettings e = resolve_eval(s);
  const auto frames = load_eval_frames(paths.gt, paths.pred, e.eval.threads);
  const MetricReport r = run_protocol(frames, e);
  if (!paths.out.empty()) {
    ReportContext ctx;
    ctx.config = s.echo();
    ctx.assumptions = eval_assumptions(e.protocol);
    write_report(r, paths.out, e.format, ctx);
  }
  print_report(r, frames.size());
  return 0;
}

int cmd_sweep(const Settings& s, const PathArgs& paths) {
  const EvalSettings e = resolve_eval(s);
  const auto taus = parse_taus(s.str("taus"));
  const auto frames = load_eval_frames(paths.gt, paths.pred, e.eval.threads);
  const auto rows = threshold_sweep(frames, taus, e.protocol, e.eval, e.pointwise);
  if (!paths.out.empty()) {
    ReportContext ctx;
    ctx.config = s.echo();
    ctx.assumptions = eval_assumptions(e.protocol);
    write_sweep(rows, paths.out, e.format, ctx);
  }
  std::cout << sweep_csv(rows);
  return 0;
}

// Built-in camera when `path` is empty.
CameraModel load_camera(const std::string& path) {
  if (path.empty()) return CameraModel{};
  std::ifstream in(path);
  if (!in) throw LaneError(ErrorCode::kIoError, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LaneError(ErrorCode::kParseError, path + ": " + e.what());
  }
  return camera_from_json(j);
}

int cmd_synth(const Settings& s, const std::string& out_dir, bool emit_pred, const std::string& camera_path) {
  ScenarioParams p;
  p.n_frames = static_cast<int>(s.integer("frames"));
  p.lanes_per_frame = static_cast<int>(s.integer("lanes"));
  p.curvature_range = {s.num("curvature_min"), s.num("curvature_max")};
  p.lane_spacing = s.num("lane_spacing");
  p.max_grade = s.num("max_grade");
  p.emit_curves = s.boolean("emit_curves");
  p.emit_pred = emit_pred;
  p.noise.sigma_w0 = s.num("noise_w0");
  p.noise.sigma_w_slope = s.num("noise_w_slope");
  p.noise.sigma_h0 = s.num("noise_h0");
  p.noise.sigma_h_slope = s.num("noise_h_slope");
  const long long seed = s.integer("seed");
  if (seed < 0) throw LaneError(ErrorCode::kConfigError, "seed: must be >= 0");
  p.noise.seed = static_cast<std::uint64_t>(seed);
  p.y_anchors = anchor_range(s, "anchors");
  p.camera = load_camera(camera_path);

  const Scenario sc = generate_scenario(p);
  const std::filesystem::path dir(out_dir);
  write_frames(dir / "gt.jsonl", sc.gt);
  if (sc.pred) write_frames(dir / "pred.jsonl", *sc.pred);
  const json manifest = scenario_manifest(p, sc);
  {
    AtomicWriter w(dir / "manifest.json");
    w.stream() << manifest.dump(2) << '\n';
    w.commit();
  }

  std::vector<std::pair<std::string, std::string>> rows;
  const json flat = manifest.flatten();
  for (const auto& [k, v] : flat.items()) {
    std::string key = k.substr(1);
    std::replace(key.begin(), key.end(), '/', '.');
    rows.emplace_back(key, v.is_string() ? v.get<std::string>() : v.dump());
  }
  rows.emplace_back("gt_file", (dir / "gt.jsonl").string());
  if (sc.pred) rows.emplace_back("pred_file", (dir / "pred.jsonl").string());
  print_pairs(rows);
  return 0;
}

int cmd_loss(const Settings& s, const PathArgs& paths) {
  LossConfig config;
  const auto g = s.list("gammas", 6);
  std::copy(g.begin(), g.end(), config.gamma.begin());
  config.background_weight = s.num("background_weight");
  const std::string& form = s.str("curve_form");
  if (form == "road") {
    config.curve_form = CurveForm::kRoadProjection;
  } else if (form == "poly3") {
    config.curve_form = CurveForm::kPoly3;
  } else {
    throw LaneError(ErrorCode::kConfigError, "curve_form: expected road or poly3");
  }
  const std::string& rot = s.str("rotation");
  if (rot == "printed") {
    config.rotation = RotationConvention::kPrinted;
  } else if (rot == "direction_aligned") {
    config.rotation = RotationConvention::kDirectionAligned;
  } else {
    throw LaneError(ErrorCode::kConfigError, "rotation: expected printed or direction_aligned");
  }
  try {
    validate(config);
  } catch (const LaneError& e) {
    throw LaneError(ErrorCode::kConfigError, e.what());
  }
  SampleGrid grid;
  grid.j_prime = static_cast<int>(s.integer("grid_rows"));
  validate(grid);

  const auto gt = read_frames(paths.gt);
  const auto pred = read_frames(paths.pred);
  const auto frames = join_frames(gt, pred);

  struct Totals {
    StableSum sum;
    int present = 0;
    void add(const std::optional<double>& v) {
      if (!v) return;
      sum.add(*v);
      ++present;
    }
    std::optional<double> value() const { return present > 0 ? std::optional(sum.value()) : std::nullopt; }
  };
  Totals unc, vis, loc, ce, fit, point, curve, total;

  json per_frame = json::array();
  const std::vector<std::string> header{"frame_id", "unc", "vis", "loc", "ce", "fit", "point", "curve", "total"};
  std::vector<std::vector<std::string>> table{header};
  const auto cell = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string("-"); };
  for (const auto& f : frames) {
    const std::vector<LaneRecord> none;
    const auto& p = f.pred_lanes ? *f.pred_lanes : none;
    const LossBreakdown b = loss_total(f.gt_lanes, p, f.camera, grid, config);
    unc.add(b.unc);
    vis.add(b.vis);
    loc.add(b.loc);
    ce.add(b.ce);
    fit.add(b.fit);
    point.add(b.point);
    curve.add(b.curve);
    total.add(b.total);
    table.push_back({f.frame_id, cell(b.unc), cell(b.vis), cell(b.loc), cell(b.ce), cell(b.fit),
                     cell(b.point), cell(b.curve), cell(b.total)});
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    per_frame.push_back({{"frame_id", f.frame_id}, {"unc", opt(b.unc)}, {"vis", b.vis}, {"loc", b.loc},
                         {"ce", opt(b.ce)}, {"fit", opt(b.fit)}, {"point", b.point},
                         {"curve", b.curve}, {"total", b.total},
                         {"matched_on", b.matched_on_curves ? "curves" : "points"}});
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::cout << (c ? "  " : "") << row[c] << std::string(widths[c] - row[c].size(), ' ');
    }
    std::cout << '\n';
  }
  std::cout << '\n';

  std::string gammas;
  for (double x : config.gamma) gammas += (gammas.empty() ? "" : ",") + fixed(x, 2);
  print_pairs({{"gammas", gammas},
               {"frames", std::to_string(frames.size())},
               {"L_unc", opt_fixed(unc.value(), 6)},
               {"L_vis", opt_fixed(vis.value(), 6)},
               {"L_loc", opt_fixed(loc.value(), 6)},
               {"L_ce", opt_fixed(ce.value(), 6)},
               {"L_f", opt_fixed(fit.value(), 6)},
               {"L_point", opt_fixed(point.value(), 6)},
               {"L_curve", opt_fixed(curve.value(), 6)},
               {"L_total", opt_fixed(total.value(), 6)}});

  if (!paths.out.empty()) {
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j{{"format", "lane-loss-report"},
           {"version", kReportSchemaVersion},
           {"config", s.echo()},
           {"totals", {{"unc", opt(unc.value())}, {"vis", opt(vis.value())}, {"loc", opt(loc.value())},
                       {"ce", opt(ce.value())}, {"fit", opt(fit.value())}, {"point", opt(point.value())},
                       {"curve", opt(curve.value())}, {"total", opt(total.value())}}},
           {"per_frame", std::move(per_frame)}};
    AtomicWriter w(paths.out);
    w.stream() << j.dump(2) << '\n';
    w.commit();
  }
  return 0;
}

int cmd_fit(const Settings& s, const std::string& frames_path, const std::string& camera_path,
            const std::string& out_path) {
  CurveFitOptions options;
  const std::string& form = s.str("curve_form");
  if (form == "road") {
    options.form = CurveForm::kRoadProjection;
  } else if (form == "poly3") {
    options.form = CurveForm::kPoly3;
  } else {
    throw LaneError(ErrorCode::kConfigError, "curve_form: expected road or poly3");
  }
  options.iterations = static_cast<int>(s.integer("fit_iterations"));
  if (options.iterations < 0) throw LaneError(ErrorCode::kConfigError, "fit_iterations: must be >= 0");

  const CameraModel camera = load_camera(camera_path);

  std::ifstream in(frames_path);
  if (!in) throw LaneError(ErrorCode::kIoError, "cannot open " + frames_path);
  std::optional<AtomicWriter> writer;
  if (!out_path.empty()) writer.emplace(out_path);

  std::vector<std::pair<std::string, std::string>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw LaneError(ErrorCode::kParseError, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("version") || j["version"] != kFrameSchemaVersion) {
      throw LaneError(ErrorCode::kSchemaVersionMismatch, where + ": expected version " +
                                                             std::to_string(kFrameSchemaVersion));
    }
    if (!j.contains("frame_id") || !j["frame_id"].is_string() || !j.contains("lanes") || !j["lanes"].is_array()) {
      throw LaneError(ErrorCode::kParseError, where + ": frame_id and lanes required");
    }
    std::vector<std::vector<Pixel>> lanes;
    for (std::size_t k = 0; k < j["lanes"].size(); ++k) {
      const json& l = j["lanes"][k];
      const std::string lp = where + ": lanes[" + std::to_string(k) + "]";
      if (!l.is_array()) throw LaneError(ErrorCode::kParseError, lp + ": expected an array of [u, v]");
      std::vector<Pixel> pts;
      for (const json& p : l) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw LaneError(ErrorCode::kParseError, lp + ": expected [u, v] pairs");
        }
        pts.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      lanes.push_back(std::move(pts));
    }
    const std::string id = j["frame_id"].get<std::string>();
    const CurveFitResult fit = fit_curves(lanes, camera.image_size, options);

    json curves = json::array();
    for (const auto& c : fit.curves) curves.push_back(to_json(c));
    if (writer) {
      writer->stream() << json{{"version", kFrameSchemaVersion}, {"frame_id", id}, {"curves", curves},
                               {"lane_rms", fit.lane_rms}, {"residual_rms", fit.residual_rms}}
                              .dump()
                       << '\n';
    }
    const auto& rho = fit.curves.front().rho;
    rows.emplace_back(id + ".rho", fixed(rho[0], 6) + "," + fixed(rho[1], 6) + "," + fixed(rho[2], 6) + "," +
                                       fixed(rho[3], 6));
    for (std::size_t k = 0; k < fit.curves.size(); ++k) {
      const std::string p = id + ".lane" + std::to_string(k);
      rows.emplace_back(p + ".beta", fixed(fit.curves[k].beta_prime, 9) + "," + fixed(fit.curves[k].beta_dprime, 6));
      rows.emplace_back(p + ".rms_px", fixed(fit.lane_rms[k], 9));
    }
    rows.emplace_back(id + ".residual_rms_px", fixed(fit.residual_rms, 9));
  }
  if (writer) writer->commit();
  print_pairs(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lanekit: 3D lane evaluation, losses and synthetic data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lanekit 1.0");

  PathArgs paths;

  Settings eval_s;
  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval->add_option("--gt", paths.gt, "ground-truth frame file")->required();
  eval->add_option("--pred", paths.pred, "prediction frame file")->required();
  eval->add_option("--out", paths.out, "report file (omitted: summary only)");
  add_eval_settings(eval, eval_s, "json");

  Settings sweep_s;
  auto* sweep = app.add_subcommand("sweep", "evaluate over a range of distance thresholds");
  sweep->add_option("--gt", paths.gt, "ground-truth frame file")->required();
  sweep->add_option("--pred", paths.pred, "prediction frame file")->required();
  sweep->add_option("--out", paths.out, "sweep file (omitted: stdout only)");
  sweep_s.add(sweep, "taus", "0.05:1.5:0.05", "thresholds: start:stop:step or a comma list");
  add_eval_settings(sweep, sweep_s, "csv");

  Settings synth_s;
  std::string synth_out, synth_camera;
  bool emit_pred = false;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth->add_option("--out", synth_out, "output directory (gt.jsonl, pred.jsonl, manifest.json)")->required();
  synth->add_flag("--emit-pred", emit_pred, "also write noisy predictions");
  synth->add_option("--camera", synth_camera, "camera JSON (default: built-in camera)");
  synth_s.add(synth, "frames", "100", "number of frames");
  synth_s.add(synth, "lanes", "4", "lanes per frame");
  synth_s.add(synth, "curvature_min", "-0.001", "lower bound of the quadratic lane coefficient, 1/m");
  synth_s.add(synth, "curvature_max", "0.001", "upper bound of the quadratic lane coefficient, 1/m");
  synth_s.add(synth, "lane_spacing", "3.5", "lateral lane spacing, m");
  synth_s.add(synth, "max_grade", "0.02", "largest road grade of the vertical profile");
  synth_s.add(synth, "noise_w0", "0", "lateral noise sigma at y = 0, m");
  synth_s.add(synth, "noise_w_slope", "0", "lateral noise growth per meter of depth");
  synth_s.add(synth, "noise_h0", "0", "vertical noise sigma at y = 0, m");
  synth_s.add(synth, "noise_h_slope", "0", "vertical noise growth per meter of depth");
  synth_s.add(synth, "seed", "42", "random seed");
  synth_s.add(synth, "anchors", "3,103,20", "lane point rows: start,stop,count (m)");
  synth_s.add(synth, "emit_curves", "false", "attach fitted front-view curves to every lane");
  synth_s.add_config_option(synth);

  Settings loss_s;
  auto* loss = app.add_subcommand("loss", "compute training losses for predictions");
  loss->add_option("--gt", paths.gt, "ground-truth frame file")->required();
  loss->add_option("--pred", paths.pred, "prediction frame file")->required();
  loss->add_option("--out", paths.out, "loss report file (omitted: stdout only)");
  loss_s.add(loss, "gammas", "0.5,2,10,3,5,2", "loss weights gamma1..gamma6");
  loss_s.add(loss, "background_weight", "1", "classification weight of unmatched predictions");
  loss_s.add(loss, "curve_form", "road", "curve model: road | poly3");
  loss_s.add(loss, "rotation", "printed", "segment rotation: printed | direction_aligned");
  loss_s.add(loss, "grid_rows", "20", "curve sample rows per image");
  loss_s.add_config_option(loss);

  Settings fit_s;
  std::string frame_2d, fit_camera, fit_out;
  auto* fit = app.add_subcommand("fit", "fit front-view curves to 2D lane points");
  fit->add_option("--frame-2d", frame_2d, "2D lane file, one frame per line")->required();
  fit->add_option("--camera", fit_camera, "camera JSON (default: built-in camera)");
  fit->add_option("--out", fit_out, "fitted curve file (omitted: stdout only)");
  fit_s.add(fit, "curve_form", "road", "curve model: road | poly3");
  fit_s.add(fit, "fit_iterations", "10", "horizon refinement iterations");
  fit_s.add_config_option(fit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorCode::kConfigError);
  }

  try {
    if (*eval) {
      eval_s.resolve();
      return cmd_eval(eval_s, paths);
    }
    if (*sweep) {
      sweep_s.resolve();
      return cmd_sweep(sweep_s, paths);
    }
    if (*synth) {
      synth_s.resolve();
      return cmd_synth(synth_s, synth_out, emit_pred, synth_camera);
    }
    if (*loss) {
      loss_s.resolve();
      return cmd_loss(loss_s, paths);
    }
    if (*fit) {
      fit_s.resolve();
      return cmd_fit(fit_s, frame_2d, fit_camera, fit_out);
    }
  } catch (const LaneError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::kIoError);
  }
  return 0;
}

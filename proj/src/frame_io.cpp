#include "lanekit/frame_io.hpp"

#include "lanekit/error.hpp"
#include "lanekit/parallel.hpp"

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace lanekit {

using nlohmann::json;

namespace {

using Value = rapidjson::Value;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw LaneError(ErrorCode::kParseError, path + ": " + message);
}

std::string indexed(const std::string& path, const char* field, std::size_t i) {
  return path + "." + field + "[" + std::to_string(i) + "]";
}

const Value* find(const Value& obj, const char* key) {
  const auto it = obj.FindMember(key);
  return it == obj.MemberEnd() ? nullptr : &it->value;
}

const Value& member(const Value& obj, const char* key, const std::string& path) {
  if (!obj.IsObject()) fail(path, "expected an object");
  const Value* v = find(obj, key);
  if (v == nullptr) fail(path + "." + key, "missing");
  return *v;
}

// Field paths are built lazily: only a failing field pays for its name.
template <class Path>
double number(const Value& j, const Path& path) {
  if (!j.IsNumber()) fail(path(), "expected a number");
  const double v = j.GetDouble();
  if (!std::isfinite(v)) fail(path(), "not finite");
  return v;
}

double field_number(const Value& obj, const char* key, const std::string& path) {
  return number(member(obj, key, path), [&] { return path + "." + key; });
}

int field_integer(const Value& obj, const char* key, const std::string& path) {
  const Value& v = member(obj, key, path);
  if (!v.IsInt()) fail(path + "." + key, "expected an integer");
  return v.GetInt();
}

const Value& array(const Value& j, const std::string& path) {
  if (!j.IsArray()) fail(path, "expected an array");
  return j;
}

CameraModel camera_from_value(const Value& j, const std::string& path) {
  CameraModel c;
  c.fx = field_number(j, "fx", path);
  c.fy = field_number(j, "fy", path);
  c.cx = field_number(j, "cx", path);
  c.cy = field_number(j, "cy", path);
  c.height = field_number(j, "height", path);
  c.pitch = field_number(j, "pitch", path);
  c.image_size.height = field_integer(j, "image_h", path);
  c.image_size.width = field_integer(j, "image_w", path);
  try {
    validate(c);
  } catch (const LaneError& e) {
    fail(path, e.what());
  }
  return c;
}

Curve2D curve_from_value(const Value& j, const std::string& path) {
  Curve2D c;
  const Value& rho = array(member(j, "rho", path), path + ".rho");
  if (rho.Size() != 4) fail(path + ".rho", "expected 4 values");
  for (rapidjson::SizeType t = 0; t < 4; ++t) {
    c.rho[t] = number(rho[t], [&] { return indexed(path, "rho", t); });
  }
  c.beta_prime = field_number(j, "beta_prime", path);
  c.beta_dprime = field_number(j, "beta_dprime", path);
  c.v_low = field_number(j, "v_low", path);
  c.v_up = field_number(j, "v_up", path);
  c.confidence = field_number(j, "confidence", path);
  return c;
}

LaneRecord lane_from_value(const Value& j, const std::string& path) {
  LaneRecord r;
  const Value& pts = array(member(j, "points", path), path + ".points");
  r.lane.points.reserve(pts.Size());
  for (rapidjson::SizeType i = 0; i < pts.Size(); ++i) {
    const Value& p = pts[i];
    if (!p.IsArray() || p.Size() != 3) fail(indexed(path, "points", i), "expected [x, y, z]");
    Vec3 v;
    for (rapidjson::SizeType c = 0; c < 3; ++c) {
      v[c] = number(p[c], [&] { return indexed(path, "points", i) + "[" + std::to_string(c) + "]"; });
    }
    r.lane.points.push_back(v);
  }
  const Value& vis = array(member(j, "visibility", path), path + ".visibility");
  r.lane.visibility.reserve(vis.Size());
  for (rapidjson::SizeType i = 0; i < vis.Size(); ++i) {
    if (!vis[i].IsInt()) fail(indexed(path, "visibility", i), "expected an integer");
    r.lane.visibility.push_back(vis[i].GetInt());
  }
  if (const Value* v = find(j, "score"); v != nullptr && !v->IsNull()) {
    r.lane.score = number(*v, [&] { return path + ".score"; });
  }
  if (const Value* v = find(j, "vis_prob")) {
    const Value& probs = array(*v, path + ".vis_prob");
    std::vector<double> values;
    values.reserve(probs.Size());
    for (rapidjson::SizeType i = 0; i < probs.Size(); ++i) {
      values.push_back(number(probs[i], [&] { return indexed(path, "vis_prob", i); }));
    }
    if (values.size() != r.lane.points.size()) fail(path + ".vis_prob", "one value per point expected");
    r.vis_prob = std::move(values);
  }
  if (const Value* v = find(j, "uncertainty")) {
    const Value& unc = array(*v, path + ".uncertainty");
    std::vector<std::array<double, 2>> values;
    values.reserve(unc.Size());
    for (rapidjson::SizeType i = 0; i < unc.Size(); ++i) {
      if (!unc[i].IsArray() || unc[i].Size() != 2) fail(indexed(path, "uncertainty", i), "expected [lambda_w, lambda_h]");
      const auto at = [&](rapidjson::SizeType c) {
        return number(unc[i][c], [&] { return indexed(path, "uncertainty", i) + "[" + std::to_string(c) + "]"; });
      };
      values.push_back({at(0), at(1)});
    }
    if (values.size() + 1 != r.lane.points.size()) fail(path + ".uncertainty", "one pair per segment expected");
    r.uncertainty = std::move(values);
  }
  if (const Value* v = find(j, "curve")) r.curve = curve_from_value(*v, path + ".curve");

  try {
    validate(r.lane);
  } catch (const LaneError& e) {
    fail(path, e.what());
  }
  return r;
}

rapidjson::Document parse_document(std::string_view text, const std::string& where) {
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.data(), text.size());
  if (doc.HasParseError()) {
    fail(where, std::string("malformed record (") + rapidjson::GetParseError_En(doc.GetParseError()) +
                    " at offset " + std::to_string(doc.GetErrorOffset()) + ")");
  }
  return doc;
}

}  // namespace

json to_json(const CameraModel& c) {
  return json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"height", c.height},
              {"pitch", c.pitch}, {"image_h", c.image_size.height}, {"image_w", c.image_size.width}};
}

json to_json(const Curve2D& c) {
  return json{{"rho", c.rho},       {"beta_prime", c.beta_prime}, {"beta_dprime", c.beta_dprime},
              {"v_low", c.v_low},   {"v_up", c.v_up},             {"confidence", c.confidence}};
}

json to_json(const LaneRecord& r) {
  json pts = json::array();
  for (const auto& p : r.lane.points) pts.push_back({p.x(), p.y(), p.z()});
  json j{{"points", std::move(pts)}, {"visibility", r.lane.visibility}};
  if (r.lane.score) j["score"] = *r.lane.score;
  if (r.vis_prob) j["vis_prob"] = *r.vis_prob;
  if (r.uncertainty) j["uncertainty"] = *r.uncertainty;
  if (r.curve) j["curve"] = to_json(*r.curve);
  return j;
}

json to_json(const FrameFileRecord& r) {
  json lanes = json::array();
  for (const auto& l : r.lanes) lanes.push_back(to_json(l));
  json j{{"version", kFrameSchemaVersion}, {"frame_id", r.frame_id}, {"lanes", std::move(lanes)}};
  if (r.camera) j["camera"] = to_json(*r.camera);
  return j;
}

CameraModel camera_from_json(const json& j, const std::string& path) {
  const std::string text = j.dump();
  const rapidjson::Document doc = parse_document(text, path);
  return camera_from_value(doc, path);
}

FrameFileRecord parse_frame_line(std::string_view text, std::size_t line) {
  const std::string where = "line " + std::to_string(line);
  const rapidjson::Document j = parse_document(text, where);
  if (!j.IsObject()) fail(where, "record must be an object");

  const Value* version = find(j, "version");
  if (version == nullptr) fail(where + ": version", "missing");
  if (!version->IsInt64() || version->GetInt64() != kFrameSchemaVersion) {
    rapidjson::StringBuffer buf;
    rapidjson::Writer<rapidjson::StringBuffer> w(buf);
    version->Accept(w);
    throw LaneError(ErrorCode::kSchemaVersionMismatch, where + ": schema version " + buf.GetString() +
                                                           ", expected " + std::to_string(kFrameSchemaVersion));
  }

  FrameFileRecord r;
  const Value& id = member(j, "frame_id", where);
  if (!id.IsString()) fail(where + ": frame_id", "expected a string");
  r.frame_id.assign(id.GetString(), id.GetStringLength());
  if (const Value* cam = find(j, "camera")) r.camera = camera_from_value(*cam, where + ": camera");
  const Value& lanes = array(member(j, "lanes", where), where + ": lanes");
  r.lanes.reserve(lanes.Size());
  for (rapidjson::SizeType i = 0; i < lanes.Size(); ++i) {
    r.lanes.push_back(lane_from_value(lanes[i], where + ": lanes[" + std::to_string(i) + "]"));
  }
  return r;
}

FrameReader::FrameReader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw LaneError(ErrorCode::kIoError, "cannot open " + path.string());
}

std::optional<FrameFileRecord> FrameReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    FrameFileRecord r = parse_frame_line(text, line_);
    if (!seen_.insert(r.frame_id).second) {
      fail("line " + std::to_string(line_) + ": frame_id", "duplicate '" + r.frame_id + "'");
    }
    return r;
  }
  if (in_.bad()) throw LaneError(ErrorCode::kIoError, "read failed on " + path_.string());
  return std::nullopt;
}

std::vector<FrameFileRecord> read_frames(const std::filesystem::path& path, unsigned threads) {
  std::ifstream in(path);
  if (!in) throw LaneError(ErrorCode::kIoError, "cannot open " + path.string());

  // Lines are read in chunks and parsed in parallel; ids are checked in file
  // order so the reported error does not depend on the thread count.
  constexpr std::size_t kChunk = 4096;
  std::vector<FrameFileRecord> out;
  std::set<std::string> seen;
  std::vector<std::string> lines;
  std::vector<std::size_t> numbers;
  std::size_t line = 0;
  bool eof = false;
  while (!eof) {
    lines.clear();
    numbers.clear();
    std::string text;
    while (lines.size() < kChunk) {
      if (!std::getline(in, text)) {
        eof = true;
        break;
      }
      ++line;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      lines.push_back(std::move(text));
      numbers.push_back(line);
    }
    if (in.bad()) throw LaneError(ErrorCode::kIoError, "read failed on " + path.string());

    std::vector<FrameFileRecord> parsed(lines.size());
    parallel_for(lines.size(), threads, [&](std::size_t i) { parsed[i] = parse_frame_line(lines[i], numbers[i]); });
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (!seen.insert(parsed[i].frame_id).second) {
        fail("line " + std::to_string(numbers[i]) + ": frame_id", "duplicate '" + parsed[i].frame_id + "'");
      }
      out.push_back(std::move(parsed[i]));
    }
  }
  return out;
}

AtomicWriter::AtomicWriter(std::filesystem::path path)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw LaneError(ErrorCode::kIoError, "cannot write " + tmp_.string());
}

AtomicWriter::~AtomicWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicWriter::commit() {
  out_.flush();
  if (!out_) throw LaneError(ErrorCode::kIoError, "write failed on " + tmp_.string());
  out_.close();
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw LaneError(ErrorCode::kIoError, "cannot rename onto " + path_.string() + ": " + ec.message());
  committed_ = true;
}

void write_frames(const std::filesystem::path& path, std::span<const FrameFileRecord> records) {
  AtomicWriter writer(path);
  for (const auto& r : records) writer.stream() << to_json(r).dump() << '\n';
  writer.commit();
}

std::vector<FrameRecord> join_frames(std::span<const FrameFileRecord> gt,
                                     std::span<const FrameFileRecord> pred) {
  std::map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < gt.size(); ++i) gt_index.emplace(gt[i].frame_id, i);

  std::vector<FrameRecord> out(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i].camera) {
      throw LaneError(ErrorCode::kMissingField, "ground-truth frame '" + gt[i].frame_id + "' camera");
    }
    out[i].frame_id = gt[i].frame_id;
    out[i].camera = *gt[i].camera;
    out[i].gt_lanes = gt[i].lanes;
  }
  for (const auto& p : pred) {
    const auto it = gt_index.find(p.frame_id);
    if (it == gt_index.end()) {
      throw LaneError(ErrorCode::kMissingFrame, "prediction frame '" + p.frame_id + "' has no ground truth");
    }
    out[it->second].pred_lanes = p.lanes;
  }
  return out;
}

std::vector<EvalFrame> to_eval_frames(std::span<const FrameRecord> records) {
  std::vector<EvalFrame> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i].frame_id = records[i].frame_id;
    for (const auto& l : records[i].gt_lanes) out[i].gt.push_back(l.lane);
    if (records[i].pred_lanes) {
      for (const auto& l : *records[i].pred_lanes) out[i].pred.push_back(l.lane);
    }
  }
  return out;
}

// --- Reports -------------------------------------------------------------------

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json report_to_json(const MetricReport& r, const ReportContext& context) {
  json summary{{"tp", r.tp},
               {"fp", r.fp},
               {"fn", r.fn},
               {"precision", r.precision},
               {"recall", r.recall},
               {"f1", r.f1},
               {"tau", r.tau}};
  if (!r.error_name.empty()) {
    summary["error_stat"] = json{{"name", r.error_name}, {"value", optional_number(r.error_value)}};
  }
  for (const auto& [name, value] : r.extra) summary[name] = optional_number(value);

  json j{{"format", "lane-metric-report"},
         {"version", kReportSchemaVersion},
         {"protocol", std::string(to_string(r.protocol))},
         {"config", context.config},
         {"assumptions", context.assumptions},
         {"ordering_hash", r.ordering_hash},
         {"summary", std::move(summary)}};

  if (context.include_per_frame) {
    json frames = json::array();
    for (const auto& f : r.per_frame) {
      json pairs = json::array();
      for (const auto& p : f.pairs) pairs.push_back({{"gt", p.gt}, {"pred", p.pred}, {"error", p.value}});
      frames.push_back({{"frame_id", f.frame_id}, {"tp", f.tp}, {"fp", f.fp}, {"fn", f.fn}, {"pairs", std::move(pairs)}});
    }
    j["per_frame"] = std::move(frames);
  }
  return j;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "tau,precision,recall,f1,tp,fp,fn,error\n";
  for (const auto& row : rows) {
    const MetricReport& r = row.report;
    out << format_double(row.tau) << ',' << format_double(r.precision) << ','
        << format_double(r.recall) << ',' << format_double(r.f1) << ',' << r.tp << ',' << r.fp
        << ',' << r.fn << ',' << (r.error_value ? format_double(*r.error_value) : "") << '\n';
  }
  return out.str();
}

void write_report(const MetricReport& report, const std::filesystem::path& path,
                  ReportFormat format, const ReportContext& context) {
  AtomicWriter writer(path);
  if (format == ReportFormat::kCsv) {
    const SweepRow row{report.tau, report};
    writer.stream() << sweep_csv(std::span(&row, 1));
  } else {
    writer.stream() << report_to_json(report, context).dump(2) << '\n';
  }
  writer.commit();
}

void write_sweep(std::span<const SweepRow> rows, const std::filesystem::path& path,
                 ReportFormat format, const ReportContext& context) {
  AtomicWriter writer(path);
  if (format == ReportFormat::kCsv) {
    writer.stream() << sweep_csv(rows);
  } else {
    ReportContext summary_only = context;
    summary_only.include_per_frame = false;
    json table = json::array();
    for (const auto& row : rows) table.push_back(report_to_json(row.report, summary_only)["summary"]);
    json j{{"format", "lane-sweep-report"},
           {"version", kReportSchemaVersion},
           {"protocol", rows.empty() ? "" : std::string(to_string(rows.front().report.protocol))},
           {"config", context.config},
           {"assumptions", context.assumptions},
           {"rows", std::move(table)}};
    writer.stream() << j.dump(2) << '\n';
  }
  writer.commit();
}

}  // namespace lanekit

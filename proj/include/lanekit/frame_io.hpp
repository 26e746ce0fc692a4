#pragma once

#include "lanekit/camera.hpp"
#include "lanekit/losses.hpp"
#include "lanekit/metrics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace lanekit {

inline constexpr int kFrameSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// One line of a frame file. Ground-truth files must carry a camera;
/// prediction files may omit it.
struct FrameFileRecord {
  std::string frame_id;
  std::optional<CameraModel> camera;
  std::vector<LaneRecord> lanes;
};

/// A ground-truth record joined with its predictions.
struct FrameRecord {
  std::string frame_id;
  CameraModel camera;
  std::vector<LaneRecord> gt_lanes;
  std::optional<std::vector<LaneRecord>> pred_lanes;
};

nlohmann::json to_json(const CameraModel& camera);
CameraModel camera_from_json(const nlohmann::json& j, const std::string& path = "camera");
nlohmann::json to_json(const Curve2D& curve);
nlohmann::json to_json(const LaneRecord& lane);
nlohmann::json to_json(const FrameFileRecord& record);

/// Throws kParseError naming `line` and the offending field path, or
/// kSchemaVersionMismatch.
FrameFileRecord parse_frame_line(std::string_view text, std::size_t line);

/// Streaming reader, one record per line. Blank lines are skipped.
class FrameReader {
 public:
  explicit FrameReader(const std::filesystem::path& path);

  /// Next record, or nullopt at end of file. Throws kParseError on a bad
  /// line or a repeated frame_id.
  std::optional<FrameFileRecord> next();

  std::size_t line() const { return line_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::set<std::string> seen_;
};

/// Whole-file read. Lines are parsed on `threads` workers (0 = all cores);
/// the result and any error are the same for every thread count.
std::vector<FrameFileRecord> read_frames(const std::filesystem::path& path, unsigned threads = 1);

/// Writes a file atomically: lines go to a sibling temporary that is renamed
/// over the destination by commit(). Destroying an uncommitted writer
/// removes the temporary.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::filesystem::path path);
  ~AtomicWriter();
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_frames(const std::filesystem::path& path, std::span<const FrameFileRecord> records);

/// Pairs predictions with ground truth by frame_id, in ground-truth order.
/// Ground-truth frames without predictions get an empty prediction list.
/// Throws kMissingFrame for a prediction frame absent from the ground truth,
/// kMissingField for a ground-truth record without a camera.
std::vector<FrameRecord> join_frames(std::span<const FrameFileRecord> gt,
                                     std::span<const FrameFileRecord> pred);

std::vector<EvalFrame> to_eval_frames(std::span<const FrameRecord> records);

// --- Reports -------------------------------------------------------------------

enum class ReportFormat { kStructured, kCsv };

struct ReportContext {
  nlohmann::json config = nlohmann::json::object();  ///< resolved configuration echo
  std::vector<std::string> assumptions;
  bool include_per_frame = true;
};

nlohmann::json report_to_json(const MetricReport& report, const ReportContext& context);

void write_report(const MetricReport& report, const std::filesystem::path& path,
                  ReportFormat format, const ReportContext& context);

/// csv: header `tau,precision,recall,f1,tp,fp,fn,error` then one row per tau.
void write_sweep(std::span<const SweepRow> rows, const std::filesystem::path& path,
                 ReportFormat format, const ReportContext& context);

std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace lanekit

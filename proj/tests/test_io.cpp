#include "lanekit/error.hpp"
#include "lanekit/frame_io.hpp"
#include "lanekit/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace lanekit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::path(LANEKIT_TEST_TMP) / "io";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

ErrorCode read_error(const fs::path& p) {
  try {
    read_frames(p);
  } catch (const LaneError& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

FrameFileRecord random_record(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FrameFileRecord r;
  r.frame_id = "rec_" + std::to_string(index);
  if (index % 3 != 0) {
    CameraModel c;
    c.fx = 900 + 200 * u(rng);
    c.pitch = 0.1 * u(rng);
    c.height = 1 + u(rng);
    r.camera = c;
  }
  const int lanes = index % 5;
  for (int k = 0; k < lanes; ++k) {
    LaneRecord l;
    const int n = 2 + static_cast<int>(u(rng) * 20);
    double y = u(rng);
    for (int i = 0; i < n; ++i) {
      y += 0.1 + 5 * u(rng);
      l.lane.points.emplace_back(10 * u(rng) - 5, y, u(rng) - 0.5);
      l.lane.visibility.push_back(u(rng) < 0.8 ? 1 : 0);
    }
    if (u(rng) < 0.5) l.lane.score = u(rng);
    if (u(rng) < 0.5) {
      l.vis_prob = std::vector<double>(static_cast<std::size_t>(n));
      for (auto& v : *l.vis_prob) v = u(rng);
    }
    if (u(rng) < 0.5) {
      l.uncertainty = std::vector<std::array<double, 2>>(static_cast<std::size_t>(n - 1));
      for (auto& v : *l.uncertainty) v = {u(rng) + 0.01, u(rng) + 0.01};
    }
    if (u(rng) < 0.5) {
      Curve2D c;
      c.rho = {1e4 * u(rng), 300 + 50 * u(rng), 1e3 * u(rng), 0.0};
      c.beta_prime = u(rng) - 0.5;
      c.beta_dprime = 960 * u(rng);
      c.v_low = 400 + 10 * u(rng);
      c.v_up = 700 - 10 * u(rng);
      c.confidence = u(rng);
      l.curve = c;
    }
    r.lanes.push_back(std::move(l));
  }
  return r;
}

void expect_equal(const FrameFileRecord& a, const FrameFileRecord& b) {
  EXPECT_EQ(a.frame_id, b.frame_id);
  ASSERT_EQ(a.camera.has_value(), b.camera.has_value());
  if (a.camera) {
    EXPECT_EQ(a.camera->fx, b.camera->fx);
    EXPECT_EQ(a.camera->pitch, b.camera->pitch);
    EXPECT_EQ(a.camera->height, b.camera->height);
    EXPECT_EQ(a.camera->image_size.width, b.camera->image_size.width);
  }
  ASSERT_EQ(a.lanes.size(), b.lanes.size());
  for (std::size_t k = 0; k < a.lanes.size(); ++k) {
    const LaneRecord& x = a.lanes[k];
    const LaneRecord& y = b.lanes[k];
    EXPECT_EQ(x.lane.points, y.lane.points);
    EXPECT_EQ(x.lane.visibility, y.lane.visibility);
    EXPECT_EQ(x.lane.score, y.lane.score);
    EXPECT_EQ(x.vis_prob, y.vis_prob);
    EXPECT_EQ(x.uncertainty, y.uncertainty);
    ASSERT_EQ(x.curve.has_value(), y.curve.has_value());
    if (x.curve) {
      EXPECT_EQ(x.curve->rho, y.curve->rho);
      EXPECT_EQ(x.curve->beta_prime, y.curve->beta_prime);
      EXPECT_EQ(x.curve->beta_dprime, y.curve->beta_dprime);
      EXPECT_EQ(x.curve->v_low, y.curve->v_low);
      EXPECT_EQ(x.curve->v_up, y.curve->v_up);
      EXPECT_EQ(x.curve->confidence, y.curve->confidence);
    }
  }
}

const char* kGoodLine =
    R"({"version":1,"frame_id":"a","camera":{"fx":1000,"fy":1000,"cx":480,"cy":360,"height":1.5,"pitch":0,"image_h":720,"image_w":960},"lanes":[{"points":[[0,3,0],[0,10,0]],"visibility":[1,1]}]})";

}  // namespace

TEST(FrameIo, RoundTripsRandomRecords) {
  std::mt19937_64 rng(61);
  std::vector<FrameFileRecord> records;
  for (int i = 0; i < 1000; ++i) records.push_back(random_record(rng, i));
  const fs::path p = tmp_dir() / "roundtrip.jsonl";
  write_frames(p, records);
  for (const unsigned threads : {1u, 4u}) {
    const auto back = read_frames(p, threads);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) expect_equal(records[i], back[i]);
  }
  // Streaming reader agrees.
  FrameReader reader(p);
  std::size_t n = 0;
  while (auto r = reader.next()) expect_equal(records[n++], *r);
  EXPECT_EQ(n, records.size());
}

TEST(FrameIo, TruncatedLineNamesTheLine) {
  const fs::path p = tmp_dir() / "truncated.jsonl";
  const std::string good = kGoodLine;
  write_text(p, good + "\n" + good.substr(0, good.size() / 2) + "\n");
  try {
    read_frames(p);
    FAIL();
  } catch (const LaneError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(FrameIo, FieldErrorsNameThePath) {
  std::string line = kGoodLine;
  line.replace(line.find("[0,10,0]"), 8, "[0,\"x\",0]");
  try {
    parse_frame_line(line, 7);
    FAIL();
  } catch (const LaneError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    const std::string what = e.what();
    EXPECT_NE(what.find("line 7"), std::string::npos) << what;
    EXPECT_NE(what.find("lanes[0].points[1][1]"), std::string::npos) << what;
  }
}

TEST(FrameIo, VersionMismatch) {
  std::string line = kGoodLine;
  line.replace(line.find("\"version\":1"), 11, "\"version\":99");
  const fs::path p = tmp_dir() / "version.jsonl";
  write_text(p, line + "\n");
  EXPECT_EQ(read_error(p), ErrorCode::kSchemaVersionMismatch);
}

TEST(FrameIo, DuplicateFrameId) {
  const fs::path p = tmp_dir() / "dup.jsonl";
  write_text(p, std::string(kGoodLine) + "\n\n" + kGoodLine + "\n");
  for (const unsigned threads : {1u, 3u}) {
    try {
      read_frames(p, threads);
      FAIL();
    } catch (const LaneError& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError);
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
  }
}

TEST(FrameIo, InvalidLaneIsRejected) {
  std::string line = kGoodLine;
  line.replace(line.find("[0,10,0]"), 8, "[0,1,0]");
  EXPECT_THROW(parse_frame_line(line, 1), LaneError);
}

TEST(FrameIo, MissingFile) {
  EXPECT_EQ(read_error(tmp_dir() / "does_not_exist.jsonl"), ErrorCode::kIoError);
}

TEST(FrameIo, JoinFrames) {
  std::vector<FrameFileRecord> gt = read_frames([] {
    const fs::path p = tmp_dir() / "join.jsonl";
    write_text(p, std::string(kGoodLine) + "\n");
    return p;
  }());
  FrameFileRecord pred;
  pred.frame_id = "a";
  std::vector<FrameFileRecord> preds{pred};
  const auto joined = join_frames(gt, preds);
  ASSERT_EQ(joined.size(), 1u);
  EXPECT_TRUE(joined[0].pred_lanes);

  preds[0].frame_id = "b";
  try {
    join_frames(gt, preds);
    FAIL();
  } catch (const LaneError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFrame);
  }

  gt[0].camera.reset();
  try {
    join_frames(gt, {});
    FAIL();
  } catch (const LaneError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingField);
  }
}

TEST(Reports, SweepCsvRows) {
  std::vector<SweepRow> rows;
  for (double t : parse_taus("0.1:1.5:0.1")) {
    SweepRow r;
    r.tau = t;
    r.report.tau = t;
    rows.push_back(r);
  }
  const std::string csv = sweep_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tau,precision,recall,f1,tp,fp,fn,error");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 15);
}

TEST(Reports, ByteIdenticalOnRerun) {
  ScenarioParams params;
  params.n_frames = 20;
  params.noise.sigma_w0 = 0.1;
  const Scenario s = generate_scenario(params);
  const auto frames = to_eval_frames(join_frames(s.gt, *s.pred));
  ReportContext ctx;
  ctx.config = {{"tau_bcd", 0.3}};
  const fs::path a = tmp_dir() / "report_a.json";
  const fs::path b = tmp_dir() / "report_b.json";
  write_report(bcd_report(frames, EvalConfig{}), a, ReportFormat::kStructured, ctx);
  EvalConfig threaded;
  threaded.threads = 4;
  write_report(bcd_report(frames, threaded), b, ReportFormat::kStructured, ctx);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(fs::exists(a.string() + ".tmp"));

  const nlohmann::json j = nlohmann::json::parse(slurp(a));
  EXPECT_EQ(j["format"], "lane-metric-report");
  EXPECT_EQ(j["protocol"], "bcd");
  EXPECT_EQ(j["per_frame"].size(), 20u);
}

TEST(Synth, DeterministicFiles) {
  ScenarioParams params;
  params.n_frames = 50;
  params.noise.sigma_w0 = 0.05;
  params.noise.sigma_h0 = 0.02;
  const fs::path a = tmp_dir() / "synth_a.jsonl";
  const fs::path b = tmp_dir() / "synth_b.jsonl";
  write_frames(a, *generate_scenario(params).pred);
  write_frames(b, *generate_scenario(params).pred);
  EXPECT_EQ(slurp(a), slurp(b));
  params.noise.seed = 7;
  write_frames(b, *generate_scenario(params).pred);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST(Synth, ZeroNoisePredictionsEqualGroundTruth) {
  ScenarioParams params;
  params.n_frames = 10;
  const Scenario s = generate_scenario(params);
  ASSERT_TRUE(s.pred);
  for (std::size_t i = 0; i < s.gt.size(); ++i) {
    ASSERT_EQ(s.gt[i].lanes.size(), (*s.pred)[i].lanes.size());
    for (std::size_t k = 0; k < s.gt[i].lanes.size(); ++k) {
      EXPECT_EQ(s.gt[i].lanes[k].lane.points, (*s.pred)[i].lanes[k].lane.points);
    }
  }
  EXPECT_EQ(s.stats.mean_abs_lateral, 0.0);
}

TEST(Synth, HalfNormalLateralResidual) {
  ScenarioParams params;
  params.n_frames = 125;
  params.curvature_range = {0.0, 0.0};
  params.max_grade = 0.0;
  params.noise.sigma_w0 = 0.1;
  const Scenario s = generate_scenario(params);
  EXPECT_EQ(s.stats.points, 10000);
  const double want = 0.1 * std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(s.stats.mean_abs_lateral, want, 0.05 * want);
  EXPECT_NEAR(s.stats.rms_lateral, 0.1, 0.05 * 0.1);
}

TEST(Synth, CurvesAreAttached) {
  ScenarioParams params;
  params.n_frames = 5;
  params.emit_curves = true;
  const Scenario s = generate_scenario(params);
  EXPECT_GT(s.curve_frames, 0);
  for (const auto& f : s.gt) {
    for (const auto& l : f.lanes) {
      if (s.curve_frames == params.n_frames) EXPECT_TRUE(l.curve);
    }
  }
}

TEST(Synth, RejectsNegativeNoise) {
  ScenarioParams params;
  params.noise.sigma_w0 = -0.1;
  EXPECT_THROW(generate_scenario(params), LaneError);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(LANEKIT_CLI) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path dir(const std::string& name) {
  const fs::path d = fs::path(LANEKIT_TEST_TMP) / "cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path synth(const std::string& name, const std::string& extra = "") {
  const fs::path d = dir(name);
  const Outcome r = run("synth --out " + q(d) + " --frames 30 --seed 42 --emit-pred " + extra);
  EXPECT_EQ(r.code, 0) << r.out;
  return d;
}

}  // namespace

TEST(Cli, HelpListsDefaults) {
  const Outcome r = run("eval --help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--tau-bcd"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("bcd"), std::string::npos) << r.out;
}

TEST(Cli, PerfectSyntheticSetScoresFull) {
  const fs::path d = synth("perfect");
  for (const std::string protocol : {"bcd", "once", "mbd", "openlane"}) {
    const Outcome r = run("eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl") +
                      " --protocol " + protocol);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("100.00"), std::string::npos) << protocol << "\n" << r.out;
  }
}

TEST(Cli, SynthIsDeterministic) {
  const fs::path a = synth("det_a", "--noise-w0 0.1");
  const fs::path b = synth("det_b", "--noise-w0 0.1");
  EXPECT_EQ(slurp(a / "gt.jsonl"), slurp(b / "gt.jsonl"));
  EXPECT_EQ(slurp(a / "pred.jsonl"), slurp(b / "pred.jsonl"));
}

TEST(Cli, ThreadsDoNotChangeReport) {
  const fs::path d = synth("threads", "--noise-w0 0.15");
  const std::string base = "eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl");
  ASSERT_EQ(run(base + " --threads 1 --out " + q(d / "r1.json")).code, 0);
  ASSERT_EQ(run(base + " --threads 4 --out " + q(d / "r4.json")).code, 0);
  const std::string a = slurp(d / "r1.json");
  const std::string b = slurp(d / "r4.json");
  // The config echo records the thread count; everything else must match.
  const auto strip = [](std::string s) {
    const auto at = s.find("\"threads\"");
    if (at != std::string::npos) s.erase(at, s.find_first_of(",}", at) - at);
    return s;
  };
  EXPECT_EQ(strip(a), strip(b));
}

TEST(Cli, UnknownPredictionFrameIsMissingFrame) {
  const fs::path d = synth("missing");
  std::ofstream(d / "bad.jsonl") << R"({"version":1,"frame_id":"nope","lanes":[]})" << "\n";
  const Outcome r = run("eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "bad.jsonl"));
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST(Cli, MalformedInputIsParseError) {
  const fs::path d = synth("parse");
  std::ofstream(d / "bad.jsonl") << R"({"version":1,"frame_id":)" << "\n";
  const Outcome r = run("eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "bad.jsonl"));
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("line 1"), std::string::npos) << r.out;
}

TEST(Cli, BadConfigIsConfigError) {
  const fs::path d = synth("config");
  std::ofstream(d / "cfg.json") << R"({"no_such_key": 1})";
  Outcome r = run("eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl") + " --config " +
              q(d / "cfg.json"));
  EXPECT_EQ(r.code, 2) << r.out;
  r = run("eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl") + " --protocol nope");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(Cli, ConfigFlagOverridesFile) {
  const fs::path d = synth("precedence", "--noise-w0 0.2");
  std::ofstream(d / "cfg.json") << R"({"tau_bcd": 0.01})";
  const std::string base = "eval --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl") +
                           " --config " + q(d / "cfg.json");
  const Outcome from_file = run(base);
  const Outcome from_flag = run(base + " --tau-bcd 5");
  ASSERT_EQ(from_file.code, 0) << from_file.out;
  ASSERT_EQ(from_flag.code, 0) << from_flag.out;
  EXPECT_NE(from_file.out.find("0.01"), std::string::npos) << from_file.out;
  EXPECT_NE(from_flag.out.find("100.00"), std::string::npos) << from_flag.out;
}

TEST(Cli, SweepRowCount) {
  const fs::path d = synth("sweep", "--noise-w0 0.1");
  const Outcome r = run("sweep --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl") +
                    " --taus 0.05:1.5:0.05");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] >= '0' && line[0] <= '9') ++rows;
  }
  EXPECT_EQ(rows, 30) << r.out;
}

TEST(Cli, FitUnderdetermined) {
  const fs::path d = dir("fit");
  std::ofstream(d / "lanes.jsonl") << R"({"version":1,"frame_id":"f","lanes":[[[400,400],[401,430],[402,460]]]})"
                                   << "\n";
  const Outcome r = run("fit --frame-2d " + q(d / "lanes.jsonl"));
  EXPECT_EQ(r.code, 6) << r.out;
}

TEST(Cli, FitNoiselessLanes) {
  const fs::path d = dir("fit_ok");
  std::ofstream out(d / "lanes.jsonl");
  out << R"({"version":1,"frame_id":"f","lanes":[)";
  for (int k = 0; k < 2; ++k) {
    out << (k ? "," : "") << "[";
    for (int i = 0; i < 12; ++i) {
      const double v = 380.0 + 25.0 * i;
      const double u = 3.0e4 / ((v - 350.0) * (v - 350.0)) + 2.0e3 / (v - 350.0) + (k ? 0.6 : -0.6) * v +
                       (k ? 100.0 : 800.0);
      out << (i ? "," : "") << "[" << u << "," << v << "]";
    }
    out << "]";
  }
  out << "]}\n";
  out.close();
  const Outcome r = run("fit --frame-2d " + q(d / "lanes.jsonl"));
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, LossReportsTotals) {
  const fs::path d = synth("loss", "--noise-w0 0.1");
  const Outcome r = run("loss --gt " + q(d / "gt.jsonl") + " --pred " + q(d / "pred.jsonl"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("L_total"), std::string::npos) << r.out;
}

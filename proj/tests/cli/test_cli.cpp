#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corpus_io.hpp"
#include "deixis/config.hpp"
#include "deixis/generator.hpp"
#include "deixis/pipeline.hpp"

using namespace deixis;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = DEIXIS_CLI_PATH;
const std::string kMap = std::string(DEIXIS_DATA_DIR) + "/campus.json";

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + kCli + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("deixis_cli_" + std::to_string(::getpid()));
    fs::create_directories(root_);
    ASSERT_EQ(run("gen --map " + kMap + " --sessions 40 --seed 5 --out " + p("corpus")).code, 0);
    ASSERT_EQ(run("train --data " + p("corpus") + " --out " + p("model.json")).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string p(const std::string& name) { return (root_ / name).string(); }

  static fs::path root_;
};

fs::path Cli::root_;

}  // namespace

TEST_F(Cli, GenWritesSessionsAndManifestDeterministically) {
  ASSERT_EQ(run("gen --map " + kMap + " --sessions 10 --seed 7 --out " + p("g1")).code, 0);
  ASSERT_EQ(run("gen --map " + kMap + " --sessions 10 --seed 7 --out " + p("g2")).code, 0);
  const auto manifest = json::parse(slurp(p("g1") + "/manifest.json"));
  ASSERT_EQ(manifest["sessions"].size(), 10u);
  size_t files = 0;
  for (const auto& e : fs::directory_iterator(p("g1"))) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(p("g2")) / e.path().filename())) << e.path();
  }
  EXPECT_EQ(files, 11u);
}

TEST_F(Cli, GenZeroSessions) {
  const auto r = run("gen --map " + kMap + " --sessions 0 --out " + p("empty"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(json::parse(slurp(p("empty") + "/manifest.json"))["sessions"].empty());
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("gen --map " + kMap + " --sessions 1 --out /proc/deixis/out").code, 2);
  EXPECT_EQ(run("gen --map /nonexistent.json --sessions 1 --out " + p("x")).code, 2);
  EXPECT_EQ(run("gen --map " + kMap + " --bogus 1 --out " + p("x")).code, 64);
  EXPECT_EQ(run("frobnicate").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("decode --model " + p("model.json") + " --map " + kMap + " --session /nonexistent --out " + p("o")).code, 2);
  EXPECT_EQ(run("eval --model " + p("model.json") + " --map " + kMap + " --data " + p("corpus") + " --fusion maybe").code, 64);
}

TEST_F(Cli, HelpListsFlagsWithDefaults) {
  const auto r = run("gen --help");
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--map", "--sessions", "--noise", "--seed", "--out"}) {
    EXPECT_NE(r.output.find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(r.output.find("[10]"), std::string::npos);
  for (const char* sub : {"train", "decode", "eval", "serve"}) EXPECT_EQ(run(std::string(sub) + " --help").code, 0) << sub;
  EXPECT_NE(run("eval --help").output.find("[on]"), std::string::npos);
}

TEST_F(Cli, TrainIsDeterministicAndMonotone) {
  ASSERT_EQ(run("train --data " + p("corpus") + " --out " + p("model2.json")).code, 0);
  EXPECT_EQ(slurp(p("model.json")), slurp(p("model2.json")));
  const auto model = json::parse(slurp(p("model.json")));
  EXPECT_EQ(model["models"].size(), 6u);

  auto total = [&](int iters) {
    const auto out = p("it" + std::to_string(iters) + ".json");
    EXPECT_EQ(run("train --data " + p("corpus") + " --iters " + std::to_string(iters) + " --out " + out).code, 0);
    double sum = 0.0;
    for (const auto& [k, v] : load_model(out).final_log_likelihood) sum += v;
    return sum;
  };
  EXPECT_GE(total(20), total(1));
}

TEST_F(Cli, TrainNamesMissingPhoneme) {
  const std::vector<PhrasePlan> plans = {PhrasePlan::NominalPoint, PhrasePlan::IconicContour};
  std::vector<SessionRecord> recs;
  for (std::uint64_t s = 0; s < 3; ++s) recs.push_back(scripted_session(MapContext::load(kMap), plans, s).record);
  tools::write_corpus(p("nocircle"), recs, {kMap, 0, 0.0, {}});
  const auto r = run("train --data " + p("nocircle") + " --out " + p("bad.json"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("circle"), std::string::npos) << r.output;
}

TEST_F(Cli, ModelShapeMismatchIsExit4) {
  auto model = load_model(p("model.json"));
  model.models[PhonemeKind::Point] = make_left_to_right(3, 2);
  save_model(p("mis.json"), model);
  const auto r = run("eval --model " + p("mis.json") + " --map " + kMap + " --data " + p("corpus"));
  EXPECT_EQ(r.code, 4) << r.output;
}

TEST_F(Cli, DecodeMatchesLibraryAndScript) {
  const std::vector<PhrasePlan> plans = {PhrasePlan::NominalPoint, PhrasePlan::MedialContour};
  const auto gs = scripted_session(MapContext::load(kMap), plans, 1);
  save_session(p("scripted.ndjson"), gs.record);
  ASSERT_EQ(run("decode --model " + p("model.json") + " --map " + kMap + " --session " + p("scripted.ndjson") +
                " --out " + p("dec.ndjson"))
                .code,
            0);
  const auto engine = std::make_shared<const Engine>(EngineConfig{}, load_model(p("model.json")), MapContext::load(kMap),
                                                     Lexicon::builtin());
  const auto res = decode_session(engine, load_session(p("scripted.ndjson")));
  std::string want;
  for (const auto& ph : res.phrases) want += phrase_record_to_json(ph) + "\n";
  EXPECT_EQ(slurp(p("dec.ndjson")), want);
  EXPECT_EQ(res.decoded.commands, gs.record.truth_commands);
}

TEST_F(Cli, FusionIsIdentityWithoutTokens) {
  auto rec = tools::read_corpus(p("corpus")).at(0);
  rec.tokens.clear();
  save_session(p("silent.ndjson"), rec);
  const std::string base = "decode --model " + p("model.json") + " --map " + kMap + " --session " + p("silent.ndjson");
  ASSERT_EQ(run(base + " --fusion on --out " + p("on.ndjson")).code, 0);
  ASSERT_EQ(run(base + " --fusion off --out " + p("off.ndjson")).code, 0);
  EXPECT_FALSE(slurp(p("on.ndjson")).empty());
  EXPECT_EQ(slurp(p("on.ndjson")), slurp(p("off.ndjson")));
}

TEST_F(Cli, EvalJsonIndependentOfWorkers) {
  const std::string base = "eval --model " + p("model.json") + " --map " + kMap + " --data " + p("corpus");
  const auto r = run(base + " --json " + p("m1.json"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("segment correct rate"), std::string::npos);
  ASSERT_EQ(run(base + " --workers 3 --json " + p("m3.json")).code, 0);
  EXPECT_EQ(slurp(p("m1.json")), slurp(p("m3.json")));
  const auto m = json::parse(slurp(p("m1.json")));
  for (const char* key : {"segment_correct_rate", "deixis_accuracy", "command_accuracy", "confusion"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
}

TEST_F(Cli, ConfigFromFlagOrEnvironment) {
  {
    std::ofstream(p("bad_cfg.json")) << R"({"nbest": 0})";
    std::ofstream(p("off_cfg.json")) << R"({"fusion_enabled": false})";
  }
  ASSERT_EQ(run("gen --map " + kMap + " --sessions 2 --seed 9 --out " + p("cfg_corpus")).code, 0);
  const std::string args = "eval --model " + p("model.json") + " --map " + kMap + " --data " + p("cfg_corpus");
  EXPECT_EQ(run("--config " + p("bad_cfg.json") + " " + args).code, 3);
  EXPECT_EQ(run(args, "DEIXIS_CONFIG=" + p("bad_cfg.json")).code, 3);
  EXPECT_EQ(run("--config /nonexistent.json " + args).code, 2);
  // The flag wins over the file.
  const auto r = run("--config " + p("off_cfg.json") + " " + args + " --fusion on");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("fusion on"), std::string::npos);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "deixis/config.hpp"
#include "deixis/error.hpp"
#include "fixtures.hpp"

using namespace deixis;
using P = PhonemeKind;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

}  // namespace

TEST(EngineConfig, DocumentedDefaults) {
  const EngineConfig c;
  EXPECT_EQ(c.rate_hz, 30.0);
  EXPECT_EQ(c.nbest, 10);
  EXPECT_EQ(c.penalties.uniform, -1.0);
  EXPECT_EQ(c.holds.v_hold, 0.03);
  EXPECT_EQ(c.holds.min_dwell, 0.2);
  EXPECT_EQ(c.holds.gap_max, 0.15);
  EXPECT_EQ(c.closure.eps_close, 0.05);
  EXPECT_EQ(c.cooccurrence.window.pre, 0.2);
  EXPECT_EQ(c.cooccurrence.window.post, 1.0);
  EXPECT_EQ(c.cooccurrence.holds_bonus, 0.5);
  EXPECT_EQ(c.cooccurrence.credit, BonusCredit::Stroke);
  EXPECT_EQ(c.semantics.point_radius, 0.04);
  EXPECT_EQ(c.semantics.path_buffer, 0.03);
  EXPECT_EQ(c.semantics.iconic_threshold, 0.6);
  EXPECT_EQ(c.semantics.clause_gap, 1.5);
  EXPECT_EQ(c.semantics.demotion_penalty, 0.3);
  EXPECT_EQ(c.semantics.no_evidence_confidence, 0.3);
  EXPECT_EQ(c.live.horizon, 8.0);
  EXPECT_TRUE(c.fusion);
  EXPECT_EQ(c.min_stroke, 0.3);
  EXPECT_TRUE(c.merge_continuous);
}

TEST(EngineConfig, EmptyOverridesKeepDefaults) {
  EngineConfig c;
  c.merge_json_text("{}");
  EXPECT_EQ(c.to_json_text(), EngineConfig{}.to_json_text());
}

TEST(EngineConfig, SerializedFormReloadsExactly) {
  EngineConfig c;
  c.merge_json_text(R"({"nbest": 4, "fusion_enabled": false, "holds": {"v_hold": 0.05},
                        "fusion": {"credit": "token", "window": {"post": 0.7}},
                        "semantics": {"clause_gap": 2.0}, "rest_calibration": 0.5})");
  EXPECT_EQ(c.nbest, 4);
  EXPECT_FALSE(c.fusion);
  EXPECT_EQ(c.cooccurrence.credit, BonusCredit::Token);
  EXPECT_EQ(c.cooccurrence.window.post, 0.7);
  EngineConfig d;
  d.merge_json_text(c.to_json_text());
  EXPECT_EQ(d.to_json_text(), c.to_json_text());
}

TEST(EngineConfig, RejectsBadInput) {
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text(R"({"nbestt": 3})"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text(R"({"holds": {"speed": 1}})"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text(R"({"fusion": {"credit": "both"}})"); }),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text(R"({"rest_calibration": 0})"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text(R"({"min_stroke": -0.1})"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { EngineConfig().merge_json_text("{"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { EngineConfig::load("/nonexistent/config.json"); }), ErrorKind::IoError);
}

TEST(ModelFile, BitExactRoundTrip) {
  std::mt19937_64 rng(61);
  ModelFile m;
  m.topology = default_topology();
  for (auto k : kAllPhonemes) {
    m.models[k] = fixtures::random_hmm(rng, static_cast<size_t>(m.topology.at(k)), FeatureVector::kDims);
    m.final_log_likelihood[k] = -1000.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
  // Left-to-right models carry log(0) entries; they must survive as -inf.
  m.models[P::Rest].log_trans[0][0] = -std::numeric_limits<double>::infinity();
  const auto text = model_to_json_text(m);
  const auto back = model_from_json_text(text);
  EXPECT_EQ(model_to_json_text(back), text);
  for (auto k : kAllPhonemes) {
    const auto& a = m.models.at(k);
    const auto& b = back.models.at(k);
    EXPECT_EQ(a.log_init, b.log_init);
    EXPECT_EQ(a.log_trans, b.log_trans);
    for (size_t s = 0; s < a.n_states(); ++s) {
      EXPECT_EQ(a.emissions[s].mean, b.emissions[s].mean);
      EXPECT_EQ(a.emissions[s].var, b.emissions[s].var);
    }
  }
  EXPECT_EQ(back.final_log_likelihood, m.final_log_likelihood);
}

TEST(ModelFile, SaveLoadAndErrors) {
  std::mt19937_64 rng(62);
  ModelFile m;
  m.topology = default_topology();
  for (auto k : kAllPhonemes) m.models[k] = fixtures::random_hmm(rng, 3, FeatureVector::kDims);
  const auto path = std::filesystem::temp_directory_path() / "deixis_model_roundtrip.json";
  save_model(path.string(), m);
  EXPECT_EQ(model_to_json_text(load_model(path.string())), model_to_json_text(m));
  std::filesystem::remove(path);
  // Any unusable model file is a shape error, malformed JSON included.
  EXPECT_EQ(kind_of([] { model_from_json_text("{\"models\": "); }), ErrorKind::ModelShapeError);
  EXPECT_EQ(kind_of([] { model_from_json_text("[]"); }), ErrorKind::ModelShapeError);
  EXPECT_EQ(kind_of([] { load_model("/nonexistent/model.json"); }), ErrorKind::IoError);
}

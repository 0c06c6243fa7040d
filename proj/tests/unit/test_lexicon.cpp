#include <gtest/gtest.h>

#include <random>

#include "deixis/error.hpp"
#include "deixis/lexicon.hpp"
#include "fixtures.hpp"

using namespace deixis;
using K = KeywordClass;

namespace {

std::vector<TimedWord> timed(std::initializer_list<const char*> words, double start = 1.0) {
  std::vector<TimedWord> out;
  double t = start;
  for (const char* w : words) {
    out.push_back({w, t, t + 0.2});
    t += 0.25;
  }
  return out;
}

std::vector<K> classes(const std::vector<KeywordToken>& toks) {
  std::vector<K> out;
  for (const auto& t : toks) out.push_back(t.cls);
  return out;
}

}  // namespace

TEST(Lexicon, ClosedClassExamples) {
  const auto lex = Lexicon::builtin();
  const auto ctx = fixtures::grid_map();
  EXPECT_EQ(classify_token(lex, "through", ctx), K::PrepMedial);
  EXPECT_EQ(classify_token(lex, "from", ctx), K::PrepInitial);
  EXPECT_EQ(classify_token(lex, "toward", ctx), K::PrepFinal);
  EXPECT_EQ(classify_token(lex, "here", ctx), K::SpatialAdverbial);
  EXPECT_EQ(classify_token(lex, "this", ctx), K::DeicticMarker);
  EXPECT_EQ(classify_token(lex, "move", ctx), K::MotionVerb);
  EXPECT_EQ(classify_token(lex, "it", ctx), K::Pronoun);
  EXPECT_EQ(classify_token(lex, "the", ctx), K::Other);
  EXPECT_EQ(classify_token(lex, "when", ctx), K::Other);
}

TEST(Lexicon, MapNamesAreNouns) {
  const auto lex = Lexicon::builtin();
  const auto ctx = fixtures::grid_map();
  EXPECT_EQ(classify_token(lex, "gym", ctx), K::Noun);
  EXPECT_EQ(classify_token(lex, "hall", ctx), K::Noun);
  EXPECT_EQ(classify_token(lex, "building", ctx), K::Noun);
  EXPECT_EQ(classify_token(lex, "gym", MapContext{}), K::Other);
}

TEST(Lexicon, PrecedenceResolvesOverlaps) {
  auto lex = Lexicon::builtin();
  lex.merge_json_text(R"({"motion_verb": ["here", "cruise"], "pronoun": ["that"], "noun": ["cruise"]})");
  const auto ctx = fixtures::grid_map();
  EXPECT_EQ(classify_token(lex, "here", ctx), K::SpatialAdverbial);
  EXPECT_EQ(classify_token(lex, "that", ctx), K::DeicticMarker);
  EXPECT_EQ(classify_token(lex, "cruise", ctx), K::MotionVerb);
  // Sets are pairwise disjoint after precedence.
  for (auto a : kAllKeywordClasses) {
    for (auto b : kAllKeywordClasses) {
      if (a == b) continue;
      for (const auto& w : lex.words(a)) EXPECT_FALSE(lex.words(b).contains(w)) << w;
    }
  }
}

TEST(Lexicon, BadFileContent) {
  auto lex = Lexicon::builtin();
  EXPECT_THROW(lex.merge_json_text(R"({"adjective": ["big"]})"), Error);
  EXPECT_THROW(lex.merge_json_text("[1, 2"), Error);
  EXPECT_THROW(Lexicon::load("/nonexistent/lexicon.json"), Error);
}

TEST(Lexicon, ClassifyIsPure) {
  const auto lex = Lexicon::builtin();
  const auto ctx = fixtures::grid_map();
  std::mt19937_64 rng(31);
  const std::vector<std::string> words = {"go", "this", "gym", "the", "along", "there", "it", "car", "xyz"};
  for (int i = 0; i < 500; ++i) {
    const auto& w = words[rng() % words.size()];
    EXPECT_EQ(classify_token(lex, w, ctx), classify_token(lex, w, ctx));
  }
}

TEST(SpotKeywords, GoThroughTheBuilding) {
  const auto toks = spot_keywords(Lexicon::builtin(), timed({"go", "through", "the", "building"}), fixtures::grid_map());
  EXPECT_EQ(classes(toks), (std::vector<K>{K::MotionVerb, K::PrepMedial, K::Other, K::Noun}));
  EXPECT_EQ(toks[1].text, "through");
  EXPECT_DOUBLE_EQ(toks[1].t0, 1.25);
}

TEST(SpotKeywords, TakeThisCarOutOfTheLot) {
  const auto toks =
      spot_keywords(Lexicon::builtin(), timed({"take", "this", "car", "out", "of", "the", "lot"}), fixtures::grid_map());
  EXPECT_EQ(classes(toks), (std::vector<K>{K::MotionVerb, K::DeicticMarker, K::Noun, K::PrepInitial, K::Other,
                                           K::Other, K::Noun}));
}

TEST(SpotKeywords, EmptyAndCase) {
  EXPECT_TRUE(spot_keywords(Lexicon::builtin(), {}, fixtures::grid_map()).empty());
  const auto toks = spot_keywords(Lexicon::builtin(), timed({"Go", "THERE"}), fixtures::grid_map());
  EXPECT_EQ(classes(toks), (std::vector<K>{K::MotionVerb, K::SpatialAdverbial}));
}

TEST(SpotKeywords, OverlapRejected) {
  std::vector<TimedWord> words = {{"go", 1.0, 1.3}, {"there", 1.2, 1.5}};
  try {
    spot_keywords(Lexicon::builtin(), words, fixtures::grid_map());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TokenOverlap);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "deixis/error.hpp"
#include "deixis/morphology.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace deixis;
using P = PhonemeKind;

namespace {

std::vector<double> frame_times(size_t T) {
  std::vector<double> t(T);
  for (size_t i = 0; i < T; ++i) t[i] = static_cast<double>(i) / 30.0;
  return t;
}

void expect_tiling(const Hypothesis& h, int T) {
  ASSERT_FALSE(h.segments.empty());
  EXPECT_EQ(h.segments.front().first_frame, 0);
  EXPECT_EQ(h.segments.back().end_frame, T);
  double total = 0.0;
  for (size_t k = 0; k < h.segments.size(); ++k) {
    EXPECT_LT(h.segments[k].first_frame, h.segments[k].end_frame);
    EXPECT_LT(h.segments[k].t0, h.segments[k].t1);
    if (k > 0) {
      EXPECT_EQ(h.segments[k].first_frame, h.segments[k - 1].end_frame);
      EXPECT_EQ(h.segments[k].t0, h.segments[k - 1].t1);
    }
    total += h.segments[k].score;
  }
  EXPECT_NEAR(total, h.log_prob, 1e-9 * std::max(1.0, std::abs(h.log_prob)));
}

Polyline arc(double r, double sweep, int n, Point2 c = {0.5, 0.5}) {
  Polyline pts;
  for (int i = 0; i <= n; ++i) {
    const double a = sweep * i / n;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return pts;
}

StrokeSegment stroke(P kind, Polyline pts) {
  StrokeSegment s;
  s.kind = kind;
  s.t0 = 0.0;
  s.t1 = 1.0;
  s.path_points = std::move(pts);
  return s;
}

}  // namespace

TEST(Network, DefaultEdges) {
  const auto net = build_default_network(default_topology());
  EXPECT_TRUE(net.penalty(P::Preparation, P::Point).has_value());
  EXPECT_FALSE(net.penalty(P::Rest, P::Point).has_value());
  EXPECT_TRUE(net.penalty(P::Contour, P::Point).has_value());
  EXPECT_FALSE(net.penalty(P::Preparation, P::Retraction).has_value());
  EXPECT_DOUBLE_EQ(*net.penalty(P::Retraction, P::Rest), -1.0);
  EXPECT_EQ(net.edges.size(), 1u + 3u + 3u * 5u + 1u);
}

TEST(Network, PenaltyOverride) {
  PenaltyConfig pc;
  pc.overrides[{P::Point, P::Retraction}] = -0.25;
  const auto net = build_default_network(default_topology(), pc);
  EXPECT_DOUBLE_EQ(*net.penalty(P::Point, P::Retraction), -0.25);
  EXPECT_DOUBLE_EQ(*net.penalty(P::Contour, P::Retraction), -1.0);
}

TEST(Network, MissingPhonemeThrows) {
  auto topo = default_topology();
  topo.erase(P::Circle);
  try {
    build_default_network(topo);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IncompleteTopology);
  }
}

TEST(Network, DefaultTopologyCounts) {
  const auto t = default_topology();
  EXPECT_EQ(t.at(P::Preparation), 3);
  EXPECT_EQ(t.at(P::Retraction), 3);
  EXPECT_EQ(t.at(P::Point), 3);
  EXPECT_EQ(t.at(P::Contour), 4);
  EXPECT_EQ(t.at(P::Rest), 4);
  EXPECT_EQ(t.at(P::Circle), 4);
}

TEST(Network, EveryCycleHasStrokeOrRest) {
  // Removing stroke and rest nodes must leave an acyclic graph.
  const auto net = build_default_network(default_topology());
  for (const auto& e : net.edges) {
    if (is_stroke(e.from) || e.from == P::Rest || is_stroke(e.to) || e.to == P::Rest) continue;
    EXPECT_NE(e.from, e.to);
    EXPECT_FALSE(net.penalty(e.to, e.from).has_value());
  }
}

TEST(CompositeDecode, TopOneMatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto g = fixtures::small_graph(rng, 2);
    const size_t T = 4 + static_cast<size_t>(trial % 5);
    const auto obs = fixtures::random_obs(rng, T, 2);
    const bool rest_end = trial % 2 == 0;
    const auto ref = oracle::enumerate_segmentations(g.network, g.models, obs, rest_end);
    const auto times = frame_times(T);
    DecodeOptions opt;
    opt.nbest = 1;
    opt.require_rest_end = rest_end;
    std::vector<Hypothesis> got;
    try {
      got = decode_observations(g.network, g.models, obs, times, 1.0 / 30.0, opt);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::StreamTooShort);
      ASSERT_TRUE(ref.empty()) << "trial " << trial;
      continue;
    }
    ASSERT_FALSE(ref.empty());
    double best = kLogZero;
    for (const auto& [labels, seg] : ref) best = std::max(best, seg.score);
    ASSERT_EQ(got.size(), 1u);
    ASSERT_NEAR(got[0].log_prob, best, 1e-9 * std::max(1.0, std::abs(best))) << "trial " << trial;
    const auto& mine = ref.at(got[0].labels());
    EXPECT_NEAR(mine.score, best, 1e-9 * std::max(1.0, std::abs(best)));
    expect_tiling(got[0], static_cast<int>(T));
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(CompositeDecode, WideBeamRecoversEveryLabelSequence) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 150; ++trial) {
    const auto g = fixtures::small_graph(rng, 2);
    const size_t T = 8;
    const auto obs = fixtures::random_obs(rng, T, 2);
    const auto ref = oracle::enumerate_segmentations(g.network, g.models, obs, true);
    DecodeOptions opt;
    opt.nbest = 10000;
    const auto got = decode_observations(g.network, g.models, obs, frame_times(T), 1.0 / 30.0, opt);
    ASSERT_EQ(got.size(), ref.size()) << "trial " << trial;
    for (size_t k = 0; k < got.size(); ++k) {
      if (k > 0) EXPECT_GE(got[k - 1].log_prob, got[k].log_prob);
      const auto& r = ref.at(got[k].labels());
      EXPECT_NEAR(got[k].log_prob, r.score, 1e-9 * std::max(1.0, std::abs(r.score)));
      EXPECT_TRUE(g.network.is_valid_walk(got[k].labels()));
      expect_tiling(got[k], static_cast<int>(T));
    }
  }
}

TEST(CompositeDecode, NbestIsPrefixConsistent) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = fixtures::small_graph(rng, 2);
    const auto obs = fixtures::random_obs(rng, 8, 2);
    DecodeOptions one, many;
    one.nbest = 1;
    many.nbest = 5;
    const auto a = decode_observations(g.network, g.models, obs, frame_times(8), 1.0 / 30.0, one);
    const auto b = decode_observations(g.network, g.models, obs, frame_times(8), 1.0 / 30.0, many);
    ASSERT_FALSE(b.empty());
    EXPECT_DOUBLE_EQ(a[0].log_prob, b[0].log_prob);
    for (size_t k = 1; k < b.size(); ++k) {
      EXPECT_GE(b[k - 1].log_prob, b[k].log_prob);
      EXPECT_NE(b[k - 1].labels(), b[k].labels());
    }
  }
}

TEST(CompositeDecode, StreamTooShort) {
  std::mt19937_64 rng(34);
  auto g = fixtures::small_graph(rng, 2);
  g.models[P::Rest] = make_left_to_right(3, 2);
  const auto obs = fixtures::random_obs(rng, 2, 2);
  try {
    decode_observations(g.network, g.models, obs, frame_times(2), 1.0 / 30.0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StreamTooShort);
  }
}

TEST(CompositeDecode, DimensionMismatchIsModelShapeError) {
  std::mt19937_64 rng(35);
  auto g = fixtures::small_graph(rng, 2);
  const auto obs = fixtures::random_obs(rng, 8, 3);
  try {
    decode_observations(g.network, g.models, obs, frame_times(8), 1.0 / 30.0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelShapeError);
  }
}

TEST(CompositeDecode, StationaryStreamIsOneRestSegment) {
  const auto topo = default_topology();
  const auto net = build_default_network(topo);
  PhonemeModels models;
  double offset = 1.0;
  for (auto k : kAllPhonemes) {
    Hmm m = make_left_to_right(static_cast<size_t>(topo.at(k)), FeatureVector::kDims);
    for (auto& e : m.emissions) {
      std::fill(e.mean.begin(), e.mean.end(), k == P::Rest ? 0.0 : offset);
      std::fill(e.var.begin(), e.var.end(), 0.01);
    }
    offset += 1.0;
    models[k] = m;
  }
  std::vector<FeatureVector> feats(60);
  for (size_t i = 0; i < feats.size(); ++i) feats[i].t = static_cast<double>(i) / 30.0;
  const auto hyps = decode_continuous(net, models, feats, {});
  ASSERT_FALSE(hyps.empty());
  ASSERT_EQ(hyps[0].segments.size(), 1u);
  EXPECT_EQ(hyps[0].segments[0].kind, P::Rest);
  EXPECT_NEAR(hyps[0].segments[0].t1, 2.0, 1e-9);
}

TEST(Closure, FullCircleIsCircle) {
  const auto s = classify_closure(stroke(P::Contour, arc(0.1, 2 * std::numbers::pi, 60)));
  EXPECT_TRUE(s.closure);
  EXPECT_EQ(s.kind, P::Circle);
}

TEST(Closure, StraightSwipeIsContour) {
  Polyline line;
  for (int i = 0; i <= 30; ++i) line.push_back({0.3 + 0.4 * i / 30.0, 0.5});
  const auto s = classify_closure(stroke(P::Circle, line));
  EXPECT_FALSE(s.closure);
  EXPECT_EQ(s.kind, P::Contour);
}

TEST(Closure, ThreeQuarterArcNeedsBothCriteria) {
  // Chord of a 270 degree arc is r*sqrt(2); r chosen so the gap is 0.07.
  const double r = 0.07 / std::sqrt(2.0);
  const auto pts = arc(r, 1.5 * std::numbers::pi, 45);
  EXPECT_NEAR(distance(pts.front(), pts.back()), 0.07, 1e-12);
  const auto s = classify_closure(stroke(P::Circle, pts));
  EXPECT_FALSE(s.closure);
  EXPECT_EQ(s.kind, P::Contour);
}

TEST(Closure, CloseEndpointsWithoutTurningStayContour) {
  Polyline there_and_back;
  for (int i = 0; i <= 20; ++i) there_and_back.push_back({0.3 + 0.2 * i / 20.0, 0.5});
  for (int i = 20; i >= 0; --i) there_and_back.push_back({0.3 + 0.2 * i / 20.0, 0.501});
  EXPECT_EQ(classify_closure(stroke(P::Contour, there_and_back)).kind, P::Contour);
}

TEST(Closure, RejectsNonLoopKinds) {
  for (auto k : {P::Point, P::Rest, P::Preparation, P::Retraction}) {
    try {
      classify_closure(stroke(k, arc(0.1, 6.3, 30)));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::WrongKind);
    }
  }
}

TEST(Closure, Idempotent) {
  for (double sweep : {1.0, 3.0, 4.7, 6.3, 7.0}) {
    const auto once = classify_closure(stroke(P::Contour, arc(0.08, sweep, 50)));
    const auto twice = classify_closure(once);
    EXPECT_EQ(once.kind, twice.kind);
    EXPECT_EQ(once.closure, twice.closure);
  }
}

namespace {

std::vector<StrokeSegment> tiling(std::vector<P> kinds) {
  std::vector<StrokeSegment> out;
  for (size_t i = 0; i < kinds.size(); ++i) {
    StrokeSegment s;
    s.id = static_cast<int>(i);
    s.kind = kinds[i];
    s.t0 = static_cast<double>(i);
    s.t1 = static_cast<double>(i + 1);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Phrases, SingleStrokePhrase) {
  const auto ph = segment_phrases(tiling({P::Rest, P::Preparation, P::Point, P::Retraction, P::Rest}));
  ASSERT_EQ(ph.size(), 1u);
  EXPECT_EQ(ph[0].segments.size(), 3u);
}

TEST(Phrases, MultiStrokePhrase) {
  const auto ph = segment_phrases(
      tiling({P::Rest, P::Preparation, P::Point, P::Preparation, P::Contour, P::Retraction, P::Rest}));
  ASSERT_EQ(ph.size(), 1u);
  EXPECT_EQ(ph[0].segments.size(), 5u);
}

TEST(Phrases, RestOnlyAndStrokeFreeRunsYieldNothing) {
  EXPECT_TRUE(segment_phrases(tiling({P::Rest})).empty());
  EXPECT_TRUE(segment_phrases(tiling({P::Rest, P::Preparation, P::Retraction, P::Rest})).empty());
}

TEST(Phrases, IdsCountFromFirstId) {
  const auto ph = segment_phrases(tiling({P::Rest, P::Preparation, P::Point, P::Retraction, P::Rest,
                                          P::Preparation, P::Circle, P::Retraction, P::Rest}),
                                  7);
  ASSERT_EQ(ph.size(), 2u);
  EXPECT_EQ(ph[0].id, 7);
  EXPECT_EQ(ph[1].id, 8);
}

namespace {

// Frames-based tiling with a speed profile: one entry per segment
// (kind, frames, speed).
struct Piece {
  P kind;
  int frames;
  double speed;
};

std::pair<std::vector<StrokeSegment>, std::vector<FeatureVector>> speed_tiling(const std::vector<Piece>& pieces) {
  std::vector<StrokeSegment> segs;
  std::vector<FeatureVector> f;
  for (const auto& p : pieces) {
    StrokeSegment s;
    s.kind = p.kind;
    s.first_frame = static_cast<int>(f.size());
    s.end_frame = s.first_frame + p.frames;
    s.t0 = s.first_frame / 30.0;
    s.t1 = s.end_frame / 30.0;
    s.score = -1.0;
    for (int i = 0; i < p.frames; ++i) {
      FeatureVector v;
      v.t = static_cast<double>(f.size()) / 30.0;
      v.speed = p.speed;
      f.push_back(v);
      s.path_points.push_back({0.1 + 0.001 * static_cast<double>(f.size()), 0.5});
    }
    segs.push_back(std::move(s));
  }
  return {segs, f};
}

std::vector<P> kinds_of(const std::vector<StrokeSegment>& segs) {
  std::vector<P> out;
  for (const auto& s : segs) out.push_back(s.kind);
  return out;
}

}  // namespace

TEST(PreStrokeHold, HeldStrokeBeforeStrokeBecomesPreparation) {
  auto [segs, f] = speed_tiling({{P::Rest, 20, 0.0},
                                 {P::Preparation, 10, 0.5},
                                 {P::Point, 9, 0.01},
                                 {P::Point, 12, 0.3},
                                 {P::Retraction, 10, 0.5}});
  const auto out = absorb_pre_stroke_holds(segs, f, HoldParams{});
  EXPECT_EQ(kinds_of(out), (std::vector<P>{P::Rest, P::Preparation, P::Point, P::Retraction}));
  EXPECT_EQ(out[1].first_frame, 20);
  EXPECT_EQ(out[1].end_frame, 39);
  EXPECT_EQ(out[1].score, -2.0);
  EXPECT_EQ(out[1].path_points.size(), 19u);
}

TEST(PreStrokeHold, LeavesMovingOrFinalStrokesAlone) {
  // Moving stroke before a stroke: a genuine compound.
  auto [a, fa] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Point, 9, 0.2}, {P::Contour, 12, 0.3}});
  EXPECT_EQ(kinds_of(absorb_pre_stroke_holds(a, fa, HoldParams{})), kinds_of(a));
  // Held stroke followed by a retraction is a point dwell, not a pre-stroke hold.
  auto [b, fb] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Point, 9, 0.01}, {P::Retraction, 12, 0.3}});
  EXPECT_EQ(kinds_of(absorb_pre_stroke_holds(b, fb, HoldParams{})), kinds_of(b));
  // A still run shorter than min_dwell is not a hold.
  auto [c, fc] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Point, 4, 0.01}, {P::Point, 12, 0.3}});
  EXPECT_EQ(kinds_of(absorb_pre_stroke_holds(c, fc, HoldParams{})), kinds_of(c));
}

TEST(ContinuousStrokes, MergedWithoutPause) {
  auto [segs, f] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Contour, 12, 0.4}, {P::Contour, 12, 0.4},
                                 {P::Retraction, 10, 0.5}});
  const auto out = merge_continuous_strokes(segs, f, HoldParams{}, ClosureParams{});
  EXPECT_EQ(kinds_of(out), (std::vector<P>{P::Preparation, P::Contour, P::Retraction}));
  EXPECT_EQ(out[1].first_frame, 10);
  EXPECT_EQ(out[1].end_frame, 34);
  EXPECT_EQ(out[1].t1, segs[2].t1);
}

TEST(ContinuousStrokes, PauseOrPointKeepsThemApart) {
  auto [segs, f] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Contour, 12, 0.4}, {P::Contour, 12, 0.4}});
  f[21].speed = 0.0;  // dip one frame before the junction
  EXPECT_EQ(merge_continuous_strokes(segs, f, HoldParams{}, ClosureParams{}).size(), 3u);
  auto [b, fb] = speed_tiling({{P::Preparation, 10, 0.5}, {P::Point, 12, 0.4}, {P::Contour, 12, 0.4}});
  EXPECT_EQ(merge_continuous_strokes(b, fb, HoldParams{}, ClosureParams{}).size(), 3u);
}

TEST(MinStroke, PicksFirstHypothesisWithoutShortStrokes) {
  std::vector<Hypothesis> hyps(3);
  hyps[0].segments = speed_tiling({{P::Rest, 10, 0}, {P::Point, 5, 0}, {P::Rest, 10, 0}}).first;
  hyps[1].segments = speed_tiling({{P::Rest, 4, 0}, {P::Point, 12, 0}, {P::Rest, 9, 0}}).first;
  hyps[2].segments = speed_tiling({{P::Rest, 25, 0}}).first;
  // Short non-stroke segments do not count.
  EXPECT_EQ(first_with_min_stroke(hyps, 9), 1u);
  EXPECT_EQ(first_with_min_stroke(hyps, 5), 0u);
  EXPECT_EQ(first_with_min_stroke(hyps, 13), 2u);
  hyps.pop_back();
  EXPECT_EQ(first_with_min_stroke(hyps, 13), 0u);
}

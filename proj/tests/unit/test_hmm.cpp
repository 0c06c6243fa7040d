#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "deixis/error.hpp"
#include "deixis/hmm.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace deixis;

namespace {

ObservationSeq single(std::vector<double> v) {
  ObservationSeq obs(v.size());
  obs.push_back(v);
  return obs;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Forward, SingleStateAtMeanIsGaussianPeak) {
  Hmm m = make_left_to_right(1, 2);
  m.emissions[0].mean = {0.3, -0.2};
  m.emissions[0].var = {0.5, 2.0};
  const double expected = -0.5 * std::log(2 * std::numbers::pi * 0.5) - 0.5 * std::log(2 * std::numbers::pi * 2.0);
  EXPECT_NEAR(forward_log_likelihood(m, single({0.3, -0.2})), expected, 1e-12);
}

TEST(Forward, FarObservationStaysFinite) {
  Hmm m = make_left_to_right(3, 2);
  const double ll = forward_log_likelihood(m, single({500.0, -500.0}));
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, -1000.0);
}

TEST(Forward, DimensionMismatchThrows) {
  Hmm m = make_left_to_right(2, 3);
  try {
    forward_log_likelihood(m, single({1.0, 2.0}));
    FAIL() << "expected ModelShapeError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelShapeError);
  }
}

TEST(Forward, MatchesPathEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + trial % 3;
    const size_t T = 1 + (trial / 3) % 6;
    const Hmm m = fixtures::random_hmm(rng, n, 2, trial % 2 == 1);
    const auto obs = fixtures::random_obs(rng, T, 2);
    const auto ref = oracle::enumerate_hmm_paths(m, obs);
    ASSERT_LE(rel_err(forward_log_likelihood(m, obs), ref.log_sum), 1e-9) << "trial " << trial;
  }
}

TEST(Viterbi, MatchesPathEnumeration) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + trial % 3;
    const size_t T = 1 + (trial / 3) % 6;
    const Hmm m = fixtures::random_hmm(rng, n, 2, trial % 2 == 1);
    const auto obs = fixtures::random_obs(rng, T, 2);
    const auto ref = oracle::enumerate_hmm_paths(m, obs);
    const auto got = viterbi_decode(m, obs);
    ASSERT_LE(rel_err(got.log_prob, ref.best_score), 1e-9) << "trial " << trial;
    ASSERT_EQ(got.states, ref.best_path) << "trial " << trial;
    ASSERT_LE(got.log_prob, forward_log_likelihood(m, obs) + 1e-12);
  }
}

TEST(Viterbi, SingleStatePathIsAllZeros) {
  Hmm m = make_left_to_right(1, 1);
  ObservationSeq obs(1);
  double expected = 0.0;
  for (double x : {0.1, -0.4, 0.9}) {
    obs.push_back(std::vector<double>{x});
    expected += m.emissions[0].log_density(std::vector<double>{x});
  }
  const auto r = viterbi_decode(m, obs);
  EXPECT_EQ(r.states, (std::vector<int>{0, 0, 0}));
  EXPECT_NEAR(r.log_prob, expected, 1e-12);
}

TEST(Viterbi, TwoStateThreeObservationsExact) {
  std::mt19937_64 rng(5);
  const Hmm m = fixtures::random_hmm(rng, 2, 2);
  const auto obs = fixtures::random_obs(rng, 3, 2);
  const auto ref = oracle::enumerate_hmm_paths(m, obs);
  const auto got = viterbi_decode(m, obs);
  EXPECT_EQ(got.states, ref.best_path);
  EXPECT_NEAR(got.log_prob, ref.best_score, 1e-12);
}

TEST(Viterbi, TiesGoToLexicographicallySmallerPath) {
  // Identical emissions and a 50/50 split make [0,0] and [0,1] score equally.
  Hmm m = make_left_to_right(2, 1, 0.5);
  m.log_trans[1][1] = 0.0;
  m.emissions[1] = m.emissions[0];
  ObservationSeq obs(1);
  obs.push_back(std::vector<double>{0.0});
  obs.push_back(std::vector<double>{0.0});
  EXPECT_EQ(viterbi_decode(m, obs).states, (std::vector<int>{0, 0}));
}

TEST(BaumWelch, SingleStateConvergesToSampleMoments) {
  std::mt19937_64 rng(3);
  std::vector<ObservationSeq> segs;
  double sum = 0.0, sum2 = 0.0;
  size_t count = 0;
  for (int s = 0; s < 5; ++s) {
    auto o = fixtures::random_obs(rng, 7, 1);
    for (size_t t = 0; t < o.size(); ++t) {
      sum += o[t][0];
      sum2 += o[t][0] * o[t][0];
      ++count;
    }
    segs.push_back(std::move(o));
  }
  const double mean = sum / static_cast<double>(count);
  const double var = sum2 / static_cast<double>(count) - mean * mean;
  TrainOptions opt;
  opt.max_iters = 1;
  const auto r = baum_welch_train(make_left_to_right(1, 1), segs, opt);
  EXPECT_NEAR(r.model.emissions[0].mean[0], mean, 1e-9);
  EXPECT_NEAR(r.model.emissions[0].var[0], var, 1e-9);
}

TEST(BaumWelch, IdenticalObservationsUseFlooredVariance) {
  std::vector<ObservationSeq> segs;
  for (int s = 0; s < 3; ++s) {
    ObservationSeq o(2);
    for (int t = 0; t < 4; ++t) o.push_back(std::vector<double>{1.0, 2.0});
    segs.push_back(std::move(o));
  }
  const auto r = baum_welch_train(flat_start(2, segs), segs);
  for (const auto& e : r.model.emissions) {
    for (double v : e.var) EXPECT_DOUBLE_EQ(v, kDefaultVarFloor);
  }
}

TEST(BaumWelch, ShortSegmentThrows) {
  std::mt19937_64 rng(1);
  std::vector<ObservationSeq> segs{fixtures::random_obs(rng, 2, 2)};
  try {
    baum_welch_train(make_left_to_right(3, 2), segs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SegmentTooShort);
  }
}

namespace {

std::vector<ObservationSeq> sample_from(const Hmm& m, std::mt19937_64& rng, size_t count, size_t len) {
  std::vector<ObservationSeq> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  for (size_t s = 0; s < count; ++s) {
    ObservationSeq o(m.dim());
    size_t state = 0;
    std::vector<double> v(m.dim());
    for (size_t t = 0; t < len; ++t) {
      for (size_t d = 0; d < m.dim(); ++d) {
        v[d] = m.emissions[state].mean[d] + std::sqrt(m.emissions[state].var[d]) * z(rng);
      }
      o.push_back(v);
      if (state + 1 < m.n_states() && u(rng) > std::exp(m.log_trans[state][state])) ++state;
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

TEST(BaumWelch, LikelihoodNeverDecreasesAndStructureHolds) {
  std::mt19937_64 rng(21);
  const Hmm truth = fixtures::random_hmm(rng, 2, 3);
  const auto segs = sample_from(truth, rng, 200, 12);
  TrainOptions opt;
  opt.max_iters = 20;
  opt.tol = 0.0;
  const auto r = baum_welch_train(flat_start(2, segs), segs, opt);
  ASSERT_GE(r.log_likelihoods.size(), 2u);
  for (size_t i = 1; i < r.log_likelihoods.size(); ++i) {
    EXPECT_GE(r.log_likelihoods[i], r.log_likelihoods[i - 1] - 1e-8) << "iteration " << i;
  }
  EXPECT_NO_THROW(r.model.validate());
  EXPECT_EQ(r.model.log_trans[1][0], kLogZero);
}

TEST(BaumWelch, TrainingImprovesHeldOutLikelihood) {
  std::mt19937_64 rng(22);
  Hmm truth = fixtures::random_hmm(rng, 3, 3);
  for (size_t i = 0; i < 3; ++i) truth.emissions[i].mean[0] = 3.0 * static_cast<double>(i);
  const auto train = sample_from(truth, rng, 100, 15);
  const auto held = sample_from(truth, rng, 50, 15);
  const Hmm init = make_left_to_right(3, 3);
  const auto r = baum_welch_train(init, train);
  double before = 0.0, after = 0.0;
  for (const auto& o : held) {
    before += forward_log_likelihood(init, o);
    after += forward_log_likelihood(r.model, o);
  }
  EXPECT_GT(after, before);
}

TEST(BaumWelch, Deterministic) {
  std::mt19937_64 rng(23);
  const Hmm truth = fixtures::random_hmm(rng, 3, 2);
  const auto segs = sample_from(truth, rng, 40, 10);
  const auto a = baum_welch_train(flat_start(3, segs), segs);
  const auto b = baum_welch_train(flat_start(3, segs), segs);
  EXPECT_TRUE(a.model == b.model);
  EXPECT_EQ(a.log_likelihoods, b.log_likelihoods);
}

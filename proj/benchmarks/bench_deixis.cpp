#include <benchmark/benchmark.h>

#include <random>

#include "deixis/generator.hpp"
#include "deixis/pipeline.hpp"
#include "deixis/training.hpp"
#include "fixtures.hpp"

using namespace deixis;

namespace {

const MapContext& campus() {
  static const MapContext m = MapContext::load(std::string(DEIXIS_DATA_DIR) + "/campus.json");
  return m;
}

std::vector<SessionRecord> corpus(int n, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n_sessions = n;
  cfg.seed = seed;
  std::vector<SessionRecord> out;
  for (auto& gs : generate_synthetic(cfg, campus())) out.push_back(std::move(gs.record));
  return out;
}

const ModelFile& model() {
  static const ModelFile m = train_models(corpus(60, 11), EngineConfig{});
  return m;
}

std::shared_ptr<const Engine> engine() {
  static const auto e = std::make_shared<const Engine>(EngineConfig{}, model(), campus(), Lexicon::builtin());
  return e;
}

const SessionRecord& session() {
  static const SessionRecord r = corpus(1, 12).front();
  return r;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto m = fixtures::random_hmm(rng, 4, FeatureVector::kDims);
  const auto obs = fixtures::random_obs(rng, static_cast<size_t>(state.range(0)), FeatureVector::kDims);
  for (auto _ : state) benchmark::DoNotOptimize(forward_log_likelihood(m, obs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(30)->Arg(300);

static void BM_Viterbi(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto m = fixtures::random_hmm(rng, 4, FeatureVector::kDims);
  const auto obs = fixtures::random_obs(rng, static_cast<size_t>(state.range(0)), FeatureVector::kDims);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(m, obs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(30)->Arg(300);

static void BM_Features(benchmark::State& state) {
  const auto& rec = session();
  for (auto _ : state) benchmark::DoNotOptimize(session_features(rec, 30.0, 1.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rec.samples.size()));
}
BENCHMARK(BM_Features);

static void BM_CompositeDecode(benchmark::State& state) {
  const auto f = session_features(session(), 30.0, 1.0);
  const auto& e = *engine();
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_continuous(e.network(), e.model().models, f, {static_cast<int>(state.range(0)), true}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.size()));
}
BENCHMARK(BM_CompositeDecode)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_DecodeSession(benchmark::State& state) {
  const auto& rec = session();
  const auto e = engine();
  for (auto _ : state) benchmark::DoNotOptimize(decode_session(e, rec));
}
BENCHMARK(BM_DecodeSession)->Unit(benchmark::kMillisecond);

// Cost of one incoming sample in a live session, commits included.
static void BM_LiveSample(benchmark::State& state) {
  const auto events = replay_events(session());
  const auto e = engine();
  size_t k = 0;
  auto live = std::make_unique<LiveSession>(e);
  for (auto _ : state) {
    if (k == events.size()) {
      state.PauseTiming();
      live = std::make_unique<LiveSession>(e);
      k = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(live->handle(events[k++]));
  }
}
BENCHMARK(BM_LiveSample)->Unit(benchmark::kMicrosecond);

static void BM_Train(benchmark::State& state) {
  const auto recs = corpus(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(train_models(recs, EngineConfig{}));
}
BENCHMARK(BM_Train)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

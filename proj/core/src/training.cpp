#include "deixis/training.hpp"

#include "deixis/error.hpp"

namespace deixis {

Point2 calibrated_rest_centroid(std::span<const TrajectorySample> grid, double calibration) {
  if (grid.empty()) throw Error(ErrorKind::EmptyTrajectory, "rest centroid of an empty trajectory");
  size_t n = 1;
  while (n < grid.size() && grid[n].t - grid.front().t <= calibration + 1e-9) ++n;
  return estimate_rest_centroid(grid.first(n));
}

std::vector<FeatureVector> session_features(const SessionRecord& rec, double rate_hz, double calibration) {
  const auto grid = resample(rec.samples, rate_hz);
  return extract_features(grid, calibrated_rest_centroid(grid, calibration));
}

std::map<PhonemeKind, std::vector<ObservationSeq>> collect_training_segments(
    std::span<const SessionRecord> sessions, double rate_hz, double calibration, const ModelTopology& min_frames) {
  std::map<PhonemeKind, std::vector<ObservationSeq>> out;
  for (const auto& rec : sessions) {
    if (rec.truth_segments.empty()) continue;
    const auto features = session_features(rec, rate_hz, calibration);
    const auto obs = to_observations(features);
    size_t f = 0;
    for (size_t i = 0; i < rec.truth_segments.size(); ++i) {
      const auto& seg = rec.truth_segments[i];
      const bool last = i + 1 == rec.truth_segments.size();
      while (f < features.size() && features[f].t < seg.t0) ++f;
      const size_t begin = f;
      while (f < features.size() && (features[f].t < seg.t1 || (last && features[f].t <= seg.t1))) ++f;
      auto need = min_frames.find(seg.phoneme);
      const size_t min_len = need == min_frames.end() ? 1 : static_cast<size_t>(need->second);
      if (f - begin >= min_len) out[seg.phoneme].push_back(obs.slice(begin, f));
    }
  }
  return out;
}

ModelFile train_models(std::span<const SessionRecord> sessions, const EngineConfig& cfg, TrainingReport* report) {
  const auto segments = collect_training_segments(sessions, cfg.rate_hz, cfg.rest_calibration, cfg.topology);
  ModelFile out;
  out.topology = cfg.topology;
  for (const auto& [kind, n_states] : cfg.topology) {
    auto it = segments.find(kind);
    if (it == segments.end() || it->second.empty()) {
      throw Error(ErrorKind::MissingTrainingData,
                  "corpus has no usable '" + std::string(to_string(kind)) + "' segments");
    }
    const Hmm init = flat_start(static_cast<size_t>(n_states), it->second, cfg.train.var_floor);
    auto result = baum_welch_train(init, it->second, cfg.train);
    out.final_log_likelihood[kind] = result.log_likelihoods.back();
    if (report) {
      report->log_likelihoods[kind] = result.log_likelihoods;
      report->segment_counts[kind] = it->second.size();
    }
    out.models[kind] = std::move(result.model);
  }
  return out;
}

}  // namespace deixis

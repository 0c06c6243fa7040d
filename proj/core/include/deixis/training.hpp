#pragma once

#include <map>
#include <span>
#include <vector>

#include "deixis/config.hpp"
#include "deixis/session.hpp"

namespace deixis {

// Rest centroid of a resampled stream: estimate_rest_centroid over the
// samples of its first `calibration` seconds.
Point2 calibrated_rest_centroid(std::span<const TrajectorySample> grid, double calibration);

// Features of a whole recorded session as the decoder sees them.
std::vector<FeatureVector> session_features(const SessionRecord& rec, double rate_hz, double calibration);

// Truth-labeled observation segments per phoneme. Segments shorter than
// `min_frames[kind]` frames are skipped.
std::map<PhonemeKind, std::vector<ObservationSeq>> collect_training_segments(
    std::span<const SessionRecord> sessions, double rate_hz, double calibration, const ModelTopology& min_frames);

struct TrainingReport {
  std::map<PhonemeKind, std::vector<double>> log_likelihoods;
  std::map<PhonemeKind, size_t> segment_counts;
};

// Flat start plus Baum-Welch for every phoneme of the topology. Throws
// MissingTrainingData naming the first phoneme without usable segments.
ModelFile train_models(std::span<const SessionRecord> sessions, const EngineConfig& cfg,
                       TrainingReport* report = nullptr);

}  // namespace deixis

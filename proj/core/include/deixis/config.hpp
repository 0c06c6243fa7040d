#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "deixis/fusion.hpp"
#include "deixis/hmm.hpp"
#include "deixis/kinematics.hpp"
#include "deixis/morphology.hpp"
#include "deixis/semantics.hpp"

namespace deixis {

// Streaming commitment parameters (LiveSession).
struct LiveParams {
  // Frames between provisional decodes.
  int stride_frames = 6;
  // Trailing Rest needed before a phrase is committed.
  double commit_rest = 1.5;
  // Rest kept after the phrase when cutting the committed window.
  double rest_keep = 0.75;
  // Uncommitted data beyond this is committed unconditionally.
  double horizon = 8.0;
};

struct EngineConfig {
  double rate_hz = kDefaultRateHz;
  // The rest centroid is estimated over the first `rest_calibration` seconds
  // of a session (sessions open at rest).
  double rest_calibration = 1.0;
  HoldParams holds;
  ModelTopology topology = default_topology();
  PenaltyConfig penalties;
  int nbest = 10;
  ClosureParams closure;
  bool fusion = true;
  // Shortest stroke accepted from the n-best list (0 disables).
  double min_stroke = 0.3;
  // Merge path strokes split without a pause.
  bool merge_continuous = true;
  CoOccurrenceModel cooccurrence = CoOccurrenceModel::defaults();
  SemanticsConfig semantics;
  TrainOptions train;
  LiveParams live;
  double overlap_min = 0.5;
  // Extra lexicon entries merged over the built-in lists.
  std::optional<std::string> lexicon_path;

  // Overrides from a JSON document; unknown keys raise ParseError.
  void merge_json_text(std::string_view text);
  static EngineConfig load(const std::string& path);
  std::string to_json_text() const;
};

struct ModelFile {
  ModelTopology topology;
  PhonemeModels models;
  // Per-phoneme training log-likelihood after the last iteration.
  std::map<PhonemeKind, double> final_log_likelihood;
};

// Doubles are written in shortest round-trip form and -inf as null, so a
// save/load cycle is bit-exact.
std::string model_to_json_text(const ModelFile& model);
ModelFile model_from_json_text(std::string_view text);
void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace deixis

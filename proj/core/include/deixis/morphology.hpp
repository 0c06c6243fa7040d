#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "deixis/hmm.hpp"
#include "deixis/kinematics.hpp"
#include "deixis/segments.hpp"

namespace deixis {

using ModelTopology = std::map<PhonemeKind, int>;

// Preparation, retraction and point get three states; contour, rest and
// circle get four.
ModelTopology default_topology();

struct NetworkEdge {
  PhonemeKind from;
  PhonemeKind to;
  double log_penalty = 0.0;
};

struct PenaltyConfig {
  double uniform = -1.0;
  std::map<std::pair<PhonemeKind, PhonemeKind>, double> overrides;
};

struct MorphNetwork {
  std::vector<PhonemeKind> nodes;
  std::vector<NetworkEdge> edges;
  PhonemeKind start = PhonemeKind::Rest;
  PhonemeKind end = PhonemeKind::Rest;

  std::optional<double> penalty(PhonemeKind from, PhonemeKind to) const;
  bool has_node(PhonemeKind k) const;
  // A label sequence is valid when it starts at `start`, ends at `end` and
  // every consecutive pair is an edge.
  bool is_valid_walk(std::span<const PhonemeKind> labels) const;
};

// Rest -> Preparation -> stroke; stroke -> {Retraction, Preparation, any
// stroke}; Retraction -> Rest.
MorphNetwork build_default_network(const ModelTopology& topology, const PenaltyConfig& penalties = {});

using PhonemeModels = std::map<PhonemeKind, Hmm>;

struct Hypothesis {
  std::vector<StrokeSegment> segments;
  double log_prob = kLogZero;

  std::vector<PhonemeKind> labels() const;
};

struct DecodeOptions {
  int nbest = 10;
  // When set, hypotheses must finish in the last state of the end node;
  // otherwise any composite state may be final (partial hypotheses).
  bool require_rest_end = true;
};

// Token-passing Viterbi over the composite graph of phoneme HMMs joined by
// network edges. Each state keeps up to `nbest` tokens with distinct label
// histories, so the best hypothesis is exact and the rest are the usual
// token-passing approximation of the N best label sequences.
std::vector<Hypothesis> decode_observations(const MorphNetwork& network, const PhonemeModels& models,
                                            const ObservationSeq& obs, std::span<const double> frame_times,
                                            double frame_period, const DecodeOptions& options);

// Features must be uniform-rate. When `positions` is given (same length as
// features) each segment receives its covered path points.
std::vector<Hypothesis> decode_continuous(const MorphNetwork& network, const PhonemeModels& models,
                                          std::span<const FeatureVector> features,
                                          const DecodeOptions& options,
                                          std::span<const TrajectorySample> positions = {});

struct ClosureParams {
  double eps_close = 0.05;
  double theta_turn = 5.0;
};

// Contour/Circle disambiguation by endpoint proximity and net turning.
StrokeSegment classify_closure(StrokeSegment segment, const ClosureParams& params = {});

// A decoded stroke that is mostly a velocity hold (>= `min_cover` of its
// frames in a sub-v_hold run of at least min_dwell) and runs straight into
// another stroke is the next stroke's pre-stroke hold: it becomes
// Preparation, merged into a preceding Preparation. Frame indices index
// `features`; t0/t1 and path points are carried over.
std::vector<StrokeSegment> absorb_pre_stroke_holds(std::vector<StrokeSegment> segments,
                                                   std::span<const FeatureVector> features, const HoldParams& params,
                                                   double min_cover = 0.8);

// Index of the best hypothesis whose strokes all span at least
// `min_frames`; 0 when none does.
size_t first_with_min_stroke(std::span<const Hypothesis> hyps, int min_frames);

// Adjacent Contour/Circle strokes with no velocity dip below v_hold across
// their junction (checked over +-2 frames) are one stroke split at a
// curvature change. They are merged and the closure test rerun.
std::vector<StrokeSegment> merge_continuous_strokes(std::vector<StrokeSegment> segments,
                                                    std::span<const FeatureVector> features, const HoldParams& holds,
                                                    const ClosureParams& closure);

std::vector<GesturePhrase> segment_phrases(std::span<const StrokeSegment> segments, int first_id = 0);

}  // namespace deixis

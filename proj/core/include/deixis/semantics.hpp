#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deixis/context.hpp"
#include "deixis/fusion.hpp"
#include "deixis/lexicon.hpp"
#include "deixis/segments.hpp"

namespace deixis {

enum class DeixisCategory { Transitive, Intransitive };
enum class DeixisSubclass { Nominal, Spatial, Iconic, Initial, Medial, Final };

std::string_view to_string(DeixisCategory c);
std::string_view to_string(DeixisSubclass s);
std::optional<DeixisCategory> deixis_category_from_string(std::string_view name);
std::optional<DeixisSubclass> deixis_subclass_from_string(std::string_view name);

constexpr DeixisCategory category_of(DeixisSubclass s) {
  return s == DeixisSubclass::Nominal || s == DeixisSubclass::Spatial || s == DeixisSubclass::Iconic
             ? DeixisCategory::Transitive
             : DeixisCategory::Intransitive;
}

struct DeixisLabel {
  DeixisCategory category = DeixisCategory::Transitive;
  DeixisSubclass subclass = DeixisSubclass::Spatial;
  double confidence = 0.0;

  friend bool operator==(const DeixisLabel&, const DeixisLabel&) = default;
};

struct SemanticsConfig {
  double point_radius = 0.04;
  double path_buffer = 0.03;
  double iconic_buffer = 0.03;
  double iconic_threshold = 0.6;
  // A stroke is synchronous with its speech when t0 <= evidence t0 + sync_tol.
  double sync_tol = 0.1;
  double clause_gap = 1.5;
  double demotion_penalty = 0.3;
  double no_evidence_confidence = 0.3;
};

// Best iconic_match_score over the objects named in `resolution`, with the
// winning object id (lowest id on ties).
struct IconicMatch {
  double score = 0.0;
  std::optional<ObjectId> object;
};
IconicMatch best_iconic_match(const StrokeSegment& stroke, const ReferenceResolution& resolution,
                              const MapContext& ctx, const SemanticsConfig& cfg);

// `evidence` is already restricted to the stroke's alignment window.
DeixisLabel classify_deixis(const StrokeSegment& stroke, std::span<const KeywordToken> evidence,
                            const ReferenceResolution& resolution, const std::optional<HoldSegment>& pre_hold,
                            const SemanticsConfig& cfg, double iconic_score = 0.0);

struct LabeledStroke {
  StrokeSegment stroke;
  DeixisLabel deixis;
  ReferenceResolution reference;
  std::vector<KeywordToken> evidence;
  std::optional<HoldSegment> pre_hold;
};

// Geometric reference of a stroke before any deixis decision: point strokes
// resolve at their dwell location, contours as paths, circles as enclosures.
ReferenceResolution resolve_stroke(const StrokeSegment& stroke, const MapContext& ctx, const SemanticsConfig& cfg);

// Splits tokens between strokes (each token goes to the co-occurring stroke
// whose interval is nearest its onset, earlier stroke on ties), classifies
// every stroke and adjusts references to the label (iconic strokes bind to
// the traced object, intransitive point references become areas).
std::vector<LabeledStroke> label_strokes(std::span<const StrokeSegment> strokes, std::span<const KeywordToken> tokens,
                                         std::span<const HoldSegment> holds, const MapContext& ctx,
                                         const AlignmentWindow& window, const SemanticsConfig& cfg);

enum class ComplexKind { TransitiveComplex, IntransitiveComplex };
std::string_view to_string(ComplexKind k);

struct MotionComplex {
  ComplexKind kind = ComplexKind::IntransitiveComplex;
  // Indices into the labeled stroke list, in temporal order.
  std::vector<size_t> strokes;
  std::optional<ReferenceResolution> source;
  std::optional<ReferenceResolution> path;
  std::optional<ReferenceResolution> destination;
  bool explicit_path = false;
  // Labeled stroke supplying the moved object(s), if any.
  std::optional<size_t> theme;
};

// Clauses split the token stream at gaps >= clause_gap.
std::vector<std::vector<KeywordToken>> split_clauses(std::span<const KeywordToken> tokens, double clause_gap);

// Runs of intransitive strokes become complexes. A run closed by a later
// Final point, or by a Transitive point when the run waited for speech (a
// pre-stroke hold or speech leading the stroke), is a TransitiveComplex;
// otherwise it is an IntransitiveComplex. A run never crosses a clause
// boundary of `clause_tokens`.
std::vector<MotionComplex> parse_motion_complexes(std::span<const LabeledStroke> labeled,
                                                  std::span<const KeywordToken> clause_tokens, const MapContext& ctx,
                                                  const SemanticsConfig& cfg);

enum class CommandVerb { Select, Locate, Move };
std::string_view to_string(CommandVerb v);
std::optional<CommandVerb> command_verb_from_string(std::string_view name);

struct Command {
  CommandVerb verb = CommandVerb::Select;
  std::vector<ObjectId> object_ids;
  std::optional<ReferenceResolution> source;
  std::optional<ReferenceResolution> path;
  std::optional<ReferenceResolution> destination;
  bool explicit_path = false;
  int phrase_id = 0;
  double t_issued = 0.0;
  // Provenance: stroke ids and the texts/onsets of the tokens behind them.
  std::vector<int> stroke_ids;
  std::vector<KeywordToken> tokens;
};

struct Diagnostic {
  std::string message;
  std::vector<int> stroke_ids;
};

struct CommandSet {
  std::vector<Command> commands;
  std::vector<Diagnostic> diagnostics;
};

CommandSet emit_commands(std::span<const LabeledStroke> labeled, std::span<const MotionComplex> complexes,
                         int phrase_id);

}  // namespace deixis

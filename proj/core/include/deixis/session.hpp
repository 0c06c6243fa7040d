#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deixis/context.hpp"
#include "deixis/kinematics.hpp"
#include "deixis/lexicon.hpp"
#include "deixis/segments.hpp"
#include "deixis/semantics.hpp"

namespace deixis {

struct TruthSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  PhonemeKind phoneme = PhonemeKind::Rest;

  friend bool operator==(const TruthSegment&, const TruthSegment&) = default;
};

struct TruthDeixis {
  int seg = 0;  // index into the truth segments
  DeixisCategory category = DeixisCategory::Transitive;
  DeixisSubclass subclass = DeixisSubclass::Spatial;

  friend bool operator==(const TruthDeixis&, const TruthDeixis&) = default;
};

// Reference as far as command scoring cares: its kind and object ids.
struct RefSignature {
  ReferenceKind kind = ReferenceKind::None;
  std::vector<ObjectId> object_ids;

  friend bool operator==(const RefSignature&, const RefSignature&) = default;
};

struct TruthCommand {
  CommandVerb verb = CommandVerb::Select;
  std::vector<ObjectId> object_ids;
  std::optional<RefSignature> source;
  std::optional<RefSignature> path;  // only set for explicit paths
  std::optional<RefSignature> destination;

  friend bool operator==(const TruthCommand&, const TruthCommand&) = default;
};

RefSignature signature_of(const ReferenceResolution& r);
TruthCommand signature_of(const Command& c);
// Stable text key used for multiset matching of commands.
std::string signature_key(const TruthCommand& c);

struct SessionRecord {
  std::string id;
  std::string map_ref;
  std::optional<std::uint64_t> seed;
  std::vector<TrajectorySample> samples;
  std::vector<TimedWord> tokens;
  std::vector<TruthSegment> truth_segments;
  std::vector<TruthDeixis> truth_deixis;
  std::vector<TruthCommand> truth_commands;
  // Lines of unrecognized kinds, kept verbatim and written back unchanged.
  std::vector<std::string> unknown_lines;

  bool has_truth() const { return !truth_segments.empty(); }
  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

// Rounds to the 6-decimal grid used by the file format.
double quantize6(double v);

std::string session_to_text(const SessionRecord& rec);
// Throws ParseError (with the 1-based line number) on malformed lines and
// TimeOrderError on decreasing sample times or overlapping truth segments.
SessionRecord session_from_text(std::string_view text, std::vector<std::string>* warnings = nullptr);

void save_session(const std::string& path, const SessionRecord& rec);
SessionRecord load_session(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace deixis

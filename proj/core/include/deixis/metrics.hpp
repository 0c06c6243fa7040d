#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deixis/segments.hpp"
#include "deixis/semantics.hpp"
#include "deixis/session.hpp"

namespace deixis {

struct DecodedSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  PhonemeKind kind = PhonemeKind::Rest;
  std::optional<DeixisSubclass> deixis;
};

// What evaluate() needs from one decoded session.
struct DecodedSession {
  std::string id;
  // The decoded tiling, every phoneme kind.
  std::vector<DecodedSegment> segments;
  std::vector<TruthCommand> commands;
};

// Confusion columns: the six phonemes, then "no match".
inline constexpr size_t kConfusionCols = kAllPhonemes.size() + 1;

struct Metrics {
  double segment_correct_rate = 1.0;
  double deixis_accuracy = 1.0;
  double command_accuracy = 1.0;
  // Row = truth phoneme, column = matched decoded phoneme or no match.
  std::array<std::array<int, kConfusionCols>, kAllPhonemes.size()> confusion{};

  int truth_strokes = 0;
  int correct_strokes = 0;
  int deixis_total = 0;
  int deixis_correct = 0;
  int commands_matched = 0;
  int commands_total = 0;
};

// One-to-one greedy matching of truth segments to decoded segments by
// temporal overlap (overlap must reach overlap_min of the truth duration;
// larger overlaps first, earlier decoded segment on ties). A truth stroke is
// correct when its match has the same phoneme. Deixis accuracy is taken over
// correctly matched strokes with a truth label; command accuracy is the
// multiset intersection of command signatures over max(|truth|, |decoded|).
// Throws SessionMismatch unless decoded[i].id == truth[i].id for all i.
Metrics evaluate(std::span<const DecodedSession> decoded, std::span<const SessionRecord> truth,
                 double overlap_min = 0.5);

}  // namespace deixis

#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "deixis/geometry.hpp"

namespace deixis {

enum class PhonemeKind { Rest, Preparation, Point, Contour, Circle, Retraction };

inline constexpr std::array<PhonemeKind, 6> kAllPhonemes = {
    PhonemeKind::Rest,   PhonemeKind::Preparation, PhonemeKind::Point,
    PhonemeKind::Contour, PhonemeKind::Circle,     PhonemeKind::Retraction};

constexpr bool is_stroke(PhonemeKind k) {
  return k == PhonemeKind::Point || k == PhonemeKind::Contour || k == PhonemeKind::Circle;
}

std::string_view to_string(PhonemeKind k);
// Accepts the lowercase names produced by to_string; nullopt otherwise.
std::optional<PhonemeKind> phoneme_from_string(std::string_view name);

// One decoded phoneme interval. Despite the name this covers every phoneme
// kind, not only strokes: a decode produces a tiling of the stream.
struct StrokeSegment {
  int id = 0;
  PhonemeKind kind = PhonemeKind::Rest;
  double t0 = 0.0;
  double t1 = 0.0;
  double score = 0.0;
  Polyline path_points;
  bool closure = false;
  // Frame indices into the decoded stream, [first_frame, end_frame).
  int first_frame = 0;
  int end_frame = 0;
};

enum class HoldKind { PreStroke, PostStroke, Isolated };

std::string_view to_string(HoldKind k);

struct HoldSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  HoldKind kind = HoldKind::Isolated;
  std::optional<int> anchor_stroke;
};

struct GesturePhrase {
  int id = 0;
  std::vector<StrokeSegment> segments;
  std::vector<HoldSegment> holds;

  double t0() const { return segments.empty() ? 0.0 : segments.front().t0; }
  double t1() const { return segments.empty() ? 0.0 : segments.back().t1; }
};

}  // namespace deixis

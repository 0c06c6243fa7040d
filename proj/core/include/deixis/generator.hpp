#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deixis/context.hpp"
#include "deixis/session.hpp"

namespace deixis {

// Utterance templates the generator can script. Each fixes the strokes, the
// intended deixis labels, the words and the intended command.
enum class PhrasePlan {
  NominalPoint,     // "this building" + point on it
  SpatialPoint,     // "right here" + point on empty ground
  IconicContour,    // "this road" + contour tracing it
  MedialContour,    // "go through the building" + contour across it
  SpatialCircle,    // "around here" + circle around a building
  FromHereToHere,   // "go from here to here": held initial point, final point
  TakeOutOf,        // "take this car out of the lot": point, then contour
  PathThenPoint,    // "go along ... this building": held contour, then point
};
inline constexpr size_t kPlanCount = 8;
std::string_view to_string(PhrasePlan p);

struct SyntheticConfig {
  int n_sessions = 10;
  int phrases_per_session = 3;
  double noise_sigma = 0.004;
  double rest_jitter = 0.005;
  double rate_hz = 30.0;
  double keyword_offset_mean = 0.25;
  double keyword_offset_sd = 0.3;
  double keyword_offset_min = -0.3;
  double keyword_offset_max = 1.2;
  double drop_keyword_prob = 0.07;
  std::array<double, kPlanCount> phrase_plan_weights = {0.18, 0.10, 0.10, 0.14, 0.12, 0.12, 0.12, 0.12};
  std::uint64_t seed = 1;
};

struct GeneratedStroke {
  size_t truth_seg = 0;
  PhrasePlan plan = PhrasePlan::NominalPoint;
  // Indices into record.tokens of the words scripted for this stroke.
  std::vector<size_t> tokens;
  bool keywords_dropped = false;
};

struct GeneratedSession {
  SessionRecord record;
  std::vector<GeneratedStroke> strokes;
};

// Session `index` of the corpus; independent of every other index.
GeneratedSession generate_session(const SyntheticConfig& cfg, const MapContext& map, int index,
                                  const std::string& map_ref = "");

std::vector<GeneratedSession> generate_synthetic(const SyntheticConfig& cfg, const MapContext& map,
                                                 const std::string& map_ref = "");

struct ScriptOptions {
  double noise_sigma = 0.0;
  // Fixed word onset after stroke onset; no keyword drops.
  double keyword_offset = 0.15;
  bool pre_holds = true;
};

// One phrase per plan, in order, with deterministic word timing.
GeneratedSession scripted_session(const MapContext& map, std::span<const PhrasePlan> plans, std::uint64_t seed,
                                  const ScriptOptions& options = {}, const std::string& map_ref = "");

}  // namespace deixis

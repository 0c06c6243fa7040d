#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "deixis/kinematics.hpp"
#include "deixis/lexicon.hpp"
#include "deixis/morphology.hpp"

namespace deixis {

struct AlignmentWindow {
  double pre = 0.2;
  double post = 1.0;
};

// Stroke credit: each stroke earns the best affinity among its co-occurring
// tokens. Token credit: each token earns the best affinity among the strokes
// it co-occurs with, so splitting a stroke earns nothing extra.
enum class BonusCredit { Stroke, Token };

struct CoOccurrenceModel {
  AlignmentWindow window;
  std::map<std::pair<PhonemeKind, KeywordClass>, double> affinity;
  // Added once per PreStroke hold whose window holds a token that has
  // positive affinity to the anchored stroke's kind.
  double holds_bonus = 0.5;
  BonusCredit credit = BonusCredit::Stroke;

  double bonus(PhonemeKind stroke, KeywordClass cls) const;

  static CoOccurrenceModel defaults();
};

// Tokens whose [t0, t1] meets the closed interval [t0 - pre, t1 + post].
std::vector<KeywordToken> cooccurring_tokens(double t0, double t1, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window);
std::vector<KeywordToken> cooccurring_tokens(const StrokeSegment& segment, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window);
std::vector<KeywordToken> cooccurring_tokens(const HoldSegment& hold, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window);

// Bonus earned by one segmentation: stroke or token credit plus the hold
// bonuses. Holds are only considered when `features` is non-empty.
double fusion_bonus(std::span<const StrokeSegment> segments, std::span<const KeywordToken> tokens,
                    const CoOccurrenceModel& model, std::span<const FeatureVector> features = {},
                    const HoldParams& holds = {});

// Adds each hypothesis's bonus to its log_prob and stable-sorts best first.
// When no hypothesis earns anything the input order is returned untouched.
std::vector<Hypothesis> rescore_nbest(std::vector<Hypothesis> hypotheses, std::span<const KeywordToken> tokens,
                                      const CoOccurrenceModel& model,
                                      std::span<const FeatureVector> features = {},
                                      const HoldParams& holds = {});

}  // namespace deixis

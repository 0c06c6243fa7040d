#include "deixis/fusion.hpp"

#include <algorithm>

namespace deixis {

double CoOccurrenceModel::bonus(PhonemeKind stroke, KeywordClass cls) const {
  if (cls == KeywordClass::Other) return 0.0;
  auto it = affinity.find({stroke, cls});
  return it == affinity.end() ? 0.0 : it->second;
}

CoOccurrenceModel CoOccurrenceModel::defaults() {
  CoOccurrenceModel m;
  for (auto c : {KeywordClass::Noun, KeywordClass::Pronoun, KeywordClass::DeicticMarker,
                 KeywordClass::SpatialAdverbial, KeywordClass::PrepInitial, KeywordClass::PrepFinal}) {
    m.affinity[{PhonemeKind::Point, c}] = 2.0;
  }
  for (auto c : {KeywordClass::PrepMedial, KeywordClass::MotionVerb, KeywordClass::SpatialAdverbial}) {
    m.affinity[{PhonemeKind::Contour, c}] = 2.0;
  }
  for (auto c : {KeywordClass::SpatialAdverbial, KeywordClass::Noun}) {
    m.affinity[{PhonemeKind::Circle, c}] = 2.0;
  }
  return m;
}

std::vector<KeywordToken> cooccurring_tokens(double t0, double t1, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window) {
  const double lo = t0 - window.pre;
  const double hi = t1 + window.post;
  std::vector<KeywordToken> out;
  for (const auto& tok : tokens) {
    if (tok.t1 >= lo && tok.t0 <= hi) out.push_back(tok);
  }
  return out;
}

std::vector<KeywordToken> cooccurring_tokens(const StrokeSegment& segment, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window) {
  return cooccurring_tokens(segment.t0, segment.t1, tokens, window);
}

std::vector<KeywordToken> cooccurring_tokens(const HoldSegment& hold, std::span<const KeywordToken> tokens,
                                             const AlignmentWindow& window) {
  return cooccurring_tokens(hold.t0, hold.t1, tokens, window);
}

double fusion_bonus(std::span<const StrokeSegment> segments, std::span<const KeywordToken> tokens,
                    const CoOccurrenceModel& model, std::span<const FeatureVector> features,
                    const HoldParams& holds) {
  if (tokens.empty()) return 0.0;
  double total = 0.0;
  if (model.credit == BonusCredit::Token) {
    for (const auto& tok : tokens) {
      double best = 0.0;
      for (const auto& seg : segments) {
        if (!is_stroke(seg.kind)) continue;
        if (tok.t1 >= seg.t0 - model.window.pre && tok.t0 <= seg.t1 + model.window.post) {
          best = std::max(best, model.bonus(seg.kind, tok.cls));
        }
      }
      total += best;
    }
  } else {
    for (const auto& seg : segments) {
      if (!is_stroke(seg.kind)) continue;
      double best = 0.0;
      bool any = false;
      for (const auto& tok : cooccurring_tokens(seg, tokens, model.window)) {
        const double b = model.bonus(seg.kind, tok.cls);
        if (!any || b > best) best = b;
        any = true;
      }
      total += best;
    }
  }
  if (features.empty() || model.holds_bonus == 0.0) return total;
  for (const auto& hold : detect_holds(features, segments, holds)) {
    if (hold.kind != HoldKind::PreStroke || !hold.anchor_stroke) continue;
    const auto anchor = std::find_if(segments.begin(), segments.end(),
                                     [&](const StrokeSegment& s) { return s.id == *hold.anchor_stroke; });
    if (anchor == segments.end()) continue;
    for (const auto& tok : cooccurring_tokens(hold, tokens, model.window)) {
      if (model.bonus(anchor->kind, tok.cls) > 0.0) {
        total += model.holds_bonus;
        break;
      }
    }
  }
  return total;
}

std::vector<Hypothesis> rescore_nbest(std::vector<Hypothesis> hypotheses, std::span<const KeywordToken> tokens,
                                      const CoOccurrenceModel& model, std::span<const FeatureVector> features,
                                      const HoldParams& holds) {
  // Nothing earned: the input order stands, sorted or not.
  bool any = false;
  for (auto& h : hypotheses) {
    const double b = fusion_bonus(h.segments, tokens, model, features, holds);
    h.log_prob += b;
    any = any || b != 0.0;
  }
  if (!any) return hypotheses;
  std::stable_sort(hypotheses.begin(), hypotheses.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.log_prob > b.log_prob; });
  return hypotheses;
}

}  // namespace deixis

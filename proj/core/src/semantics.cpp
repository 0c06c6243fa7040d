#include "deixis/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deixis {

std::string_view to_string(DeixisCategory c) {
  return c == DeixisCategory::Transitive ? "transitive" : "intransitive";
}

std::string_view to_string(DeixisSubclass s) {
  switch (s) {
    case DeixisSubclass::Nominal: return "nominal";
    case DeixisSubclass::Spatial: return "spatial";
    case DeixisSubclass::Iconic: return "iconic";
    case DeixisSubclass::Initial: return "initial";
    case DeixisSubclass::Medial: return "medial";
    case DeixisSubclass::Final: return "final";
  }
  return "spatial";
}

std::optional<DeixisCategory> deixis_category_from_string(std::string_view name) {
  if (name == "transitive") return DeixisCategory::Transitive;
  if (name == "intransitive") return DeixisCategory::Intransitive;
  return std::nullopt;
}

std::optional<DeixisSubclass> deixis_subclass_from_string(std::string_view name) {
  for (auto s : {DeixisSubclass::Nominal, DeixisSubclass::Spatial, DeixisSubclass::Iconic, DeixisSubclass::Initial,
                 DeixisSubclass::Medial, DeixisSubclass::Final}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ComplexKind k) {
  return k == ComplexKind::TransitiveComplex ? "transitive" : "intransitive";
}

std::string_view to_string(CommandVerb v) {
  switch (v) {
    case CommandVerb::Select: return "select";
    case CommandVerb::Locate: return "locate";
    case CommandVerb::Move: return "move";
  }
  return "select";
}

std::optional<CommandVerb> command_verb_from_string(std::string_view name) {
  for (auto v : {CommandVerb::Select, CommandVerb::Locate, CommandVerb::Move}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

namespace {

double onset_gap(const KeywordToken& tok, double t0, double t1) {
  if (tok.t0 < t0) return t0 - tok.t0;
  if (tok.t0 > t1) return tok.t0 - t1;
  return 0.0;
}

DeixisLabel make_label(DeixisSubclass s, double confidence) {
  return {category_of(s), s, std::clamp(confidence, 0.0, 1.0)};
}

bool has_class(std::span<const KeywordToken> ev, std::initializer_list<KeywordClass> classes) {
  return std::any_of(ev.begin(), ev.end(), [&](const KeywordToken& t) {
    return std::find(classes.begin(), classes.end(), t.cls) != classes.end();
  });
}

}  // namespace

IconicMatch best_iconic_match(const StrokeSegment& stroke, const ReferenceResolution& resolution,
                              const MapContext& ctx, const SemanticsConfig& cfg) {
  IconicMatch best;
  if (stroke.path_points.size() < 2) return best;
  std::vector<ObjectId> ids = resolution.object_ids;
  std::sort(ids.begin(), ids.end());
  for (ObjectId id : ids) {
    const MapObject* obj = ctx.find(id);
    if (!obj) continue;
    const double s = iconic_match_score(stroke.path_points, *obj, cfg.iconic_buffer);
    if (!best.object || s > best.score) {
      best.score = s;
      best.object = id;
    }
  }
  return best;
}

DeixisLabel classify_deixis(const StrokeSegment& stroke, std::span<const KeywordToken> evidence,
                            const ReferenceResolution& resolution, const std::optional<HoldSegment>& pre_hold,
                            const SemanticsConfig& cfg, double iconic_score) {
  (void)pre_hold;  // holds shape motion complexes, not single-stroke labels
  std::vector<KeywordToken> ev;
  for (const auto& t : evidence) {
    if (t.cls != KeywordClass::Other) ev.push_back(t);
  }
  if (ev.empty()) return make_label(DeixisSubclass::Spatial, cfg.no_evidence_confidence);

  // Intransitive: spatial prepositions or motion verbs.
  const KeywordToken* prep = nullptr;
  for (const auto& t : ev) {
    if (!is_preposition(t.cls)) continue;
    if (!prep || onset_gap(t, stroke.t0, stroke.t1) < onset_gap(*prep, stroke.t0, stroke.t1)) prep = &t;
  }
  if (prep || has_class(ev, {KeywordClass::MotionVerb})) {
    if (!prep) return make_label(DeixisSubclass::Medial, 1.0);
    switch (prep->cls) {
      case KeywordClass::PrepInitial:
        if (stroke.kind == PhonemeKind::Point) return make_label(DeixisSubclass::Initial, 1.0);
        return make_label(DeixisSubclass::Medial, 1.0 - cfg.demotion_penalty);
      case KeywordClass::PrepMedial: return make_label(DeixisSubclass::Medial, 1.0);
      default: return make_label(DeixisSubclass::Final, 1.0);
    }
  }

  if (stroke.kind == PhonemeKind::Contour && iconic_score >= cfg.iconic_threshold) {
    return make_label(DeixisSubclass::Iconic, 1.0);
  }
  const bool naming = has_class(ev, {KeywordClass::Noun, KeywordClass::Pronoun, KeywordClass::DeicticMarker});
  if (naming && resolution.kind == ReferenceKind::Object) return make_label(DeixisSubclass::Nominal, 1.0);
  if (has_class(ev, {KeywordClass::SpatialAdverbial}) || resolution.kind == ReferenceKind::Area) {
    return make_label(DeixisSubclass::Spatial, 1.0);
  }
  if (resolution.kind == ReferenceKind::Object) {
    return make_label(DeixisSubclass::Nominal, 1.0 - cfg.demotion_penalty);
  }
  return make_label(DeixisSubclass::Spatial, 1.0 - cfg.demotion_penalty);
}

ReferenceResolution resolve_stroke(const StrokeSegment& stroke, const MapContext& ctx, const SemanticsConfig& cfg) {
  const auto& pts = stroke.path_points;
  if (pts.empty()) return {};
  switch (stroke.kind) {
    case PhonemeKind::Point: {
      // The dwell at the end of the reach carries the referent.
      const size_t from = pts.size() / 2;
      Point2 acc;
      for (size_t i = from; i < pts.size(); ++i) acc = acc + pts[i];
      return resolve_point(ctx, acc * (1.0 / static_cast<double>(pts.size() - from)), cfg.point_radius);
    }
    case PhonemeKind::Contour:
      if (pts.size() < 2) return resolve_point(ctx, pts.front(), cfg.point_radius);
      return resolve_path(ctx, pts, cfg.path_buffer);
    case PhonemeKind::Circle: return resolve_enclosure(ctx, pts);
    default: return {};
  }
}

std::vector<LabeledStroke> label_strokes(std::span<const StrokeSegment> strokes, std::span<const KeywordToken> tokens,
                                         std::span<const HoldSegment> holds, const MapContext& ctx,
                                         const AlignmentWindow& window, const SemanticsConfig& cfg) {
  std::vector<const StrokeSegment*> active;
  for (const auto& s : strokes) {
    if (is_stroke(s.kind)) active.push_back(&s);
  }
  std::vector<std::vector<KeywordToken>> evidence(active.size());
  for (const auto& tok : tokens) {
    size_t best = active.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < active.size(); ++k) {
      const auto& s = *active[k];
      if (tok.t1 < s.t0 - window.pre || tok.t0 > s.t1 + window.post) continue;
      const double gap = onset_gap(tok, s.t0, s.t1);
      if (gap < best_gap) {
        best_gap = gap;
        best = k;
      }
    }
    if (best < active.size()) evidence[best].push_back(tok);
  }

  std::vector<LabeledStroke> out;
  for (size_t k = 0; k < active.size(); ++k) {
    LabeledStroke ls;
    ls.stroke = *active[k];
    ls.evidence = std::move(evidence[k]);
    for (const auto& h : holds) {
      if (h.kind == HoldKind::PreStroke && h.anchor_stroke == ls.stroke.id) ls.pre_hold = h;
    }
    ls.reference = resolve_stroke(ls.stroke, ctx, cfg);
    IconicMatch iconic;
    if (ls.stroke.kind == PhonemeKind::Contour) iconic = best_iconic_match(ls.stroke, ls.reference, ctx, cfg);
    ls.deixis = classify_deixis(ls.stroke, ls.evidence, ls.reference, ls.pre_hold, cfg, iconic.score);
    if (ls.deixis.subclass == DeixisSubclass::Iconic && iconic.object) {
      ls.reference.kind = ReferenceKind::Object;
      ls.reference.object_ids = {*iconic.object};
      ls.reference.score = iconic.score;
    }
    if (ls.deixis.category == DeixisCategory::Intransitive && ls.reference.kind == ReferenceKind::Object) {
      ls.reference.kind = ReferenceKind::Area;
      ls.reference.radius = cfg.point_radius;
    }
    out.push_back(std::move(ls));
  }
  return out;
}

std::vector<std::vector<KeywordToken>> split_clauses(std::span<const KeywordToken> tokens, double clause_gap) {
  std::vector<std::vector<KeywordToken>> clauses;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i == 0 || tokens[i].t0 - tokens[i - 1].t1 >= clause_gap) clauses.emplace_back();
    clauses.back().push_back(tokens[i]);
  }
  return clauses;
}

namespace {

bool is_intransitive(const LabeledStroke& s) { return s.deixis.category == DeixisCategory::Intransitive; }

bool is_final_point(const LabeledStroke& s) {
  return s.deixis.subclass == DeixisSubclass::Final && s.stroke.kind == PhonemeKind::Point;
}

// Speech onset the stroke is compared against: its earliest content word.
std::optional<double> evidence_onset(const LabeledStroke& s) {
  std::optional<double> onset;
  for (const auto& t : s.evidence) {
    if (t.cls != KeywordClass::Other && (!onset || t.t0 < *onset)) onset = t.t0;
  }
  return onset;
}

}  // namespace

std::vector<MotionComplex> parse_motion_complexes(std::span<const LabeledStroke> labeled,
                                                  std::span<const KeywordToken> clause_tokens, const MapContext& ctx,
                                                  const SemanticsConfig& cfg) {
  // Clause index per stroke: that of its first evidence token, else inherited.
  const auto clauses = split_clauses(clause_tokens, cfg.clause_gap);
  std::vector<int> clause_of(labeled.size(), 0);
  for (size_t i = 0; i < labeled.size(); ++i) {
    int c = i > 0 ? clause_of[i - 1] : 0;
    if (!labeled[i].evidence.empty()) {
      const double t = labeled[i].evidence.front().t0;
      for (size_t k = 0; k < clauses.size(); ++k) {
        if (clauses[k].front().t0 <= t) c = static_cast<int>(k);
      }
    }
    clause_of[i] = c;
  }

  std::vector<MotionComplex> out;
  std::vector<char> used(labeled.size(), 0);
  auto theme_before = [&](size_t first) -> std::optional<size_t> {
    if (first == 0 || used[first - 1] || clause_of[first - 1] != clause_of[first]) return std::nullopt;
    const auto& prev = labeled[first - 1];
    if (prev.deixis.subclass == DeixisSubclass::Nominal) return first - 1;
    return std::nullopt;
  };

  size_t i = 0;
  while (i < labeled.size()) {
    if (!is_intransitive(labeled[i])) {
      ++i;
      continue;
    }
    MotionComplex mc;
    if (is_final_point(labeled[i])) {
      mc.kind = ComplexKind::TransitiveComplex;
      mc.strokes = {i};
      mc.destination = labeled[i].reference;
      mc.theme = theme_before(i);
      if (mc.theme) used[*mc.theme] = 1;
      used[i] = 1;
      out.push_back(std::move(mc));
      ++i;
      continue;
    }

    std::vector<size_t> run{i};
    size_t j = i + 1;
    while (j < labeled.size() && is_intransitive(labeled[j]) && !is_final_point(labeled[j]) &&
           labeled[j].deixis.subclass != DeixisSubclass::Initial && clause_of[j] == clause_of[i]) {
      run.push_back(j++);
    }

    bool waited = false;
    for (size_t k : run) {
      if (labeled[k].pre_hold) waited = true;
      const auto onset = evidence_onset(labeled[k]);
      if (onset && labeled[k].stroke.t0 > *onset + cfg.sync_tol) waited = true;
    }
    bool closes = false;
    if (j < labeled.size() && labeled[j].stroke.kind == PhonemeKind::Point && clause_of[j] == clause_of[i]) {
      closes = is_final_point(labeled[j]) ||
               (labeled[j].deixis.category == DeixisCategory::Transitive && waited);
    }

    mc.theme = theme_before(i);
    if (mc.theme) used[*mc.theme] = 1;
    mc.strokes = run;
    if (labeled[run.front()].deixis.subclass == DeixisSubclass::Initial) mc.source = labeled[run.front()].reference;
    for (size_t k : run) {
      if (labeled[k].deixis.subclass == DeixisSubclass::Initial) continue;
      mc.path = labeled[k].reference;
      mc.explicit_path = labeled[k].stroke.kind != PhonemeKind::Point;
      break;
    }
    if (closes) {
      mc.kind = ComplexKind::TransitiveComplex;
      mc.strokes.push_back(j);
      mc.destination = labeled[j].reference;
      if (!mc.path && mc.source && mc.source->point && mc.destination->point) {
        mc.path = resolve_path(ctx, Polyline{*mc.source->point, *mc.destination->point}, cfg.path_buffer);
        mc.explicit_path = false;
      }
    } else {
      mc.kind = ComplexKind::IntransitiveComplex;
    }
    for (size_t k : mc.strokes) used[k] = 1;
    i = mc.strokes.back() + 1;
    out.push_back(std::move(mc));
  }
  return out;
}

CommandSet emit_commands(std::span<const LabeledStroke> labeled, std::span<const MotionComplex> complexes,
                         int phrase_id) {
  CommandSet result;
  std::vector<char> consumed(labeled.size(), 0);
  // (first stroke index, command) pairs, sorted at the end.
  std::vector<std::pair<size_t, Command>> staged;

  auto provenance = [&](Command& c, size_t k) {
    c.stroke_ids.push_back(labeled[k].stroke.id);
    c.tokens.insert(c.tokens.end(), labeled[k].evidence.begin(), labeled[k].evidence.end());
    c.t_issued = std::max(c.t_issued, labeled[k].stroke.t1);
  };

  for (const auto& mc : complexes) {
    std::vector<size_t> members = mc.strokes;
    if (mc.theme) members.insert(members.begin(), *mc.theme);
    for (size_t k : members) consumed[k] = 1;
    std::vector<int> ids;
    for (size_t k : members) ids.push_back(labeled[k].stroke.id);
    if (!mc.source && !mc.path && !mc.destination) {
      result.diagnostics.push_back({"motion complex without source, path or destination dropped", ids});
      continue;
    }
    Command c;
    c.verb = CommandVerb::Move;
    c.phrase_id = phrase_id;
    if (mc.theme) c.object_ids = labeled[*mc.theme].reference.object_ids;
    c.source = mc.source;
    c.path = mc.path;
    c.destination = mc.destination;
    c.explicit_path = mc.explicit_path;
    for (size_t k : members) provenance(c, k);
    staged.emplace_back(members.front(), std::move(c));
  }

  for (size_t k = 0; k < labeled.size(); ++k) {
    if (consumed[k]) continue;
    const auto& ls = labeled[k];
    if (ls.deixis.category != DeixisCategory::Transitive) continue;
    Command c;
    c.phrase_id = phrase_id;
    if (ls.deixis.subclass == DeixisSubclass::Spatial) {
      c.verb = CommandVerb::Locate;
      c.object_ids = ls.reference.object_ids;
      c.destination = ls.reference;
    } else {
      if (ls.reference.object_ids.empty()) {
        result.diagnostics.push_back({"selection without a resolved object dropped", {ls.stroke.id}});
        continue;
      }
      c.verb = CommandVerb::Select;
      c.object_ids = ls.reference.object_ids;
    }
    provenance(c, k);
    staged.emplace_back(k, std::move(c));
  }

  std::stable_sort(staged.begin(), staged.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [k, c] : staged) result.commands.push_back(std::move(c));
  return result;
}

}  // namespace deixis

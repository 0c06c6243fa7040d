#include "deixis/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "deixis/error.hpp"
#include "deixis/fusion.hpp"
#include "deixis/training.hpp"

namespace deixis {

using nlohmann::json;

Engine::Engine(EngineConfig config, ModelFile model, MapContext map, Lexicon lexicon)
    : config_(std::move(config)), model_(std::move(model)), map_(std::move(map)), lexicon_(std::move(lexicon)) {
  network_ = build_default_network(model_.topology, config_.penalties);
  for (auto kind : network_.nodes) {
    auto it = model_.models.find(kind);
    if (it == model_.models.end()) {
      throw Error(ErrorKind::ModelShapeError, "model file lacks phoneme '" + std::string(to_string(kind)) + "'");
    }
    if (it->second.dim() != FeatureVector::kDims) {
      throw Error(ErrorKind::ModelShapeError, "model '" + std::string(to_string(kind)) + "' has dimension " +
                                                  std::to_string(it->second.dim()) + ", features have " +
                                                  std::to_string(FeatureVector::kDims));
    }
    it->second.validate(0.0);
  }
}

namespace {

json q(double v) { return quantize6(v); }

json ref_json(const std::optional<ReferenceResolution>& r) {
  if (!r) return nullptr;
  json j = {{"kind", to_string(r->kind)}, {"objects", r->object_ids}, {"score", q(r->score)}};
  if (r->point) j["point"] = {q(r->point->x), q(r->point->y)};
  if (r->kind == ReferenceKind::Area && r->radius > 0.0) j["radius"] = q(r->radius);
  return j;
}

json tokens_json(const std::vector<KeywordToken>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) arr.push_back({{"text", t.text}, {"t0", q(t.t0)}, {"class", to_string(t.cls)}});
  return arr;
}

}  // namespace

std::string phrase_record_to_json(const PhraseRecord& p) {
  json segs = json::array();
  for (const auto& s : p.segments) {
    segs.push_back({{"id", s.id},
                    {"phoneme", to_string(s.kind)},
                    {"t0", q(s.t0)},
                    {"t1", q(s.t1)},
                    {"closure", s.closure},
                    {"score", q(s.score)}});
  }
  json holds = json::array();
  for (const auto& h : p.holds) {
    holds.push_back({{"kind", to_string(h.kind)},
                     {"t0", q(h.t0)},
                     {"t1", q(h.t1)},
                     {"anchor", h.anchor_stroke ? json(*h.anchor_stroke) : json(nullptr)}});
  }
  json strokes = json::array();
  for (const auto& ls : p.strokes) {
    strokes.push_back({{"id", ls.stroke.id},
                       {"category", to_string(ls.deixis.category)},
                       {"subclass", to_string(ls.deixis.subclass)},
                       {"confidence", q(ls.deixis.confidence)},
                       {"reference", ref_json(ls.reference)},
                       {"evidence", tokens_json(ls.evidence)},
                       {"pre_hold", ls.pre_hold.has_value()}});
  }
  json complexes = json::array();
  for (const auto& c : p.complexes) {
    json ids = json::array();
    for (size_t i : c.strokes) ids.push_back(p.strokes[i].stroke.id);
    complexes.push_back({{"kind", to_string(c.kind)},
                         {"strokes", ids},
                         {"source", ref_json(c.source)},
                         {"path", ref_json(c.path)},
                         {"destination", ref_json(c.destination)},
                         {"explicit_path", c.explicit_path},
                         {"theme", c.theme ? json(p.strokes[*c.theme].stroke.id) : json(nullptr)}});
  }
  json commands = json::array();
  for (const auto& c : p.commands.commands) {
    commands.push_back({{"verb", to_string(c.verb)},
                        {"objects", c.object_ids},
                        {"source", ref_json(c.source)},
                        {"path", ref_json(c.path)},
                        {"destination", ref_json(c.destination)},
                        {"explicit_path", c.explicit_path},
                        {"t", q(c.t_issued)},
                        {"strokes", c.stroke_ids},
                        {"tokens", tokens_json(c.tokens)}});
  }
  json diags = json::array();
  for (const auto& d : p.commands.diagnostics) diags.push_back({{"message", d.message}, {"strokes", d.stroke_ids}});
  json j = {{"phrase", p.id},    {"segments", segs},   {"holds", holds},          {"strokes", strokes},
            {"complexes", complexes}, {"commands", commands}, {"diagnostics", diags}};
  return j.dump();
}

LiveSession::LiveSession(std::shared_ptr<const Engine> engine)
    : engine_(std::move(engine)), resampler_(engine_->config().rate_hz) {}

void LiveSession::reset() {
  resampler_.reset();
  grid_.clear();
  pending_.clear();
  last_token_end_ = -1e300;
  start_frame_ = 0;
  since_stride_ = 0;
  committed_until_ = -1e300;
  cursor_point_ = false;
  next_segment_id_ = 0;
  next_phrase_id_ = 0;
  phrases_.clear();
  windows_.clear();
}

std::vector<ServerMessage> LiveSession::handle(const ClientMessage& msg) {
  if (auto* s = std::get_if<SampleEvent>(&msg)) return push_sample(s->sample);
  if (auto* t = std::get_if<TokenEvent>(&msg)) return push_token(t->word);
  if (std::holds_alternative<ResetEvent>(msg)) {
    reset();
    return {};
  }
  auto out = flush();
  out.push_back(FlushedMsg{grid_.empty() ? 0.0 : frame_time(static_cast<long>(grid_.size()))});
  return out;
}

double LiveSession::frame_time(long k) const { return grid_time(grid_.front().t, k, engine_->config().rate_hz); }

std::vector<ServerMessage> LiveSession::push_sample(const TrajectorySample& s) {
  std::vector<ServerMessage> out;
  if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
    out.push_back(ErrorMsg{"sample has non-finite fields"});
    return out;
  }
  if (s.x < 0.0 || s.x > 1.0 || s.y < 0.0 || s.y > 1.0) {
    out.push_back(ErrorMsg{"sample position outside [0,1]"});
    return out;
  }
  if (resampler_.started() && s.t < resampler_.last_time()) {
    out.push_back(ErrorMsg{"sample at t=" + std::to_string(s.t) + " precedes the previous sample"});
    return out;
  }
  const size_t before = grid_.size();
  resampler_.push(s, grid_);
  for (size_t k = before; k < grid_.size(); ++k) on_new_frame(out);
  return out;
}

std::vector<ServerMessage> LiveSession::push_token(const TimedWord& w) {
  std::vector<ServerMessage> out;
  if (!std::isfinite(w.t0) || !std::isfinite(w.t1) || w.t0 > w.t1) {
    out.push_back(ErrorMsg{"token '" + w.text + "' has an invalid interval"});
    return out;
  }
  if (w.t0 < committed_until_) {
    out.push_back(ErrorMsg{"token '" + w.text + "' starts before committed time " + std::to_string(committed_until_)});
    return out;
  }
  if (w.t0 < last_token_end_) {
    out.push_back(ErrorMsg{"token '" + w.text + "' overlaps the previous token"});
    return out;
  }
  try {
    const TimedWord one[] = {w};
    auto spotted = spot_keywords(engine_->lexicon(), one, engine_->map());
    pending_.push_back(std::move(spotted.front()));
    last_token_end_ = w.t1;
  } catch (const Error& e) {
    out.push_back(ErrorMsg{e.what()});
  }
  return out;
}

std::vector<ServerMessage> LiveSession::flush() {
  std::vector<ServerMessage> out;
  if (static_cast<long>(grid_.size()) > start_frame_) commit(static_cast<long>(grid_.size()), out);
  since_stride_ = 0;
  return out;
}

void LiveSession::on_new_frame(std::vector<ServerMessage>& out) {
  if (++since_stride_ < engine_->config().live.stride_frames) return;
  since_stride_ = 0;
  provisional(out);
}

std::vector<FeatureVector> LiveSession::window_features(long first, long end) const {
  // Two frames of left context keep the window's first derivatives central.
  const long ctx = std::max(0L, first - 2);
  const std::span<const TrajectorySample> all(grid_);
  const auto centroid = calibrated_rest_centroid(all, engine_->config().rest_calibration);
  auto f = extract_features(all.subspan(static_cast<size_t>(ctx), static_cast<size_t>(end - ctx)), centroid);
  f.erase(f.begin(), f.begin() + (first - ctx));
  return f;
}

void LiveSession::provisional(std::vector<ServerMessage>& out) {
  const auto& cfg = engine_->config();
  const long end = static_cast<long>(grid_.size());
  const long n = end - start_frame_;
  if (n < 8) return;
  std::vector<Hypothesis> hyps;
  try {
    const auto features = window_features(start_frame_, end);
    hyps = decode_continuous(engine_->network(), engine_->model().models, features, {1, false});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::StreamTooShort) return;
    throw;
  }
  if (hyps.empty()) return;
  const auto& segs = hyps.front().segments;

  const bool point = segs.back().kind == PhonemeKind::Point;
  if (point != cursor_point_) {
    cursor_point_ = point;
    out.push_back(CursorMsg{point, grid_.back().t});
  }

  const double rate = cfg.rate_hz;
  const long keep = std::lround(cfg.live.rest_keep * rate);
  const bool all_rest =
      std::all_of(segs.begin(), segs.end(), [](const StrokeSegment& s) { return s.kind == PhonemeKind::Rest; });
  const auto& last = segs.back();
  const long rest_frames = last.end_frame - last.first_frame;
  if (!all_rest && last.kind == PhonemeKind::Rest && rest_frames >= std::lround(cfg.live.commit_rest * rate)) {
    commit(start_frame_ + last.first_frame + keep, out);
  } else if (all_rest && n > 2 * keep) {
    commit(end - keep, out);
  } else if (n >= std::lround(cfg.live.horizon * rate)) {
    commit(end, out);
  }
}

void LiveSession::commit(long cut, std::vector<ServerMessage>& out) {
  if (cut <= start_frame_) return;
  const auto& cfg = engine_->config();
  const long first = start_frame_;
  const double cut_time = frame_time(cut);

  std::vector<KeywordToken> tokens;
  auto split = std::partition_point(pending_.begin(), pending_.end(),
                                    [&](const KeywordToken& t) { return t.t0 < cut_time; });
  tokens.assign(pending_.begin(), split);
  pending_.erase(pending_.begin(), split);

  std::vector<StrokeSegment> segments;
  std::vector<FeatureVector> features;
  try {
    features = window_features(first, cut);
    const std::span<const TrajectorySample> positions(grid_.data() + first, static_cast<size_t>(cut - first));
    auto hyps = decode_continuous(engine_->network(), engine_->model().models, features, {cfg.nbest, true},
                                  positions);
    for (auto& h : hyps) {
      for (auto& s : h.segments) {
        if (s.kind == PhonemeKind::Contour || s.kind == PhonemeKind::Circle) s = classify_closure(std::move(s), cfg.closure);
      }
    }
    if (cfg.fusion && !tokens.empty()) hyps = rescore_nbest(std::move(hyps), tokens, cfg.cooccurrence, features, cfg.holds);
    const auto pick = first_with_min_stroke(hyps, static_cast<int>(std::lround(cfg.min_stroke * cfg.rate_hz)));
    segments = std::move(hyps[pick].segments);
    if (cfg.merge_continuous) segments = merge_continuous_strokes(std::move(segments), features, cfg.holds, cfg.closure);
    segments = absorb_pre_stroke_holds(std::move(segments), features, cfg.holds);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::StreamTooShort && e.kind() != ErrorKind::EmptyTrajectory) throw;
    // Too short for the network: the window can only be rest.
    StrokeSegment rest;
    rest.kind = PhonemeKind::Rest;
    rest.first_frame = 0;
    rest.end_frame = static_cast<int>(cut - first);
    for (long k = first; k < cut; ++k) rest.path_points.push_back(grid_[static_cast<size_t>(k)].pos());
    segments = {rest};
    features.clear();
  }

  // Session-wide ids and exact grid times, so windows tile without seams.
  for (auto& s : segments) {
    s.id = next_segment_id_++;
    s.t0 = frame_time(first + s.first_frame);
    s.t1 = frame_time(first + s.end_frame);
  }
  std::vector<HoldSegment> holds;
  if (!features.empty()) holds = detect_holds(features, segments, cfg.holds);

  for (auto& ph : segment_phrases(segments, next_phrase_id_)) {
    next_phrase_id_ = ph.id + 1;
    PhraseRecord rec;
    rec.id = ph.id;
    rec.segments = std::move(ph.segments);
    for (const auto& h : holds) {
      if (h.t0 >= rec.segments.front().t0 && h.t1 <= rec.segments.back().t1) rec.holds.push_back(h);
    }
    std::vector<StrokeSegment> strokes;
    for (const auto& s : rec.segments) {
      if (is_stroke(s.kind)) strokes.push_back(s);
    }
    rec.strokes = label_strokes(strokes, tokens, rec.holds, engine_->map(), cfg.cooccurrence.window, cfg.semantics);
    rec.complexes = parse_motion_complexes(rec.strokes, tokens, engine_->map(), cfg.semantics);
    rec.commands = emit_commands(rec.strokes, rec.complexes, rec.id);

    for (const auto& s : strokes) out.push_back(StrokeMsg{s.id, s.kind, s.t0, s.t1});
    for (const auto& ls : rec.strokes) {
      out.push_back(DeixisMsg{ls.stroke.id, ls.deixis.category, ls.deixis.subclass, ls.deixis.confidence});
    }
    for (const auto& c : rec.commands.commands) out.push_back(CommandMsg{signature_of(c), c.phrase_id, c.t_issued});
    out.push_back(PhraseMsg{phrase_record_to_json(rec)});
    phrases_.push_back(std::move(rec));
  }

  windows_.push_back({first, cut, std::move(segments)});
  start_frame_ = cut;
  committed_until_ = cut_time;
  since_stride_ = 0;
}

DecodedSession LiveSession::decoded(const std::string& id) const {
  DecodedSession d;
  d.id = id;
  std::map<int, DeixisSubclass> labels;
  for (const auto& p : phrases_) {
    for (const auto& ls : p.strokes) labels[ls.stroke.id] = ls.deixis.subclass;
    for (const auto& c : p.commands.commands) d.commands.push_back(signature_of(c));
  }
  for (const auto& w : windows_) {
    for (const auto& s : w.segments) {
      DecodedSegment ds{s.t0, s.t1, s.kind, std::nullopt};
      if (auto it = labels.find(s.id); it != labels.end()) ds.deixis = it->second;
      d.segments.push_back(ds);
    }
  }
  return d;
}

std::vector<ClientMessage> replay_events(const SessionRecord& record) {
  std::vector<ClientMessage> events;
  events.reserve(record.samples.size() + record.tokens.size());
  size_t i = 0, j = 0;
  while (i < record.samples.size() || j < record.tokens.size()) {
    if (j == record.tokens.size() || (i < record.samples.size() && record.samples[i].t <= record.tokens[j].t1)) {
      events.push_back(SampleEvent{record.samples[i++]});
    } else {
      events.push_back(TokenEvent{record.tokens[j++]});
    }
  }
  return events;
}

BatchResult decode_session(std::shared_ptr<const Engine> engine, const SessionRecord& record) {
  LiveSession live(std::move(engine));
  BatchResult out;
  for (const auto& ev : replay_events(record)) {
    auto msgs = live.handle(ev);
    out.messages.insert(out.messages.end(), msgs.begin(), msgs.end());
  }
  auto msgs = live.flush();
  out.messages.insert(out.messages.end(), msgs.begin(), msgs.end());
  out.phrases = live.phrases();
  out.windows = live.windows();
  out.decoded = live.decoded(record.id);
  return out;
}

}  // namespace deixis

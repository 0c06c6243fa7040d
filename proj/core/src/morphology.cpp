#include "deixis/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>
#include <unordered_map>

#include "deixis/error.hpp"

namespace deixis {

std::string_view to_string(PhonemeKind k) {
  switch (k) {
    case PhonemeKind::Rest: return "rest";
    case PhonemeKind::Preparation: return "preparation";
    case PhonemeKind::Point: return "point";
    case PhonemeKind::Contour: return "contour";
    case PhonemeKind::Circle: return "circle";
    case PhonemeKind::Retraction: return "retraction";
  }
  return "rest";
}

std::optional<PhonemeKind> phoneme_from_string(std::string_view name) {
  for (auto k : kAllPhonemes) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(HoldKind k) {
  switch (k) {
    case HoldKind::PreStroke: return "pre_stroke";
    case HoldKind::PostStroke: return "post_stroke";
    case HoldKind::Isolated: return "isolated";
  }
  return "isolated";
}

ModelTopology default_topology() {
  return {{PhonemeKind::Rest, 4},    {PhonemeKind::Preparation, 3}, {PhonemeKind::Point, 3},
          {PhonemeKind::Contour, 4}, {PhonemeKind::Circle, 4},      {PhonemeKind::Retraction, 3}};
}

std::optional<double> MorphNetwork::penalty(PhonemeKind from, PhonemeKind to) const {
  for (const auto& e : edges) {
    if (e.from == from && e.to == to) return e.log_penalty;
  }
  return std::nullopt;
}

bool MorphNetwork::has_node(PhonemeKind k) const {
  return std::find(nodes.begin(), nodes.end(), k) != nodes.end();
}

bool MorphNetwork::is_valid_walk(std::span<const PhonemeKind> labels) const {
  if (labels.empty() || labels.front() != start || labels.back() != end) return false;
  for (size_t i = 1; i < labels.size(); ++i) {
    if (!penalty(labels[i - 1], labels[i])) return false;
  }
  return true;
}

MorphNetwork build_default_network(const ModelTopology& topology, const PenaltyConfig& penalties) {
  for (auto k : kAllPhonemes) {
    auto it = topology.find(k);
    if (it == topology.end() || it->second <= 0) {
      throw Error(ErrorKind::IncompleteTopology, "topology lacks phoneme '" + std::string(to_string(k)) + "'");
    }
  }
  MorphNetwork net;
  net.nodes.assign(kAllPhonemes.begin(), kAllPhonemes.end());
  auto add = [&](PhonemeKind a, PhonemeKind b) {
    auto it = penalties.overrides.find({a, b});
    net.edges.push_back({a, b, it != penalties.overrides.end() ? it->second : penalties.uniform});
  };
  using P = PhonemeKind;
  add(P::Rest, P::Preparation);
  for (auto s : {P::Point, P::Contour, P::Circle}) add(P::Preparation, s);
  for (auto s : {P::Point, P::Contour, P::Circle}) {
    add(s, P::Retraction);
    add(s, P::Preparation);
    for (auto s2 : {P::Point, P::Contour, P::Circle}) add(s, s2);
  }
  add(P::Retraction, P::Rest);
  return net;
}

std::vector<PhonemeKind> Hypothesis::labels() const {
  std::vector<PhonemeKind> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.kind);
  return out;
}

namespace {

struct CompositeState {
  size_t node = 0;
  size_t local = 0;
  std::vector<double> mean;
  std::vector<double> inv_var;
  double log_norm = 0.0;
};

struct Arc {
  int src = 0;
  double weight = 0.0;
  bool enters_node = false;
};

struct Token {
  double score = kLogZero;
  int hist = 0;
  int seg = 0;
};

struct Candidate {
  double score;
  int hist;
  int seg;         // existing segment entry, or the parent entry when fresh
  double base;     // path score before the transition (fresh only)
  bool fresh;
};

struct SegEntry {
  size_t node;
  int start_frame;
  int prev;
  double base;
};

class LabelTrie {
 public:
  int child(int parent, size_t label) {
    const uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(parent + 1)) << 8) | label;
    auto [it, inserted] = index_.try_emplace(key, next_);
    if (inserted) ++next_;
    return it->second;
  }

 private:
  std::unordered_map<uint64_t, int> index_;
  int next_ = 0;
};

}  // namespace

std::vector<Hypothesis> decode_observations(const MorphNetwork& network, const PhonemeModels& models,
                                            const ObservationSeq& obs, std::span<const double> frame_times,
                                            double frame_period, const DecodeOptions& options) {
  if (options.nbest < 1) throw Error(ErrorKind::InvalidArgument, "nbest must be >= 1");
  if (frame_times.size() != obs.size()) {
    throw Error(ErrorKind::InvalidArgument, "frame_times and observations differ in length");
  }

  // Composite state layout.
  std::vector<CompositeState> states;
  std::vector<int> first_state(network.nodes.size());
  std::vector<const Hmm*> node_model(network.nodes.size());
  for (size_t p = 0; p < network.nodes.size(); ++p) {
    auto it = models.find(network.nodes[p]);
    if (it == models.end()) {
      throw Error(ErrorKind::IncompleteTopology,
                  "no model for phoneme '" + std::string(to_string(network.nodes[p])) + "'");
    }
    const Hmm& m = it->second;
    if (m.dim() != obs.dim()) {
      throw Error(ErrorKind::ModelShapeError, "model '" + std::string(to_string(network.nodes[p])) +
                                                  "' has dimension " + std::to_string(m.dim()) +
                                                  ", stream has " + std::to_string(obs.dim()));
    }
    node_model[p] = &m;
    first_state[p] = static_cast<int>(states.size());
    for (size_t s = 0; s < m.n_states(); ++s) {
      CompositeState cs;
      cs.node = p;
      cs.local = s;
      cs.mean = m.emissions[s].mean;
      cs.inv_var.resize(m.dim());
      for (size_t d = 0; d < m.dim(); ++d) {
        cs.inv_var[d] = 1.0 / m.emissions[s].var[d];
        cs.log_norm -= 0.5 * std::log(2.0 * std::numbers::pi * m.emissions[s].var[d]);
      }
      states.push_back(std::move(cs));
    }
  }
  auto node_index = [&](PhonemeKind k) -> int {
    for (size_t p = 0; p < network.nodes.size(); ++p) {
      if (network.nodes[p] == k) return static_cast<int>(p);
    }
    return -1;
  };
  const int start_node = node_index(network.start);
  const int end_node = node_index(network.end);
  if (start_node < 0 || end_node < 0) throw Error(ErrorKind::IncompleteTopology, "network lacks start/end node");

  const size_t n_ids = states.size();
  std::vector<std::vector<Arc>> incoming(n_ids);
  for (size_t p = 0; p < network.nodes.size(); ++p) {
    const Hmm& m = *node_model[p];
    for (size_t i = 0; i < m.n_states(); ++i) {
      for (size_t j = i; j < m.n_states() && j <= i + 1; ++j) {
        if (m.log_trans[i][j] == kLogZero) continue;
        incoming[static_cast<size_t>(first_state[p]) + j].push_back(
            {first_state[p] + static_cast<int>(i), m.log_trans[i][j], false});
      }
    }
  }
  for (const auto& e : network.edges) {
    const int p = node_index(e.from);
    const int q = node_index(e.to);
    if (p < 0 || q < 0) continue;
    const Hmm& mp = *node_model[static_cast<size_t>(p)];
    const Hmm& mq = *node_model[static_cast<size_t>(q)];
    const int last_p = first_state[static_cast<size_t>(p)] + static_cast<int>(mp.n_states()) - 1;
    for (size_t j = 0; j < mq.n_states(); ++j) {
      if (mq.log_init[j] == kLogZero) continue;
      incoming[static_cast<size_t>(first_state[static_cast<size_t>(q)]) + j].push_back(
          {last_p, e.log_penalty + mq.log_init[j], true});
    }
  }

  std::vector<char> is_final(n_ids, 0);
  if (options.require_rest_end) {
    const Hmm& me = *node_model[static_cast<size_t>(end_node)];
    is_final[static_cast<size_t>(first_state[static_cast<size_t>(end_node)]) + me.n_states() - 1] = 1;
  } else {
    std::fill(is_final.begin(), is_final.end(), 1);
  }

  // Minimal number of frames from an initial state to a final state.
  {
    std::vector<int> dist(n_ids, -1);
    std::deque<int> queue;
    const Hmm& ms = *node_model[static_cast<size_t>(start_node)];
    for (size_t j = 0; j < ms.n_states(); ++j) {
      if (ms.log_init[j] == kLogZero) continue;
      const int id = first_state[static_cast<size_t>(start_node)] + static_cast<int>(j);
      dist[static_cast<size_t>(id)] = 1;
      queue.push_back(id);
    }
    std::vector<std::vector<int>> outgoing(n_ids);
    for (size_t v = 0; v < n_ids; ++v) {
      for (const auto& a : incoming[v]) outgoing[static_cast<size_t>(a.src)].push_back(static_cast<int>(v));
    }
    int min_len = -1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      if (is_final[static_cast<size_t>(u)]) {
        min_len = dist[static_cast<size_t>(u)];
        break;
      }
      for (int v : outgoing[static_cast<size_t>(u)]) {
        if (dist[static_cast<size_t>(v)] < 0) {
          dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    if (min_len < 0 || obs.size() < static_cast<size_t>(min_len)) {
      throw Error(ErrorKind::StreamTooShort, "stream of " + std::to_string(obs.size()) +
                                                 " frames is shorter than the minimal path length " +
                                                 std::to_string(min_len));
    }
  }

  auto emission = [&](size_t id, std::span<const double> x) {
    const auto& cs = states[id];
    double acc = 0.0;
    for (size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - cs.mean[d];
      acc += diff * diff * cs.inv_var[d];
    }
    return cs.log_norm - 0.5 * acc;
  };

  const size_t nbest = static_cast<size_t>(options.nbest);
  const int T = static_cast<int>(obs.size());
  LabelTrie trie;
  std::vector<SegEntry> entries;
  std::vector<std::vector<Token>> cur(n_ids), next(n_ids);

  {
    const Hmm& ms = *node_model[static_cast<size_t>(start_node)];
    const int hist = trie.child(-1, static_cast<size_t>(start_node));
    for (size_t j = 0; j < ms.n_states(); ++j) {
      if (ms.log_init[j] == kLogZero) continue;
      const size_t id = static_cast<size_t>(first_state[static_cast<size_t>(start_node)]) + j;
      entries.push_back({static_cast<size_t>(start_node), 0, -1, 0.0});
      cur[id].push_back({ms.log_init[j] + emission(id, obs[0]), hist, static_cast<int>(entries.size()) - 1});
    }
  }

  std::vector<Candidate> cands;
  for (int t = 1; t < T; ++t) {
    const auto x = obs[static_cast<size_t>(t)];
    for (size_t id = 0; id < n_ids; ++id) {
      cands.clear();
      for (const auto& arc : incoming[id]) {
        for (const auto& tok : cur[static_cast<size_t>(arc.src)]) {
          const double s = tok.score + arc.weight;
          if (arc.enters_node) {
            cands.push_back({s, trie.child(tok.hist, states[id].node), tok.seg, tok.score, true});
          } else {
            cands.push_back({s, tok.hist, tok.seg, 0.0, false});
          }
        }
      }
      auto& out = next[id];
      out.clear();
      if (cands.empty()) continue;
      // Best candidate per label history, then the top nbest histories.
      std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.hist != b.hist ? a.hist < b.hist : a.score > b.score;
      });
      size_t w = 0;
      for (size_t r = 0; r < cands.size(); ++r) {
        if (w == 0 || cands[r].hist != cands[w - 1].hist) cands[w++] = cands[r];
      }
      cands.resize(w);
      std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.hist < b.hist;
      });
      if (cands.size() > nbest) cands.resize(nbest);
      const double e = emission(id, x);
      for (const auto& c : cands) {
        if (c.score == kLogZero) continue;
        int seg = c.seg;
        if (c.fresh) {
          entries.push_back({states[id].node, t, c.seg, c.base});
          seg = static_cast<int>(entries.size()) - 1;
        }
        out.push_back({c.score + e, c.hist, seg});
      }
    }
    cur.swap(next);
  }

  std::vector<Token> finals;
  for (size_t id = 0; id < n_ids; ++id) {
    if (!is_final[id]) continue;
    finals.insert(finals.end(), cur[id].begin(), cur[id].end());
  }
  std::stable_sort(finals.begin(), finals.end(), [](const Token& a, const Token& b) {
    return a.hist != b.hist ? a.hist < b.hist : a.score > b.score;
  });
  {
    size_t w = 0;
    for (size_t r = 0; r < finals.size(); ++r) {
      if (w == 0 || finals[r].hist != finals[w - 1].hist) finals[w++] = finals[r];
    }
    finals.resize(w);
  }
  std::stable_sort(finals.begin(), finals.end(), [](const Token& a, const Token& b) {
    return a.score != b.score ? a.score > b.score : a.hist < b.hist;
  });
  if (finals.size() > nbest) finals.resize(nbest);

  std::vector<Hypothesis> result;
  for (const auto& tok : finals) {
    if (tok.score == kLogZero) continue;
    std::vector<const SegEntry*> chain;
    for (int e = tok.seg; e >= 0; e = entries[static_cast<size_t>(e)].prev) {
      chain.push_back(&entries[static_cast<size_t>(e)]);
    }
    std::reverse(chain.begin(), chain.end());
    Hypothesis h;
    h.log_prob = tok.score;
    for (size_t k = 0; k < chain.size(); ++k) {
      StrokeSegment seg;
      seg.id = static_cast<int>(k);
      seg.kind = network.nodes[chain[k]->node];
      seg.first_frame = chain[k]->start_frame;
      seg.end_frame = k + 1 < chain.size() ? chain[k + 1]->start_frame : T;
      seg.t0 = frame_times[static_cast<size_t>(seg.first_frame)];
      seg.t1 = seg.end_frame < T ? frame_times[static_cast<size_t>(seg.end_frame)]
                                 : frame_times[static_cast<size_t>(T - 1)] + frame_period;
      const double end_score = k + 1 < chain.size() ? chain[k + 1]->base : tok.score;
      seg.score = end_score - chain[k]->base;
      h.segments.push_back(std::move(seg));
    }
    result.push_back(std::move(h));
  }
  return result;
}

std::vector<Hypothesis> decode_continuous(const MorphNetwork& network, const PhonemeModels& models,
                                          std::span<const FeatureVector> features,
                                          const DecodeOptions& options,
                                          std::span<const TrajectorySample> positions) {
  if (features.empty()) throw Error(ErrorKind::StreamTooShort, "empty feature stream");
  const auto obs = to_observations(features);
  std::vector<double> times(features.size());
  for (size_t i = 0; i < features.size(); ++i) times[i] = features[i].t;
  const double period = features.size() > 1
                            ? (features.back().t - features.front().t) / static_cast<double>(features.size() - 1)
                            : 1.0 / kDefaultRateHz;
  auto hyps = decode_observations(network, models, obs, times, period, options);
  if (!positions.empty()) {
    if (positions.size() != features.size()) {
      throw Error(ErrorKind::InvalidArgument, "positions and features differ in length");
    }
    for (auto& h : hyps) {
      for (auto& s : h.segments) {
        s.path_points.clear();
        for (int f = s.first_frame; f < s.end_frame; ++f) {
          s.path_points.push_back(positions[static_cast<size_t>(f)].pos());
        }
      }
    }
  }
  return hyps;
}

StrokeSegment classify_closure(StrokeSegment segment, const ClosureParams& params) {
  if (segment.kind != PhonemeKind::Contour && segment.kind != PhonemeKind::Circle) {
    throw Error(ErrorKind::WrongKind, "closure applies to contour/circle strokes only, got '" +
                                          std::string(to_string(segment.kind)) + "'");
  }
  const auto& pts = segment.path_points;
  bool closed = false;
  if (pts.size() >= 3 && distance(pts.front(), pts.back()) <= params.eps_close) {
    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const double step = std::min(0.02, 0.1 * std::hypot(max_x - min_x, max_y - min_y));
    closed = std::abs(geom::net_turning(pts, step)) >= params.theta_turn;
  }
  segment.closure = closed;
  segment.kind = closed ? PhonemeKind::Circle : PhonemeKind::Contour;
  return segment;
}

std::vector<StrokeSegment> absorb_pre_stroke_holds(std::vector<StrokeSegment> segments,
                                                   std::span<const FeatureVector> features, const HoldParams& params,
                                                   double min_cover) {
  if (features.size() < 2 || segments.size() < 2) return segments;
  const double dt = features[1].t - features[0].t;
  const auto min_frames = static_cast<size_t>(std::ceil(params.min_dwell / dt - 1e-9));
  std::vector<char> held(features.size(), 0);
  for (size_t i = 0; i < features.size();) {
    size_t j = i;
    while (j < features.size() && features[j].speed < params.v_hold) ++j;
    if (j - i >= min_frames) std::fill(held.begin() + static_cast<long>(i), held.begin() + static_cast<long>(j), 1);
    i = j == i ? i + 1 : j;
  }

  std::vector<StrokeSegment> out;
  for (size_t k = 0; k < segments.size(); ++k) {
    auto& s = segments[k];
    if (is_stroke(s.kind) && k + 1 < segments.size() && is_stroke(segments[k + 1].kind)) {
      const auto a = static_cast<size_t>(std::clamp(s.first_frame, 0, static_cast<int>(held.size())));
      const auto b = static_cast<size_t>(std::clamp(s.end_frame, 0, static_cast<int>(held.size())));
      const auto n = static_cast<double>(std::count(held.begin() + static_cast<long>(a), held.begin() + static_cast<long>(b), 1));
      if (b > a && n >= min_cover * static_cast<double>(b - a)) {
        s.kind = PhonemeKind::Preparation;
        s.closure = false;
        if (!out.empty() && out.back().kind == PhonemeKind::Preparation) {
          auto& prev = out.back();
          prev.end_frame = s.end_frame;
          prev.t1 = s.t1;
          prev.score += s.score;
          prev.path_points.insert(prev.path_points.end(), s.path_points.begin(), s.path_points.end());
          continue;
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

size_t first_with_min_stroke(std::span<const Hypothesis> hyps, int min_frames) {
  for (size_t i = 0; i < hyps.size(); ++i) {
    const auto& segs = hyps[i].segments;
    if (std::none_of(segs.begin(), segs.end(), [&](const StrokeSegment& s) {
          return is_stroke(s.kind) && s.end_frame - s.first_frame < min_frames;
        }))
      return i;
  }
  return 0;
}

std::vector<StrokeSegment> merge_continuous_strokes(std::vector<StrokeSegment> segments,
                                                    std::span<const FeatureVector> features, const HoldParams& holds,
                                                    const ClosureParams& closure) {
  auto path_like = [](PhonemeKind k) { return k == PhonemeKind::Contour || k == PhonemeKind::Circle; };
  const int n = static_cast<int>(features.size());
  std::vector<StrokeSegment> out;
  for (auto& s : segments) {
    if (!out.empty() && path_like(out.back().kind) && path_like(s.kind) && n > 0) {
      const int lo = std::clamp(s.first_frame - 2, 0, n);
      const int hi = std::clamp(s.first_frame + 2, 0, n);
      bool dip = lo == hi;
      for (int f = lo; f < hi; ++f) dip = dip || features[static_cast<size_t>(f)].speed < holds.v_hold;
      if (!dip) {
        auto& prev = out.back();
        prev.end_frame = s.end_frame;
        prev.t1 = s.t1;
        prev.score += s.score;
        prev.path_points.insert(prev.path_points.end(), s.path_points.begin(), s.path_points.end());
        prev = classify_closure(std::move(prev), closure);
        continue;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<GesturePhrase> segment_phrases(std::span<const StrokeSegment> segments, int first_id) {
  std::vector<GesturePhrase> phrases;
  int next_id = first_id;
  size_t i = 0;
  while (i < segments.size()) {
    if (segments[i].kind == PhonemeKind::Rest) {
      ++i;
      continue;
    }
    size_t j = i;
    bool has_stroke = false;
    while (j < segments.size() && segments[j].kind != PhonemeKind::Rest) {
      has_stroke = has_stroke || is_stroke(segments[j].kind);
      ++j;
    }
    if (has_stroke) {
      GesturePhrase ph;
      ph.id = next_id++;
      ph.segments.assign(segments.begin() + static_cast<long>(i), segments.begin() + static_cast<long>(j));
      phrases.push_back(std::move(ph));
    }
    i = j;
  }
  return phrases;
}

}  // namespace deixis

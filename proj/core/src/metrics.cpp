#include "deixis/metrics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "deixis/error.hpp"

namespace deixis {

namespace {

size_t phoneme_index(PhonemeKind k) { return static_cast<size_t>(k); }

}  // namespace

Metrics evaluate(std::span<const DecodedSession> decoded, std::span<const SessionRecord> truth, double overlap_min) {
  if (decoded.size() != truth.size()) {
    throw Error(ErrorKind::SessionMismatch, std::to_string(decoded.size()) + " decoded sessions for " +
                                                std::to_string(truth.size()) + " truth sessions");
  }
  Metrics m;
  for (size_t s = 0; s < truth.size(); ++s) {
    const auto& d = decoded[s];
    const auto& t = truth[s];
    if (d.id != t.id) throw Error(ErrorKind::SessionMismatch, "session '" + d.id + "' paired with '" + t.id + "'");

    // (overlap, decoded index, truth index), best first.
    std::vector<std::tuple<double, size_t, size_t>> pairs;
    for (size_t i = 0; i < t.truth_segments.size(); ++i) {
      const auto& ts = t.truth_segments[i];
      const double need = overlap_min * (ts.t1 - ts.t0);
      for (size_t j = 0; j < d.segments.size(); ++j) {
        const double ov = std::min(ts.t1, d.segments[j].t1) - std::max(ts.t0, d.segments[j].t0);
        if (ov > 0.0 && ov >= need) pairs.emplace_back(ov, j, i);
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<std::optional<size_t>> match(t.truth_segments.size());
    std::vector<bool> used(d.segments.size(), false);
    for (const auto& [ov, j, i] : pairs) {
      if (match[i] || used[j]) continue;
      match[i] = j;
      used[j] = true;
    }

    for (size_t i = 0; i < t.truth_segments.size(); ++i) {
      const auto kind = t.truth_segments[i].phoneme;
      auto& row = m.confusion[phoneme_index(kind)];
      if (match[i]) ++row[phoneme_index(d.segments[*match[i]].kind)];
      else ++row[kAllPhonemes.size()];
      if (!is_stroke(kind)) continue;
      ++m.truth_strokes;
      if (match[i] && d.segments[*match[i]].kind == kind) ++m.correct_strokes;
    }

    for (const auto& td : t.truth_deixis) {
      if (td.seg < 0 || static_cast<size_t>(td.seg) >= t.truth_segments.size()) continue;
      const auto& mi = match[static_cast<size_t>(td.seg)];
      if (!mi || d.segments[*mi].kind != t.truth_segments[static_cast<size_t>(td.seg)].phoneme) continue;
      ++m.deixis_total;
      if (d.segments[*mi].deixis == td.subclass) ++m.deixis_correct;
    }

    std::map<std::string, int> want, got;
    for (const auto& c : t.truth_commands) ++want[signature_key(c)];
    for (const auto& c : d.commands) ++got[signature_key(c)];
    for (const auto& [key, n] : want) {
      auto it = got.find(key);
      if (it != got.end()) m.commands_matched += std::min(n, it->second);
    }
    m.commands_total += static_cast<int>(std::max(t.truth_commands.size(), d.commands.size()));
  }
  auto rate = [](int num, int den) { return den == 0 ? 1.0 : static_cast<double>(num) / den; };
  m.segment_correct_rate = rate(m.correct_strokes, m.truth_strokes);
  m.deixis_accuracy = rate(m.deixis_correct, m.deixis_total);
  m.command_accuracy = rate(m.commands_matched, m.commands_total);
  return m;
}

}  // namespace deixis

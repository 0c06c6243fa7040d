#include "deixis/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis {

using nlohmann::json;

RefSignature signature_of(const ReferenceResolution& r) {
  RefSignature s{r.kind, r.object_ids};
  std::sort(s.object_ids.begin(), s.object_ids.end());
  return s;
}

TruthCommand signature_of(const Command& c) {
  TruthCommand t;
  t.verb = c.verb;
  t.object_ids = c.object_ids;
  std::sort(t.object_ids.begin(), t.object_ids.end());
  if (c.source) t.source = signature_of(*c.source);
  if (c.path && c.explicit_path) t.path = signature_of(*c.path);
  if (c.destination) t.destination = signature_of(*c.destination);
  return t;
}

namespace {

void append_ids(std::string& out, const std::vector<ObjectId>& ids) {
  out += '[';
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  out += ']';
}

void append_ref(std::string& out, const std::optional<RefSignature>& r) {
  if (!r) {
    out += '-';
    return;
  }
  out += to_string(r->kind);
  append_ids(out, r->object_ids);
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // "-0.000000" and "0.000000" must serialize identically.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

json ref_to_json(const std::optional<RefSignature>& r) {
  if (!r) return nullptr;
  return {{"kind", to_string(r->kind)}, {"objects", r->object_ids}};
}

std::optional<RefSignature> ref_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  RefSignature r;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "object") r.kind = ReferenceKind::Object;
  else if (kind == "area") r.kind = ReferenceKind::Area;
  else if (kind == "path") r.kind = ReferenceKind::Path;
  else if (kind == "none") r.kind = ReferenceKind::None;
  else throw Error(ErrorKind::ParseError, "unknown reference kind '" + kind + "'");
  r.object_ids = j.at("objects").get<std::vector<ObjectId>>();
  return r;
}

}  // namespace

std::string signature_key(const TruthCommand& c) {
  std::string out(to_string(c.verb));
  out += '|';
  append_ids(out, c.object_ids);
  out += "|src:";
  append_ref(out, c.source);
  out += "|path:";
  append_ref(out, c.path);
  out += "|dst:";
  append_ref(out, c.destination);
  return out;
}

double quantize6(double v) {
  const double q = std::round(v * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;
}

std::string session_to_text(const SessionRecord& rec) {
  std::string out;
  {
    json meta = {{"kind", "meta"}, {"id", rec.id}, {"map", rec.map_ref}};
    meta["seed"] = rec.seed ? json(*rec.seed) : json(nullptr);
    out += meta.dump() + '\n';
  }
  for (const auto& s : rec.samples) {
    out += R"({"kind":"sample","t":)" + fmt6(s.t) + R"(,"x":)" + fmt6(s.x) + R"(,"y":)" + fmt6(s.y) + "}\n";
  }
  for (const auto& w : rec.tokens) {
    out += R"({"kind":"token","t0":)" + fmt6(w.t0) + R"(,"t1":)" + fmt6(w.t1) + R"(,"text":)" +
           json(w.text).dump() + "}\n";
  }
  for (const auto& s : rec.truth_segments) {
    out += R"({"kind":"truth_seg","t0":)" + fmt6(s.t0) + R"(,"t1":)" + fmt6(s.t1) + R"(,"phoneme":")" +
           std::string(to_string(s.phoneme)) + "\"}\n";
  }
  for (const auto& d : rec.truth_deixis) {
    out += R"({"kind":"truth_deixis","seg":)" + std::to_string(d.seg) + R"(,"category":")" +
           std::string(to_string(d.category)) + R"(","subclass":")" + std::string(to_string(d.subclass)) + "\"}\n";
  }
  for (const auto& c : rec.truth_commands) {
    json j = {{"kind", "truth_command"},
              {"verb", to_string(c.verb)},
              {"objects", c.object_ids},
              {"source", ref_to_json(c.source)},
              {"path", ref_to_json(c.path)},
              {"destination", ref_to_json(c.destination)}};
    out += j.dump() + '\n';
  }
  for (const auto& line : rec.unknown_lines) out += line + '\n';
  return out;
}

SessionRecord session_from_text(std::string_view text, std::vector<std::string>* warnings) {
  SessionRecord rec;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw Error(ErrorKind::ParseError, where + ": record lacks a string \"kind\"");
      }
      const auto kind = j["kind"].get<std::string>();
      if (kind == "meta") {
        rec.id = j.value("id", std::string());
        rec.map_ref = j.value("map", std::string());
        if (j.contains("seed") && !j["seed"].is_null()) rec.seed = j["seed"].get<std::uint64_t>();
      } else if (kind == "sample") {
        TrajectorySample s{j.at("t").get<double>(), j.at("x").get<double>(), j.at("y").get<double>()};
        if (!rec.samples.empty() && s.t < rec.samples.back().t) {
          throw Error(ErrorKind::TimeOrderError, where + ": sample time " + fmt6(s.t) + " precedes " +
                                                     fmt6(rec.samples.back().t));
        }
        rec.samples.push_back(s);
      } else if (kind == "token") {
        rec.tokens.push_back({j.at("text").get<std::string>(), j.at("t0").get<double>(), j.at("t1").get<double>()});
      } else if (kind == "truth_seg") {
        const auto name = j.at("phoneme").get<std::string>();
        const auto ph = phoneme_from_string(name);
        if (!ph) throw Error(ErrorKind::ParseError, where + ": unknown phoneme '" + name + "'");
        TruthSegment seg{j.at("t0").get<double>(), j.at("t1").get<double>(), *ph};
        if (!(seg.t0 < seg.t1)) throw Error(ErrorKind::TimeOrderError, where + ": truth segment has t0 >= t1");
        if (!rec.truth_segments.empty()) {
          const auto& prev = rec.truth_segments.back();
          const size_t k = rec.truth_segments.size();
          if (seg.t0 < prev.t1 - 1e-9) {
            throw Error(ErrorKind::TimeOrderError,
                        where + ": truth segment " + std::to_string(k) + " [" + fmt6(seg.t0) + ", " + fmt6(seg.t1) +
                            "] overlaps truth segment " + std::to_string(k - 1) + " [" + fmt6(prev.t0) + ", " +
                            fmt6(prev.t1) + "]");
          }
        }
        rec.truth_segments.push_back(seg);
      } else if (kind == "truth_deixis") {
        const auto cat = deixis_category_from_string(j.at("category").get<std::string>());
        const auto sub = deixis_subclass_from_string(j.at("subclass").get<std::string>());
        if (!cat || !sub || category_of(*sub) != *cat) {
          throw Error(ErrorKind::ParseError, where + ": inconsistent deixis label");
        }
        rec.truth_deixis.push_back({j.at("seg").get<int>(), *cat, *sub});
      } else if (kind == "truth_command") {
        TruthCommand c;
        const auto verb = command_verb_from_string(j.at("verb").get<std::string>());
        if (!verb) throw Error(ErrorKind::ParseError, where + ": unknown command verb");
        c.verb = *verb;
        c.object_ids = j.at("objects").get<std::vector<ObjectId>>();
        c.source = ref_from_json(j.value("source", json(nullptr)));
        c.path = ref_from_json(j.value("path", json(nullptr)));
        c.destination = ref_from_json(j.value("destination", json(nullptr)));
        rec.truth_commands.push_back(std::move(c));
      } else {
        if (warnings) warnings->push_back(where + ": unknown record kind '" + kind + "' kept verbatim");
        rec.unknown_lines.push_back(line);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::TimeOrderError) throw;
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
  }
  return rec;
}

void save_session(const std::string& path, const SessionRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write session file '" + path + "'");
  out << session_to_text(rec);
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

SessionRecord load_session(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open session file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return session_from_text(buf.str(), warnings);
}

}  // namespace deixis

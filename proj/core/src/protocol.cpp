#include "deixis/protocol.hpp"

#include <cmath>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json ref_json(const std::optional<RefSignature>& r) {
  if (!r) return nullptr;
  return {{"kind", to_string(r->kind)}, {"objects", r->object_ids}};
}

std::optional<RefSignature> ref_from(const json& j) {
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

double number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' is not finite");
  return d;
}

json parse_object(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed message: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorKind::ParseError, "message lacks a string \"kind\"");
  }
  return j;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad message field: ") + e.what());
  }
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  const json j = parse_object(text);
  return guarded([&]() -> ClientMessage {
    const auto kind = j["kind"].get<std::string>();
    if (kind == "sample") return SampleEvent{{number(j, "t"), number(j, "x"), number(j, "y")}};
    if (kind == "token") return TokenEvent{{j.at("text").get<std::string>(), number(j, "t0"), number(j, "t1")}};
    if (kind == "reset") return ResetEvent{};
    if (kind == "flush") return FlushEvent{};
    throw Error(ErrorKind::ParseError, "unknown client message kind '" + kind + "'");
  });
}

std::string encode(const ClientMessage& msg) {
  return std::visit(overloaded{
                        [](const SampleEvent& e) {
                          return json{{"kind", "sample"}, {"t", e.sample.t}, {"x", e.sample.x}, {"y", e.sample.y}}
                              .dump();
                        },
                        [](const TokenEvent& e) {
                          return json{{"kind", "token"}, {"t0", e.word.t0}, {"t1", e.word.t1}, {"text", e.word.text}}
                              .dump();
                        },
                        [](const ResetEvent&) { return json{{"kind", "reset"}}.dump(); },
                        [](const FlushEvent&) { return json{{"kind", "flush"}}.dump(); },
                    },
                    msg);
}

std::string encode(const ServerMessage& msg) {
  return std::visit(
      overloaded{
          [](const CursorMsg& m) {
            return json{{"kind", "cursor"}, {"mode", m.point ? "point" : "idle"}, {"t", quantize6(m.t)}}.dump();
          },
          [](const StrokeMsg& m) {
            return json{{"kind", "stroke"},
                        {"id", m.id},
                        {"phoneme", to_string(m.phoneme)},
                        {"t0", quantize6(m.t0)},
                        {"t1", quantize6(m.t1)}}
                .dump();
          },
          [](const DeixisMsg& m) {
            return json{{"kind", "deixis"},
                        {"stroke", m.stroke},
                        {"category", to_string(m.category)},
                        {"subclass", to_string(m.subclass)},
                        {"confidence", quantize6(m.confidence)}}
                .dump();
          },
          [](const CommandMsg& m) {
            return json{{"kind", "command"},
                        {"verb", to_string(m.command.verb)},
                        {"objects", m.command.object_ids},
                        {"source", ref_json(m.command.source)},
                        {"path", ref_json(m.command.path)},
                        {"destination", ref_json(m.command.destination)},
                        {"phrase", m.phrase},
                        {"t", quantize6(m.t)}}
                .dump();
          },
          [](const ErrorMsg& m) { return json{{"kind", "error"}, {"msg", m.msg}}.dump(); },
          [](const FlushedMsg& m) { return json{{"kind", "flushed"}, {"t", quantize6(m.t)}}.dump(); },
          [](const PhraseMsg& m) { return json{{"kind", "phrase"}, {"record", json::parse(m.record)}}.dump(); },
      },
      msg);
}

ServerMessage parse_server_message(std::string_view text) {
  const json j = parse_object(text);
  return guarded([&]() -> ServerMessage {
    const auto kind = j["kind"].get<std::string>();
    if (kind == "cursor") {
      const auto mode = j.at("mode").get<std::string>();
      if (mode != "point" && mode != "idle") throw Error(ErrorKind::ParseError, "unknown cursor mode '" + mode + "'");
      return CursorMsg{mode == "point", number(j, "t")};
    }
    if (kind == "stroke") {
      const auto name = j.at("phoneme").get<std::string>();
      const auto ph = phoneme_from_string(name);
      if (!ph) throw Error(ErrorKind::ParseError, "unknown phoneme '" + name + "'");
      return StrokeMsg{j.at("id").get<int>(), *ph, number(j, "t0"), number(j, "t1")};
    }
    if (kind == "deixis") {
      const auto cat = deixis_category_from_string(j.at("category").get<std::string>());
      const auto sub = deixis_subclass_from_string(j.at("subclass").get<std::string>());
      if (!cat || !sub) throw Error(ErrorKind::ParseError, "unknown deixis label");
      return DeixisMsg{j.at("stroke").get<int>(), *cat, *sub, number(j, "confidence")};
    }
    if (kind == "command") {
      CommandMsg m;
      const auto verb = command_verb_from_string(j.at("verb").get<std::string>());
      if (!verb) throw Error(ErrorKind::ParseError, "unknown command verb");
      m.command.verb = *verb;
      m.command.object_ids = j.at("objects").get<std::vector<ObjectId>>();
      m.command.source = ref_from(j.at("source"));
      m.command.path = ref_from(j.at("path"));
      m.command.destination = ref_from(j.at("destination"));
      m.phrase = j.value("phrase", 0);
      m.t = j.contains("t") ? number(j, "t") : 0.0;
      return m;
    }
    if (kind == "error") return ErrorMsg{j.at("msg").get<std::string>()};
    if (kind == "flushed") return FlushedMsg{j.contains("t") ? number(j, "t") : 0.0};
    if (kind == "phrase") {
      if (!j.at("record").is_object()) throw Error(ErrorKind::ParseError, "phrase record must be an object");
      return PhraseMsg{j["record"].dump()};
    }
    throw Error(ErrorKind::ParseError, "unknown server message kind '" + kind + "'");
  });
}

}  // namespace deixis

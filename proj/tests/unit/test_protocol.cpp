#include <gtest/gtest.h>

#include <json.hpp>

#include "deixis/error.hpp"
#include "deixis/protocol.hpp"

using namespace deixis;
using nlohmann::json;

TEST(Protocol, ClientMessagesRoundTrip) {
  const std::vector<ClientMessage> msgs = {SampleEvent{{1.5, 0.25, 0.75}}, TokenEvent{{"here", 1.6, 1.9}},
                                           ResetEvent{}, FlushEvent{}};
  for (const auto& m : msgs) {
    const auto text = encode(m);
    EXPECT_EQ(text.find('\n'), std::string::npos);
    EXPECT_EQ(encode(parse_client_message(text)), text);
  }
}

TEST(Protocol, ClientWireShape) {
  const auto s = json::parse(encode(ClientMessage{SampleEvent{{1.5, 0.25, 0.75}}}));
  EXPECT_EQ(s, json::parse(R"({"kind":"sample","t":1.5,"x":0.25,"y":0.75})"));
  const auto t = json::parse(encode(ClientMessage{TokenEvent{{"go", 0.5, 0.7}}}));
  EXPECT_EQ(t, json::parse(R"({"kind":"token","t0":0.5,"t1":0.7,"text":"go"})"));
  EXPECT_EQ(json::parse(encode(ClientMessage{ResetEvent{}})), json::parse(R"({"kind":"reset"})"));
  const auto parsed = parse_client_message(R"({"kind":"token","t0":0.5,"t1":0.7,"text":"go"})");
  ASSERT_TRUE(std::holds_alternative<TokenEvent>(parsed));
  EXPECT_EQ(std::get<TokenEvent>(parsed).word.text, "go");
}

TEST(Protocol, ServerMessagesRoundTrip) {
  TruthCommand cmd;
  cmd.verb = CommandVerb::Move;
  cmd.object_ids = {5};
  cmd.source = RefSignature{ReferenceKind::Object, {5}};
  cmd.destination = RefSignature{ReferenceKind::Area, {}};
  const std::vector<ServerMessage> msgs = {
      CursorMsg{true, 2.0},
      StrokeMsg{3, PhonemeKind::Contour, 1.0, 1.8},
      DeixisMsg{3, DeixisCategory::Intransitive, DeixisSubclass::Medial, 0.7},
      CommandMsg{cmd, 1, 3.2},
      ErrorMsg{"sample at t=0.1 precedes the previous sample"},
      FlushedMsg{4.0},
      PhraseMsg{R"({"phrase":2,"segments":[],"t":1.5})"}};
  for (const auto& m : msgs) {
    const auto text = encode(m);
    EXPECT_EQ(encode(parse_server_message(text)), text);
  }
}

TEST(Protocol, ServerWireShape) {
  const auto c = json::parse(encode(ServerMessage{CursorMsg{false, 2.5}}));
  EXPECT_EQ(c["kind"], "cursor");
  EXPECT_EQ(c["mode"], "idle");
  EXPECT_EQ(c["t"], 2.5);
  const auto s = json::parse(encode(ServerMessage{StrokeMsg{7, PhonemeKind::Point, 1.0, 1.5}}));
  EXPECT_EQ(s["kind"], "stroke");
  EXPECT_EQ(s["phoneme"], "point");
  EXPECT_EQ(s["id"], 7);
  const auto d = json::parse(encode(ServerMessage{DeixisMsg{7, DeixisCategory::Transitive, DeixisSubclass::Nominal, 1.0}}));
  EXPECT_EQ(d["stroke"], 7);
  EXPECT_EQ(d["category"], "transitive");
  EXPECT_EQ(d["subclass"], "nominal");
  TruthCommand sel;
  sel.verb = CommandVerb::Select;
  sel.object_ids = {1};
  const auto k = json::parse(encode(ServerMessage{CommandMsg{sel, 0, 1.6}}));
  EXPECT_EQ(k["kind"], "command");
  EXPECT_EQ(k["verb"], "select");
  EXPECT_EQ(k["objects"], json::array({1}));
  EXPECT_TRUE(k["source"].is_null());
  EXPECT_TRUE(k["path"].is_null());
  EXPECT_TRUE(k["destination"].is_null());
  EXPECT_EQ(json::parse(encode(ServerMessage{ErrorMsg{"bad"}}))["msg"], "bad");
  const auto p = json::parse(encode(ServerMessage{PhraseMsg{R"({"phrase":0})"}}));
  EXPECT_EQ(p["kind"], "phrase");
  EXPECT_EQ(p["record"]["phrase"], 0);
}

TEST(Protocol, MalformedInput) {
  for (const char* bad : {"", "{", "[]", R"({"t":1})", R"({"kind":"sample","t":1,"x":0.5})",
                          R"({"kind":"teleport"})", R"({"kind":"token","t0":"a","t1":1,"text":"x"})"}) {
    try {
      parse_client_message(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
    }
  }
  EXPECT_THROW(parse_server_message(R"({"kind":"stroke","id":1,"phoneme":"wave","t0":0,"t1":1})"), Error);
  EXPECT_THROW(parse_server_message(R"({"kind":"phrase","record":[1]})"), Error);
}

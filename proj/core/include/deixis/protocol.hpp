#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deixis/kinematics.hpp"
#include "deixis/lexicon.hpp"
#include "deixis/semantics.hpp"
#include "deixis/session.hpp"

namespace deixis {

// Client -> server.
struct SampleEvent {
  TrajectorySample sample;
};
struct TokenEvent {
  TimedWord word;
};
struct ResetEvent {};
// Commits everything received so far; answered with FlushedMsg.
struct FlushEvent {};
using ClientMessage = std::variant<SampleEvent, TokenEvent, ResetEvent, FlushEvent>;

// Server -> client.
struct CursorMsg {
  bool point = false;
  double t = 0.0;
};
struct StrokeMsg {
  int id = 0;
  PhonemeKind phoneme = PhonemeKind::Point;
  double t0 = 0.0;
  double t1 = 0.0;
};
struct DeixisMsg {
  int stroke = 0;
  DeixisCategory category = DeixisCategory::Transitive;
  DeixisSubclass subclass = DeixisSubclass::Spatial;
  double confidence = 0.0;
};
struct CommandMsg {
  TruthCommand command;
  int phrase = 0;
  double t = 0.0;
};
struct ErrorMsg {
  std::string msg;
};
struct FlushedMsg {
  double t = 0.0;
};
// A committed phrase record, in the same serialization as `decode` output.
struct PhraseMsg {
  std::string record;
};
using ServerMessage = std::variant<CursorMsg, StrokeMsg, DeixisMsg, CommandMsg, ErrorMsg, FlushedMsg, PhraseMsg>;

// One JSON object per message, no trailing newline. Throws ParseError.
ClientMessage parse_client_message(std::string_view text);
std::string encode(const ClientMessage& msg);
ServerMessage parse_server_message(std::string_view text);
std::string encode(const ServerMessage& msg);

}  // namespace deixis

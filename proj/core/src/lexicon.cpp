#include "deixis/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis {

namespace {

constexpr std::array<KeywordClass, 8> kPrecedence = {
    KeywordClass::DeicticMarker, KeywordClass::SpatialAdverbial, KeywordClass::PrepInitial,
    KeywordClass::PrepMedial,    KeywordClass::PrepFinal,        KeywordClass::MotionVerb,
    KeywordClass::Pronoun,       KeywordClass::Noun};

std::string fold(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::set<std::string> kEmpty;

}  // namespace

std::string_view to_string(KeywordClass c) {
  switch (c) {
    case KeywordClass::Noun: return "noun";
    case KeywordClass::Pronoun: return "pronoun";
    case KeywordClass::DeicticMarker: return "deictic_marker";
    case KeywordClass::SpatialAdverbial: return "spatial_adverbial";
    case KeywordClass::PrepInitial: return "prep_initial";
    case KeywordClass::PrepMedial: return "prep_medial";
    case KeywordClass::PrepFinal: return "prep_final";
    case KeywordClass::MotionVerb: return "motion_verb";
    case KeywordClass::Other: return "other";
  }
  return "other";
}

std::optional<KeywordClass> keyword_class_from_string(std::string_view name) {
  for (auto c : kAllKeywordClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

Lexicon Lexicon::builtin() {
  Lexicon lex;
  auto fill = [&](KeywordClass c, std::initializer_list<const char*> words) {
    for (const char* w : words) lex.sets_[c].insert(w);
  };
  fill(KeywordClass::PrepInitial, {"from", "out", "off", "away"});
  fill(KeywordClass::PrepMedial, {"through", "along", "across", "via", "past"});
  fill(KeywordClass::PrepFinal, {"to", "toward", "towards", "into", "onto", "at"});
  fill(KeywordClass::SpatialAdverbial, {"here", "there", "below", "above", "around", "nearby"});
  fill(KeywordClass::DeicticMarker, {"this", "that", "these", "those"});
  fill(KeywordClass::MotionVerb, {"go", "move", "take", "enter", "drive", "bring"});
  fill(KeywordClass::Pronoun, {"it", "them", "one"});
  fill(KeywordClass::Noun, {"building", "road", "lot", "car", "parking", "library"});
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open lexicon file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Lexicon lex = builtin();
  lex.merge_json_text(buf.str());
  return lex;
}

void Lexicon::merge_json_text(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw Error(ErrorKind::ParseError, "lexicon must be a JSON object");
    for (const auto& [name, words] : doc.items()) {
      const auto c = keyword_class_from_string(name);
      if (!c) throw Error(ErrorKind::ParseError, "unknown keyword class '" + name + "'");
      for (const auto& w : words) sets_[*c].insert(fold(w.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("lexicon: ") + e.what());
  }
  resolve_precedence();
}

void Lexicon::add_word(KeywordClass c, std::string word) {
  sets_[c].insert(fold(word));
  resolve_precedence();
}

const std::set<std::string>& Lexicon::words(KeywordClass c) const {
  auto it = sets_.find(c);
  return it == sets_.end() ? kEmpty : it->second;
}

void Lexicon::resolve_precedence() {
  std::set<std::string> seen;
  for (auto c : kPrecedence) {
    auto& set = sets_[c];
    for (auto it = set.begin(); it != set.end();) {
      it = seen.contains(*it) ? set.erase(it) : std::next(it);
    }
    seen.insert(set.begin(), set.end());
  }
  sets_.erase(KeywordClass::Other);
}

KeywordClass Lexicon::classify(std::string_view word, const MapContext& ctx) const {
  const std::string w = fold(word);
  for (auto c : kPrecedence) {
    if (words(c).contains(w)) return c;
  }
  if (ctx.is_name_word(w)) return KeywordClass::Noun;
  return KeywordClass::Other;
}

KeywordClass classify_token(const Lexicon& lexicon, std::string_view word, const MapContext& ctx) {
  return lexicon.classify(word, ctx);
}

std::vector<KeywordToken> spot_keywords(const Lexicon& lexicon, std::span<const TimedWord> tokens,
                                        const MapContext& ctx) {
  std::vector<KeywordToken> out;
  out.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (tok.text.empty() || std::any_of(tok.text.begin(), tok.text.end(),
                                        [](unsigned char c) { return std::isspace(c); })) {
      throw Error(ErrorKind::InvalidArgument, "token " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (!(tok.t0 <= tok.t1)) {
      throw Error(ErrorKind::InvalidArgument, "token '" + tok.text + "' ends before it starts");
    }
    if (i > 0 && tok.t0 < tokens[i - 1].t1) {
      throw Error(ErrorKind::TokenOverlap,
                  "token '" + tok.text + "' overlaps preceding token '" + tokens[i - 1].text + "'");
    }
    const std::string text = fold(tok.text);
    out.push_back({text, tok.t0, tok.t1, lexicon.classify(text, ctx)});
  }
  return out;
}

}  // namespace deixis

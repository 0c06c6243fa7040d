#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deixis/context.hpp"

namespace deixis {

enum class KeywordClass {
  Noun,
  Pronoun,
  DeicticMarker,
  SpatialAdverbial,
  PrepInitial,
  PrepMedial,
  PrepFinal,
  MotionVerb,
  Other,
};

inline constexpr std::array<KeywordClass, 9> kAllKeywordClasses = {
    KeywordClass::Noun,       KeywordClass::Pronoun,    KeywordClass::DeicticMarker,
    KeywordClass::SpatialAdverbial, KeywordClass::PrepInitial, KeywordClass::PrepMedial,
    KeywordClass::PrepFinal,  KeywordClass::MotionVerb, KeywordClass::Other};

std::string_view to_string(KeywordClass c);
std::optional<KeywordClass> keyword_class_from_string(std::string_view name);

constexpr bool is_preposition(KeywordClass c) {
  return c == KeywordClass::PrepInitial || c == KeywordClass::PrepMedial || c == KeywordClass::PrepFinal;
}

// A transcript word as it arrives from the recognizer.
struct TimedWord {
  std::string text;
  double t0 = 0.0;
  double t1 = 0.0;

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

struct KeywordToken {
  std::string text;
  double t0 = 0.0;
  double t1 = 0.0;
  KeywordClass cls = KeywordClass::Other;

  friend bool operator==(const KeywordToken&, const KeywordToken&) = default;
};

class Lexicon {
 public:
  // Built-in closed-class lists plus the generic object nouns.
  static Lexicon builtin();
  // Built-ins with the file's {"class_name": [words...]} lists merged in.
  static Lexicon load(const std::string& path);
  void merge_json_text(std::string_view text);

  void add_word(KeywordClass c, std::string word);
  const std::set<std::string>& words(KeywordClass c) const;

  // Precedence: DeicticMarker > SpatialAdverbial > PrepInitial > PrepMedial >
  // PrepFinal > MotionVerb > Pronoun > Noun (generic noun or map name) > Other.
  KeywordClass classify(std::string_view word, const MapContext& ctx) const;

 private:
  // Drops each word from every set ranked below the first one holding it.
  void resolve_precedence();

  std::map<KeywordClass, std::set<std::string>> sets_;
};

KeywordClass classify_token(const Lexicon& lexicon, std::string_view word, const MapContext& ctx);

// Throws TokenOverlap when a token starts before its predecessor ends.
std::vector<KeywordToken> spot_keywords(const Lexicon& lexicon, std::span<const TimedWord> tokens,
                                        const MapContext& ctx);

}  // namespace deixis

#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "waydirector/map.hpp"
#include "waydirector/router.hpp"
#include "waydirector/style.hpp"

namespace waydirector {

enum class IntentKind { navigate, repeat, switch_style, help, quit, unknown };

inline std::string_view to_string(IntentKind k) {
  switch (k) {
    case IntentKind::navigate: return "navigate";
    case IntentKind::repeat: return "repeat";
    case IntentKind::switch_style: return "switch_style";
    case IntentKind::help: return "help";
    case IntentKind::quit: return "quit";
    case IntentKind::unknown: return "unknown";
  }
  return "?";
}

struct Intent {
  IntentKind kind = IntentKind::unknown;
  // navigate only: "room 5", a room label, or the unresolved name as heard
  std::optional<std::string> destination;
  std::optional<std::string> node;  // set when the destination resolved to a room
  std::optional<Style> style;       // switch_style: requested style, unset for "the other one"
  std::string raw;

  bool resolved() const { return node.has_value(); }
};

inline constexpr std::array<std::string_view, 21> kNumberWords{
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

// 1..20
inline std::optional<std::string_view> number_word(int n) {
  if (n < 1 || n > 20) return std::nullopt;
  return kNumberWords[static_cast<std::size_t>(n)];
}

inline std::optional<int> parse_number_word(std::string_view w) {
  for (int n = 1; n <= 20; ++n) {
    if (kNumberWords[static_cast<std::size_t>(n)] == w) return n;
  }
  return std::nullopt;
}

// Lower case; punctuation becomes space, except apostrophes, which are dropped
// ("what's" -> "whats"); runs of spaces collapse.
inline std::string normalize_utterance(std::string_view s) {
  std::string out;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (c == '\'') continue;
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (!out.empty() && out.back() != ' ') {
      out.push_back(' ');
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

namespace detail {

inline bool matches(const std::string& text, const char* pattern) {
  return std::regex_search(text, std::regex(pattern));
}

inline std::string strip_articles(std::string s) {
  for (const char* lead : {"the ", "a ", "an "}) {
    if (s.rfind(lead, 0) == 0) s = s.substr(std::string_view(lead).size());
  }
  static const std::regex tail(R"((?:\s+(?:please|again|now|thanks|thank you))+$)");
  return std::regex_replace(s, tail, "");
}

// Finds a room mention. Returns (destination text, node id if resolved).
inline std::optional<std::pair<std::string, std::optional<std::string>>> find_room(const std::string& text,
                                                                                   const IndoorMap& map,
                                                                                   bool bare_numbers) {
  auto by_number = [&](int n, const std::string& heard) {
    if (const MapNode* node = map.room_by_number(n)) {
      return std::make_pair("room " + std::to_string(n), std::optional<std::string>(node->id));
    }
    return std::make_pair(heard, std::optional<std::string>());
  };
  std::smatch m;
  static const std::regex room_word(R"(\b(?:room|office|number)\s+([a-z0-9]+)\b)");
  if (std::regex_search(text, m, room_word)) {
    const std::string token = m[1].str();
    const std::string heard = m[0].str();
    if (auto n = parse_positive(token)) return by_number(*n, heard);
    if (auto n = parse_number_word(token)) return by_number(*n, heard);
    if (token != "is" && token != "for" && token != "please") {
      return std::make_pair(heard, std::optional<std::string>());
    }
  }
  for (const auto& node : map.nodes()) {
    if (node.kind != NodeKind::room || !node.label) continue;
    const std::string label = normalize_utterance(*node.label);
    if (label.empty()) continue;
    if (std::regex_search(text, std::regex("\\b" + label + "\\b"))) {
      return std::make_pair(label, std::optional<std::string>(node.id));
    }
  }
  if (bare_numbers) {
    static const std::regex bare(R"(\b([0-9]+)\b)");
    if (std::regex_search(text, m, bare)) {
      if (auto n = parse_positive(m[1].str())) return by_number(*n, "room " + m[1].str());
    }
    for (int n = 1; n <= 20; ++n) {
      const std::string w(kNumberWords[static_cast<std::size_t>(n)]);
      if (std::regex_search(text, std::regex("\\b" + w + "\\b"))) return by_number(n, "room " + w);
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Rule-based recognizer. Any room mention makes the utterance a navigate request;
// otherwise control phrases are tried in the order quit, help, repeat, switch_style,
// then navigation phrasings whose object could not be resolved.
inline Intent recognize_intent(std::string_view utterance, const IndoorMap& map) {
  Intent intent;
  intent.raw = std::string(utterance);
  const std::string text = normalize_utterance(utterance);
  if (text.empty()) return intent;

  static const char* navigate_cue =
      R"(\b(where|take me|bring me|show me|get to|go to|how do i|directions?|way to|find|looking for|need to)\b)";
  const bool wants_way = detail::matches(text, navigate_cue);

  if (auto room = detail::find_room(text, map, wants_way || detail::matches(text, R"(^[a-z0-9]+$)"))) {
    intent.kind = IntentKind::navigate;
    intent.destination = room->first;
    intent.node = room->second;
    return intent;
  }
  if (detail::matches(text, R"(^(quit|exit|bye|goodbye|stop|end|done|im done|that is all|thats all)( now| please)?$)") ||
      detail::matches(text, R"(\b(goodbye|quit the session|end the session)\b)")) {
    intent.kind = IntentKind::quit;
    return intent;
  }
  if (detail::matches(text, R"(\b(help|what can you do|what can i say|how does this work)\b)")) {
    intent.kind = IntentKind::help;
    return intent;
  }
  if (detail::matches(text, R"(\b(repeat|again|pardon|come again|what did you say|one more time|didnt catch)\b)")) {
    intent.kind = IntentKind::repeat;
    return intent;
  }
  const bool mentions_landmark = detail::matches(text, R"(\blandmarks?\b)");
  const bool mentions_skeletal = detail::matches(text, R"(\b(skeletal|simple|simpler|plain|without landmarks|no landmarks)\b)");
  const bool mentions_switch = detail::matches(text, R"(\b(switch|change|toggle|other) (the )?(style|mode|way)\b)");
  if (mentions_landmark || mentions_skeletal || mentions_switch) {
    intent.kind = IntentKind::switch_style;
    if (mentions_skeletal) intent.style = Style::skeletal;
    else if (mentions_landmark) intent.style = Style::landmark;
    return intent;
  }
  if (wants_way) {
    static const std::regex object(
        R"(\b(?:where is|where s|wheres|take me to|bring me to|show me|get to|go to|directions to|way to|find|looking for)\s+(.+)$)");
    std::smatch m;
    if (std::regex_search(text, m, object)) {
      std::string name = detail::strip_articles(m[1].str());
      if (!name.empty()) {
        intent.kind = IntentKind::navigate;
        intent.destination = name;
        return intent;
      }
    }
  }
  return intent;
}

}  // namespace waydirector

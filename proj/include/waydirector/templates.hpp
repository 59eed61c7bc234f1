#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "waydirector/lexer.hpp"
#include "waydirector/router.hpp"
#include "waydirector/style.hpp"

// Sentence templates, one per line:
//
//   style <landmark|skeletal> segment=<kind> "<text with {dir} {landmark} {hops}>"
//   display <landmark-token> "<surface form>"
//
// Variants are kept in file order; the first variant of each key is the canonical one.

namespace waydirector {

class TemplateError : public std::runtime_error {
 public:
  enum class Kind { syntax, missing_coverage, missing_slot, forbidden_slot, unknown_slot, ambiguous };
  TemplateError(Kind kind, int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        kind_(kind),
        line_(line) {}
  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

enum class Slot { dir, landmark, hops };

inline std::string_view to_string(Slot s) {
  switch (s) {
    case Slot::dir: return "dir";
    case Slot::landmark: return "landmark";
    case Slot::hops: return "hops";
  }
  return "?";
}

// Values substituted into a template.
struct Binding {
  std::optional<Action> dir;
  std::optional<std::string> landmark;  // map token, not surface form
  std::optional<int> hops;
  bool operator==(const Binding&) const = default;
  auto operator<=>(const Binding&) const = default;
};

enum class Verb { turn, go };

struct Template {
  struct Part {
    std::string literal;
    std::optional<Slot> slot;
  };

  Style style = Style::skeletal;
  SegmentKind kind = SegmentKind::decision;
  std::string text;
  std::vector<Part> parts;
  int line = 0;
  Verb verb = Verb::turn;  // lexical verb of the turn, for turn-bearing kinds
  std::regex pattern;
  std::vector<Slot> capture_order;

  bool uses(Slot s) const {
    for (const auto& p : parts) {
      if (p.slot == s) return true;
    }
    return false;
  }
};

class TemplateSet {
 public:
  const std::vector<Template>& variants(Style style, SegmentKind kind) const {
    static const std::vector<Template> empty;
    auto it = entries_.find({style, kind});
    return it == entries_.end() ? empty : it->second;
  }

  // All templates of one style, in (kind, file order).
  std::vector<const Template*> of_style(Style style) const {
    std::vector<const Template*> out;
    for (const auto& [key, list] : entries_) {
      if (key.first != style) continue;
      for (const auto& t : list) out.push_back(&t);
    }
    return out;
  }

  // Surface form of a landmark token: explicit display entry, else upper case for
  // known acronyms, else the token itself.
  std::string display(std::string_view token) const {
    if (auto it = display_.find(std::string(token)); it != display_.end()) return it->second;
    static const std::set<std::string, std::less<>> acronyms{"tv", "atm", "pc", "wc", "cctv", "ups"};
    if (acronyms.contains(token)) {
      std::string up(token);
      for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      return up;
    }
    return std::string(token);
  }

  // Inverse of display() after case folding.
  std::string token_for(std::string_view surface) const {
    std::string folded = detail::lower(std::string(surface));
    for (const auto& [token, shown] : display_) {
      if (detail::lower(shown) == folded) return token;
    }
    return folded;
  }

  const std::map<std::string, std::string>& display_map() const { return display_; }

 private:
  friend TemplateSet parse_templates(std::string_view);
  std::map<std::pair<Style, SegmentKind>, std::vector<Template>> entries_;
  std::map<std::string, std::string> display_;
};

namespace detail {

inline std::string regex_escape(std::string_view s) {
  static const std::string special = R"(\^$.|?*+()[]{}-/)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline Template compile_template(Style style, SegmentKind kind, const std::string& text, int line) {
  using K = TemplateError::Kind;
  Template t;
  t.style = style;
  t.kind = kind;
  t.text = text;
  t.line = line;

  std::size_t pos = 0;
  std::string literal;
  std::set<Slot> seen;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == '}') throw TemplateError(K::syntax, line, "unmatched '}' in template");
    if (c != '{') {
      literal.push_back(c);
      ++pos;
      continue;
    }
    std::size_t close = text.find('}', pos);
    if (close == std::string::npos) throw TemplateError(K::syntax, line, "unterminated slot in template");
    std::string name = text.substr(pos + 1, close - pos - 1);
    Slot slot;
    if (name == "dir") slot = Slot::dir;
    else if (name == "landmark") slot = Slot::landmark;
    else if (name == "hops") slot = Slot::hops;
    else throw TemplateError(K::unknown_slot, line, "unknown slot {" + name + "}");
    if (!seen.insert(slot).second) throw TemplateError(K::syntax, line, "slot {" + name + "} used twice");
    if (!literal.empty()) t.parts.push_back({std::move(literal), std::nullopt});
    literal.clear();
    if (!t.parts.empty() && t.parts.back().slot) {
      throw TemplateError(K::syntax, line, "adjacent slots need literal text between them");
    }
    t.parts.push_back({"", slot});
    pos = close + 1;
  }
  if (!literal.empty()) t.parts.push_back({std::move(literal), std::nullopt});

  if (text.empty() || text.back() != '.') throw TemplateError(K::syntax, line, "template must end with '.'");
  if (text.find('.') != text.size() - 1) throw TemplateError(K::syntax, line, "only the final character may be '.'");

  const std::string key = std::string(to_string(style)) + "/" + std::string(to_string(kind));
  auto require = [&](Slot s, bool needed, bool allowed) {
    bool used = seen.contains(s);
    if (needed && !used) {
      throw TemplateError(K::missing_slot, line, key + " template needs {" + std::string(to_string(s)) + "}");
    }
    if (!allowed && used) {
      throw TemplateError(K::forbidden_slot, line,
                          key + " template may not use {" + std::string(to_string(s)) + "}");
    }
  };
  const bool turn = has_turn(kind);
  require(Slot::dir, turn, turn);
  require(Slot::landmark, turn && style == Style::landmark, turn && style == Style::landmark);
  require(Slot::hops, false, has_follow(kind));

  std::string lowered = lower(text);
  t.verb = lowered.find("turn {dir}") != std::string::npos ? Verb::turn : Verb::go;

  std::string pattern;
  for (const auto& p : t.parts) {
    if (!p.slot) {
      pattern += regex_escape(p.literal);
      continue;
    }
    t.capture_order.push_back(*p.slot);
    switch (*p.slot) {
      case Slot::dir: pattern += "(left|right)"; break;
      case Slot::landmark: pattern += "([A-Za-z0-9][A-Za-z0-9' -]*?)"; break;
      case Slot::hops: pattern += "([1-9][0-9]*)"; break;
    }
  }
  t.pattern = std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
  return t;
}

}  // namespace detail

inline TemplateSet parse_templates(std::string_view document) {
  using K = TemplateError::Kind;
  TemplateSet set;
  std::map<std::string, int> display_lines;
  std::vector<lex::Line> lines;
  try {
    lines = lex::tokenize(document);
  } catch (const SyntaxError& e) {
    throw TemplateError(K::syntax, e.line(), e.message());
  }
  for (const auto& line : lines) {
    const auto& toks = line.tokens;
    const int ln = line.number;
    if (toks.front().is_pair() || toks.front().quoted) throw TemplateError(K::syntax, ln, "expected a directive");
    const std::string& head = toks.front().value;
    if (head == "style") {
      if (toks.size() != 4 || toks[1].is_pair() || !toks[2].is_pair() || toks[2].key != "segment" ||
          !toks[3].quoted || toks[3].is_pair()) {
        throw TemplateError(K::syntax, ln, "usage: style <landmark|skeletal> segment=<kind> \"<text>\"");
      }
      auto style = parse_style(toks[1].value);
      if (!style) throw TemplateError(K::syntax, ln, "unknown style '" + toks[1].value + "'");
      auto kind = parse_segment_kind(toks[2].value);
      if (!kind) throw TemplateError(K::syntax, ln, "unknown segment kind '" + toks[2].value + "'");
      set.entries_[{*style, *kind}].push_back(detail::compile_template(*style, *kind, toks[3].value, ln));
    } else if (head == "display") {
      if (toks.size() != 3 || toks[1].is_pair() || toks[1].quoted || !toks[2].quoted || toks[2].is_pair()) {
        throw TemplateError(K::syntax, ln, "usage: display <token> \"<surface>\"");
      }
      if (!is_landmark_token(toks[1].value)) {
        throw TemplateError(K::syntax, ln, "display token '" + toks[1].value + "' is not a landmark token");
      }
      if (toks[2].value.empty() || toks[2].value.find('.') != std::string::npos) {
        throw TemplateError(K::syntax, ln, "display form must be non-empty and free of '.'");
      }
      if (!display_lines.emplace(toks[1].value, ln).second) {
        throw TemplateError(K::syntax, ln, "display form for '" + toks[1].value + "' given twice");
      }
      set.display_[toks[1].value] = toks[2].value;
    } else {
      throw TemplateError(K::syntax, ln, "unknown directive '" + head + "'");
    }
  }

  std::set<std::string> surfaces;
  for (const auto& [token, shown] : set.display_) {
    if (!surfaces.insert(detail::lower(shown)).second) {
      throw TemplateError(K::ambiguous, display_lines[token], "display form '" + shown + "' used for two tokens");
    }
  }

  for (Style style : {Style::landmark, Style::skeletal}) {
    for (SegmentKind kind : kAllSegmentKinds) {
      const auto& list = set.variants(style, kind);
      const std::string key = std::string(to_string(style)) + "/" + std::string(to_string(kind));
      if (list.empty()) throw TemplateError(K::missing_coverage, 0, "no template for " + key);
      if (has_follow(kind) &&
          std::none_of(list.begin(), list.end(), [](const Template& t) { return t.uses(Slot::hops); })) {
        throw TemplateError(K::missing_coverage, 0, "no {hops} template for " + key);
      }
    }
  }
  return set;
}

inline TemplateSet load_templates_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open template file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_templates(buf.str());
}

inline std::string render(const Template& t, const Binding& b, const TemplateSet& set) {
  std::string out;
  for (const auto& p : t.parts) {
    if (!p.slot) {
      out += p.literal;
      continue;
    }
    switch (*p.slot) {
      case Slot::dir: out += to_string(*b.dir); break;
      case Slot::landmark: out += set.display(*b.landmark); break;
      case Slot::hops: out += std::to_string(*b.hops); break;
    }
  }
  return out;
}

// Binding restricted to the slots a template actually shows.
inline Binding visible_binding(const Template& t, const Binding& b) {
  Binding out;
  if (t.uses(Slot::dir)) out.dir = b.dir;
  if (t.uses(Slot::landmark)) out.landmark = b.landmark;
  if (t.uses(Slot::hops)) out.hops = b.hops;
  return out;
}

// Renders every template of each style under every binding drawn from `vocabulary`
// and hop counts 1..max_hops, and rejects any sentence reachable from two different
// (kind, binding) pairs. Parsing is only an inverse of generation when this holds.
inline void check_injective(const TemplateSet& set, const std::vector<std::string>& vocabulary, int max_hops) {
  for (Style style : {Style::landmark, Style::skeletal}) {
    std::map<std::string, std::pair<const Template*, Binding>> seen;
    for (const Template* t : set.of_style(style)) {
      std::vector<std::optional<Action>> dirs{std::nullopt};
      if (t->uses(Slot::dir)) dirs = {Action::left, Action::right};
      std::vector<std::optional<std::string>> marks{std::nullopt};
      if (t->uses(Slot::landmark)) marks.assign(vocabulary.begin(), vocabulary.end());
      std::vector<std::optional<int>> hops{std::nullopt};
      if (t->uses(Slot::hops)) {
        hops.clear();
        for (int h = 1; h <= max_hops; ++h) hops.push_back(h);
      }
      for (const auto& d : dirs) {
        for (const auto& m : marks) {
          for (const auto& h : hops) {
            Binding b{d, m, h};
            std::string sentence = detail::lower(render(*t, b, set));
            auto [it, inserted] = seen.emplace(sentence, std::make_pair(t, b));
            if (inserted) continue;
            const Template* other = it->second.first;
            if (other->kind == t->kind && it->second.second == b) continue;
            throw TemplateError(TemplateError::Kind::ambiguous, t->line,
                                "\"" + render(*t, b, set) + "\" is also produced by the template on line " +
                                    std::to_string(other->line));
          }
        }
      }
    }
  }
}

}  // namespace waydirector

#pragma once

#include <algorithm>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "waydirector/map.hpp"
#include "waydirector/nlg.hpp"
#include "waydirector/router.hpp"
#include "waydirector/templates.hpp"
#include "waydirector/walk.hpp"

namespace waydirector {

enum class NavVerb { turn, go, follow, arrive };

inline std::string_view to_string(NavVerb v) {
  switch (v) {
    case NavVerb::turn: return "turn";
    case NavVerb::go: return "go";
    case NavVerb::follow: return "follow";
    case NavVerb::arrive: return "arrive";
  }
  return "?";
}

// One executable step recovered from a sentence. `follow` without hops runs until the
// next action can be carried out.
struct NavAction {
  NavVerb verb = NavVerb::follow;
  std::optional<Action> direction;
  std::optional<std::string> landmark;
  std::optional<int> hops;

  bool operator==(const NavAction&) const = default;
};

// turn and go differ only in wording.
inline bool same_meaning(const NavAction& a, const NavAction& b) {
  auto directional = [](NavVerb v) { return v == NavVerb::turn || v == NavVerb::go; };
  bool verbs = a.verb == b.verb || (directional(a.verb) && directional(b.verb));
  return verbs && a.direction == b.direction && a.landmark == b.landmark && a.hops == b.hops;
}

class InstructionParseError : public std::runtime_error {
 public:
  enum class Kind { unparseable, ambiguous };
  InstructionParseError(Kind kind, std::size_t sentence, const std::string& message)
      : std::runtime_error("sentence " + std::to_string(sentence + 1) + ": " + message),
        kind_(kind),
        sentence_(sentence) {}
  Kind kind() const { return kind_; }
  std::size_t sentence() const { return sentence_; }

 private:
  Kind kind_;
  std::size_t sentence_;
};

namespace detail {

inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (current.empty() && std::isspace(static_cast<unsigned char>(c))) continue;
    current.push_back(c);
    if (c == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  std::string rest = trim(current);
  if (!rest.empty()) out.push_back(rest);
  return out;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (std::tolower(a[i - 1]) == std::tolower(b[j - 1]) ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

// Actions a segment asks for, as a listener of `style` instructions would hear them.
inline std::vector<NavAction> segment_actions(const Segment& seg, Style style, bool spoken_hops, Verb verb) {
  std::vector<NavAction> out;
  if (has_follow(seg.kind)) {
    out.push_back({NavVerb::follow, std::nullopt, std::nullopt,
                   spoken_hops ? std::optional<int>(seg.follow_hops) : std::nullopt});
  }
  if (has_turn(seg.kind)) {
    out.push_back({verb == Verb::turn ? NavVerb::turn : NavVerb::go, seg.direction,
                   style == Style::landmark ? seg.landmark : std::nullopt, std::nullopt});
  } else if (seg.kind != SegmentKind::depart) {
    out.push_back({NavVerb::arrive, std::nullopt, std::nullopt, std::nullopt});
  }
  return out;
}

// Inverts the templates of `style`: every sentence must match exactly one
// (kind, binding). When `vocabulary` is non-empty, landmark captures outside it are
// not considered matches.
inline std::vector<NavAction> parse_instructions(std::string_view text, const TemplateSet& templates, Style style,
                                                 const std::vector<std::string>& vocabulary = {}) {
  using K = InstructionParseError::Kind;
  const std::set<std::string> vocab(vocabulary.begin(), vocabulary.end());
  const auto candidates = templates.of_style(style);
  std::vector<NavAction> actions;
  const auto sentences = detail::split_sentences(text);
  for (std::size_t idx = 0; idx < sentences.size(); ++idx) {
    const std::string& sentence = sentences[idx];
    struct Match {
      const Template* t;
      Binding b;
    };
    std::vector<Match> matches;
    for (const Template* t : candidates) {
      std::smatch m;
      if (!std::regex_match(sentence, m, t->pattern)) continue;
      Binding b;
      bool ok = true;
      for (std::size_t g = 0; g < t->capture_order.size(); ++g) {
        std::string value = m[g + 1].str();
        switch (t->capture_order[g]) {
          case Slot::dir: b.dir = detail::lower(value) == "left" ? Action::left : Action::right; break;
          case Slot::landmark:
            b.landmark = templates.token_for(value);
            if (!vocab.empty() && !vocab.contains(*b.landmark)) ok = false;
            break;
          case Slot::hops: b.hops = std::stoi(value); break;
        }
      }
      if (!ok) continue;
      bool duplicate = std::any_of(matches.begin(), matches.end(),
                                   [&](const Match& x) { return x.t->kind == t->kind && x.b == b; });
      if (!duplicate) matches.push_back({t, b});
    }
    if (matches.empty()) {
      const Template* nearest = nullptr;
      std::size_t best = 0;
      for (const Template* t : candidates) {
        std::size_t d = detail::edit_distance(detail::lower(sentence), detail::lower(t->text));
        if (nearest == nullptr || d < best) {
          nearest = t;
          best = d;
        }
      }
      throw InstructionParseError(
          K::unparseable, idx,
          "\"" + sentence + "\" matches no " + std::string(to_string(style)) + " template" +
              (nearest ? "; nearest is \"" + nearest->text + "\" (line " + std::to_string(nearest->line) + ")" : ""));
    }
    if (matches.size() > 1) {
      throw InstructionParseError(K::ambiguous, idx,
                                  "\"" + sentence + "\" matches templates on lines " +
                                      std::to_string(matches[0].t->line) + " and " +
                                      std::to_string(matches[1].t->line));
    }
    const Template& t = *matches.front().t;
    const Binding& b = matches.front().b;
    Segment seg{t.kind, b.dir, b.landmark, b.hops.value_or(0), false};
    auto part = segment_actions(seg, style, b.hops.has_value(), t.verb);
    actions.insert(actions.end(), part.begin(), part.end());
  }
  return actions;
}

// The actions generate() should lead a listener to, for comparison with parsing.
inline std::vector<NavAction> expected_actions(const InstructionScript& script, const TemplateSet& templates) {
  std::vector<NavAction> out;
  for (std::size_t k = 0; k < script.sentences.size(); ++k) {
    const Segment& seg = script.source_segments[script.sentence_segments[k]];
    const Template* used = &templates.variants(script.style, seg.kind).at(script.sentence_variants[k]);
    auto part = segment_actions(seg, script.style, used->uses(Slot::hops), used->verb);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimOutcome {
  enum class Kind { arrived, ambiguous, no_match };
  Kind kind = Kind::no_match;
  std::string node;
  std::optional<std::size_t> action_index;  // unset for the final step into the room
  std::string detail;
};

inline std::string_view to_string(SimOutcome::Kind k) {
  switch (k) {
    case SimOutcome::Kind::arrived: return "arrived";
    case SimOutcome::Kind::ambiguous: return "ambiguous";
    case SimOutcome::Kind::no_match: return "no_match";
  }
  return "?";
}

struct SimTrace {
  std::vector<std::string> visited;
  std::vector<MapEdge> matched;  // edges taken, in order
  SimOutcome outcome;

  bool arrived() const { return outcome.kind == SimOutcome::Kind::arrived; }
};

// Walks the actions from the map's start. Landmark-style turns must match direction
// and landmark; skeletal turns match direction only. If the actions run out at a
// corridor node with exactly one door, the navigator steps through it.
inline SimTrace simulate(const IndoorMap& map, const std::vector<NavAction>& actions, Style style) {
  SimTrace trace;
  std::string node = map.start();
  std::optional<std::string> prev;
  bool entered = false;
  trace.visited.push_back(node);

  auto take = [&](const MapEdge* e) {
    trace.matched.push_back(*e);
    prev = node;
    node = e->to;
    trace.visited.push_back(node);
    entered = e->action == Action::enter;
  };
  auto fail = [&](SimOutcome::Kind kind, std::optional<std::size_t> index, std::string detail) {
    trace.outcome = {kind, node, index, std::move(detail)};
    return trace;
  };
  auto requirement = [&](const NavAction& a) -> walk::Requirement {
    if (a.verb == NavVerb::arrive) return {Action::enter, std::nullopt};
    return {*a.direction, style == Style::landmark ? a.landmark : std::nullopt};
  };
  auto describe = [](const NavAction& a) {
    std::string s(to_string(a.verb));
    if (a.direction) s += " " + std::string(to_string(*a.direction));
    if (a.landmark) s += " at " + *a.landmark;
    if (a.hops) s += " x" + std::to_string(*a.hops);
    return s;
  };

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const NavAction& a = actions[i];
    if (a.verb == NavVerb::follow) {
      std::optional<walk::Requirement> until;
      if (i + 1 < actions.size()) until = requirement(actions[i + 1]);
      else until = walk::Requirement{Action::enter, std::nullopt};
      auto walked = walk::follow(map, node, prev, until, a.hops);
      for (const MapEdge* e : walked.edges) take(e);
      if (walked.status == walk::FollowStatus::ambiguous) {
        return fail(SimOutcome::Kind::ambiguous, i, describe(a) + ": several straight ways on");
      }
      if (walked.status == walk::FollowStatus::dead_end) {
        return fail(SimOutcome::Kind::no_match, i, describe(a) + ": corridor ends");
      }
      continue;
    }
    if ((a.verb == NavVerb::turn || a.verb == NavVerb::go) && !a.direction) {
      return fail(SimOutcome::Kind::no_match, i, describe(a) + ": no direction");
    }
    auto options = walk::candidates(map, node, prev, requirement(a));
    if (options.size() != 1) {
      return fail(options.empty() ? SimOutcome::Kind::no_match : SimOutcome::Kind::ambiguous, i, describe(a));
    }
    take(options.front());
  }

  const MapNode* here = map.find(node);
  if (trace.matched.empty() && node == map.start()) {
    trace.outcome = {SimOutcome::Kind::arrived, node, std::nullopt, ""};
    return trace;
  }
  if (!(here && here->kind == NodeKind::room && entered)) {
    auto doors = walk::candidates(map, node, prev, {Action::enter, std::nullopt});
    if (doors.size() != 1) {
      return fail(doors.empty() ? SimOutcome::Kind::no_match : SimOutcome::Kind::ambiguous, std::nullopt,
                  "directions end away from a single door");
    }
    take(doors.front());
  }
  trace.outcome = {SimOutcome::Kind::arrived, node, std::nullopt, ""};
  return trace;
}

// ---------------------------------------------------------------------------
// Round trip

struct RoundTripOptions {
  SegmentOptions segments;
  GenerateOptions generation;
};

struct RoundTrip {
  bool ok = false;
  Route route;
  InstructionScript script;
  std::vector<NavAction> actions;
  SimTrace trace;
  std::string error;  // set when generation or parsing failed
};

// Directions are produced from `knowledge` and executed in `world`. The two are the
// same map except in mutation tests, where the world no longer matches the knowledge base.
inline RoundTrip verify_roundtrip(const IndoorMap& knowledge, const IndoorMap& world, std::string_view destination,
                                  Style style, std::uint64_t seed, const TemplateSet& templates,
                                  const RoundTripOptions& options = {}) {
  RoundTrip rt;
  rt.trace.visited.push_back(world.start());
  try {
    rt.route = shortest_path(knowledge, destination);
    auto segments = plan_segments(knowledge, rt.route, style, options.segments);
    rt.script = generate(segments, style, templates, seed, options.generation);
    rt.actions = parse_instructions(rt.script.text(), templates, style, knowledge.landmark_vocabulary());
  } catch (const std::exception& e) {
    rt.error = e.what();
    rt.trace.outcome = {SimOutcome::Kind::no_match, world.start(), std::nullopt, rt.error};
    return rt;
  }
  rt.trace = simulate(world, rt.actions, style);
  rt.ok = rt.trace.arrived() && rt.trace.outcome.node == rt.route.destination;
  return rt;
}

inline RoundTrip verify_roundtrip(const IndoorMap& map, std::string_view destination, Style style, std::uint64_t seed,
                                  const TemplateSet& templates, const RoundTripOptions& options = {}) {
  return verify_roundtrip(map, map, destination, style, seed, templates, options);
}

}  // namespace waydirector

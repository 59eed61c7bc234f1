#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "waydirector/map.hpp"
#include "waydirector/style.hpp"
#include "waydirector/walk.hpp"

namespace waydirector {

class RoutingError : public std::runtime_error {
 public:
  enum class Kind { unknown_room, unreachable };
  RoutingError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct RouteStep {
  std::string from;
  std::string to;
  Action action = Action::straight;
  std::optional<std::string> landmark;
  std::optional<double> length_m;

  bool operator==(const RouteStep&) const = default;
};

struct Route {
  std::string origin;
  std::string destination;
  std::vector<RouteStep> steps;

  // origin, then each step's target
  std::vector<std::string> nodes() const {
    std::vector<std::string> out{origin};
    for (const auto& s : steps) out.push_back(s.to);
    return out;
  }
  bool operator==(const Route&) const = default;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::optional<int> parse_positive(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v > 0 ? std::optional<int>(v) : std::nullopt;
}

}  // namespace detail

// Resolves "room 4", "4", a room label ("reception") or a node id to a room node id.
inline std::string resolve_room(const IndoorMap& map, std::string_view ref) {
  std::string text = detail::lower(detail::trim(ref));
  std::string number_part = text;
  if (text.rfind("room", 0) == 0) number_part = detail::trim(std::string_view(text).substr(4));
  if (auto n = detail::parse_positive(number_part)) {
    if (const MapNode* node = map.room_by_number(*n)) return node->id;
    throw RoutingError(RoutingError::Kind::unknown_room, "unknown room '" + std::string(ref) + "'");
  }
  for (const auto& node : map.nodes()) {
    if (node.kind != NodeKind::room) continue;
    if (node.id == ref || (node.label && detail::lower(*node.label) == text)) return node.id;
  }
  throw RoutingError(RoutingError::Kind::unknown_room, "unknown room '" + std::string(ref) + "'");
}

// Hop count unless every edge of the map carries a length.
inline bool uses_metric_cost(const IndoorMap& map) {
  return !map.edges().empty() &&
         std::all_of(map.edges().begin(), map.edges().end(), [](const MapEdge& e) { return e.length_m.has_value(); });
}

inline double route_cost(const IndoorMap& map, const Route& route) {
  const bool metric = uses_metric_cost(map);
  double total = 0.0;
  for (const auto& s : route.steps) total += metric ? *s.length_m : 1.0;
  return total;
}

// Minimum-cost route from `origin` to the room `destination`. Among equal-cost routes
// the lexicographically smallest node-id sequence wins, then the smaller
// (action, landmark) for parallel edges. Routing from anywhere but the map's start is
// an extension; the study protocol always starts at reception.
inline Route shortest_path_from(const IndoorMap& map, const std::string& origin, std::string_view destination) {
  if (!map.contains(origin)) {
    throw RoutingError(RoutingError::Kind::unknown_room, "unknown origin '" + origin + "'");
  }
  const std::string dest = resolve_room(map, destination);
  Route route{origin, dest, {}};
  if (dest == origin) return route;

  const bool metric = uses_metric_cost(map);
  auto cost = [metric](const MapEdge& e) { return metric ? *e.length_m : 1.0; };
  auto usable = [&](const MapEdge& e) {
    return map.contains(e.to) && map.may_pass_through(e.from, origin);
  };

  // Distances to the destination over reversed usable edges.
  std::unordered_map<std::string, std::vector<const MapEdge*>> incoming;
  for (const auto& e : map.edges()) {
    if (usable(e)) incoming[e.to].push_back(&e);
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::unordered_map<std::string, double> dist;
  auto dist_of = [&](const std::string& id) {
    auto it = dist.find(id);
    return it == dist.end() ? inf : it->second;
  };
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[dest] = 0.0;
  queue.emplace(0.0, dest);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist_of(v)) continue;
    for (const MapEdge* e : incoming[v]) {
      double nd = d + cost(*e);
      if (nd < dist_of(e->from)) {
        dist[e->from] = nd;
        queue.emplace(nd, e->from);
      }
    }
  }
  if (dist_of(origin) == inf) {
    throw RoutingError(RoutingError::Kind::unreachable, "room '" + std::string(destination) + "' is unreachable");
  }

  auto tight = [&](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  std::string at = origin;
  while (at != dest) {
    const MapEdge* best = nullptr;
    for (const MapEdge* e : map.out_edges(at)) {
      if (!usable(*e)) continue;
      double rest = dist_of(e->to);
      if (rest == inf || !tight(cost(*e) + rest, dist_of(at))) continue;
      if (best == nullptr || canonical_less(*e, *best)) best = e;
    }
    if (best == nullptr || route.steps.size() > map.edges().size()) {
      throw RoutingError(RoutingError::Kind::unreachable, "no consistent route to '" + dest + "'");
    }
    route.steps.push_back({best->from, best->to, best->action, best->landmark, best->length_m});
    at = best->to;
  }
  return route;
}

inline Route shortest_path(const IndoorMap& map, std::string_view destination) {
  return shortest_path_from(map, map.start(), destination);
}

// ---------------------------------------------------------------------------
// Segmentation

enum class SegmentKind { depart, decision, follow_decision, follow_arrive, arrive };

inline constexpr SegmentKind kAllSegmentKinds[] = {SegmentKind::depart, SegmentKind::decision,
                                                   SegmentKind::follow_decision, SegmentKind::follow_arrive,
                                                   SegmentKind::arrive};

inline std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::depart: return "depart";
    case SegmentKind::decision: return "decision";
    case SegmentKind::follow_decision: return "follow_decision";
    case SegmentKind::follow_arrive: return "follow_arrive";
    case SegmentKind::arrive: return "arrive";
  }
  return "?";
}

inline std::optional<SegmentKind> parse_segment_kind(std::string_view s) {
  for (auto k : kAllSegmentKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline bool has_follow(SegmentKind k) { return k == SegmentKind::follow_decision || k == SegmentKind::follow_arrive; }
inline bool has_turn(SegmentKind k) { return k == SegmentKind::decision || k == SegmentKind::follow_decision; }

// One verbalizable piece of a route: an optional straight run (`follow_hops` edges)
// ending in a turn or in entering the destination.
struct Segment {
  SegmentKind kind = SegmentKind::decision;
  std::optional<Action> direction;  // left or right
  std::optional<std::string> landmark;
  int follow_hops = 0;
  // Set when a follow phrase without a count would stop early; see annotate_follow_counts.
  bool count_required = false;

  bool operator==(const Segment&) const = default;
};

struct SegmentOptions {
  bool announce_departure = false;  // lead with a `depart` segment
};

// Straight runs fold into the next turn or arrival; a route may only enter a room as
// its final step.
inline std::vector<Segment> segment_route(const Route& route, SegmentOptions options = {}) {
  std::vector<Segment> out;
  if (route.steps.empty()) return out;
  if (options.announce_departure) out.push_back({SegmentKind::depart, {}, {}, 0, false});
  int run = 0;
  for (std::size_t i = 0; i < route.steps.size(); ++i) {
    const auto& step = route.steps[i];
    switch (step.action) {
      case Action::straight:
        ++run;
        break;
      case Action::left:
      case Action::right:
        out.push_back({run > 0 ? SegmentKind::follow_decision : SegmentKind::decision, step.action, step.landmark,
                       run, false});
        run = 0;
        break;
      case Action::enter:
        if (i + 1 != route.steps.size()) {
          throw std::invalid_argument("route enters room '" + step.to + "' before its destination");
        }
        out.push_back({run > 0 ? SegmentKind::follow_arrive : SegmentKind::arrive, std::nullopt, step.landmark, run,
                       false});
        run = 0;
        break;
    }
  }
  if (run > 0) throw std::invalid_argument("route ends in a straight run without entering a room");
  return out;
}

// Verbal content of one step: straight edges are never named by landmark.
struct VerbalStep {
  Action action = Action::straight;
  std::optional<std::string> landmark;
  bool operator==(const VerbalStep&) const = default;
};

inline std::vector<VerbalStep> route_signature(const Route& route) {
  std::vector<VerbalStep> out;
  for (const auto& s : route.steps) {
    out.push_back({s.action, s.action == Action::straight ? std::nullopt : s.landmark});
  }
  return out;
}

// Inverse of segment_route on route_signature.
inline std::vector<VerbalStep> flatten(const std::vector<Segment>& segments) {
  std::vector<VerbalStep> out;
  for (const auto& seg : segments) {
    for (int i = 0; i < seg.follow_hops; ++i) out.push_back({Action::straight, std::nullopt});
    switch (seg.kind) {
      case SegmentKind::depart: break;
      case SegmentKind::decision:
      case SegmentKind::follow_decision: out.push_back({*seg.direction, seg.landmark}); break;
      case SegmentKind::follow_arrive:
      case SegmentKind::arrive: out.push_back({Action::enter, seg.landmark}); break;
    }
  }
  return out;
}

// The requirement that ends a follow phrase, as the navigator will hear it in `style`.
inline walk::Requirement terminator(const Segment& seg, Style style) {
  if (has_turn(seg.kind)) {
    return {*seg.direction, style == Style::landmark ? seg.landmark : std::nullopt};
  }
  return {Action::enter, std::nullopt};
}

// Marks follow segments whose straight run passes a node where the terminating turn
// (or doorway) would already match, so "follow the corridor and ..." alone would send
// the navigator off early. Those segments must be phrased with an explicit count.
inline void annotate_follow_counts(const IndoorMap& map, const Route& route, Style style,
                                   std::vector<Segment>& segments) {
  std::size_t step = 0;
  for (auto& seg : segments) {
    if (seg.kind == SegmentKind::depart) continue;
    if (step >= route.steps.size()) throw std::invalid_argument("segments do not belong to this route");
    if (has_follow(seg.kind)) {
      std::optional<std::string> prev;
      if (step > 0) prev = route.steps[step - 1].from;
      const std::size_t end = step + static_cast<std::size_t>(seg.follow_hops);
      if (end >= route.steps.size()) throw std::invalid_argument("segments do not belong to this route");
      auto walked = walk::follow(map, route.steps[step].from, prev, terminator(seg, style), std::nullopt);
      seg.count_required = !(walked.status == walk::FollowStatus::stopped &&
                             walked.edges.size() == static_cast<std::size_t>(seg.follow_hops) &&
                             walked.node == route.steps[end].from);
    }
    step += static_cast<std::size_t>(seg.follow_hops) + 1;
  }
}

// segment_route followed by annotate_follow_counts.
inline std::vector<Segment> plan_segments(const IndoorMap& map, const Route& route, Style style,
                                          SegmentOptions options = {}) {
  auto segments = segment_route(route, options);
  annotate_follow_counts(map, route, style, segments);
  return segments;
}

}  // namespace waydirector

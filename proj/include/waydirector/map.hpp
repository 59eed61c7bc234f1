#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace waydirector {

enum class NodeKind { room, corridor, junction };
enum class Action { left, right, straight, enter };

inline std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::room: return "room";
    case NodeKind::corridor: return "corridor";
    case NodeKind::junction: return "junction";
  }
  return "?";
}

inline std::string_view to_string(Action action) {
  switch (action) {
    case Action::left: return "left";
    case Action::right: return "right";
    case Action::straight: return "straight";
    case Action::enter: return "enter";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  if (s == "room") return NodeKind::room;
  if (s == "corridor") return NodeKind::corridor;
  if (s == "junction") return NodeKind::junction;
  return std::nullopt;
}

inline std::optional<Action> parse_action(std::string_view s) {
  if (s == "left") return Action::left;
  if (s == "right") return Action::right;
  if (s == "straight") return Action::straight;
  if (s == "enter") return Action::enter;
  return std::nullopt;
}

inline bool is_turn(Action a) { return a == Action::left || a == Action::right; }

struct MapNode {
  std::string id;
  NodeKind kind = NodeKind::corridor;
  std::optional<std::string> label;
  std::optional<int> room_number;
  // Display hints for the web client; never read by routing.
  std::optional<double> x;
  std::optional<double> y;

  bool operator==(const MapNode&) const = default;
};

// A directed traversal. `action` is what the navigator does at `from` to reach `to`;
// `landmark` is the object placed at that decision point for this direction.
struct MapEdge {
  std::string from;
  std::string to;
  Action action = Action::straight;
  std::optional<std::string> landmark;
  std::optional<double> length_m;

  bool operator==(const MapEdge&) const = default;
};

inline bool canonical_less(const MapEdge& a, const MapEdge& b) {
  return std::tie(a.from, a.to, a.action, a.landmark, a.length_m) <
         std::tie(b.from, b.to, b.action, b.landmark, b.length_m);
}

// Graph knowledge base of an indoor map. Immutable once constructed: nodes are kept
// sorted by id and edges in canonical (from, to, action, landmark, length) order, so two
// maps built from differently ordered declarations compare equal.
//
// The constructor performs no validation; use validate_map() or parse_map().
class IndoorMap {
 public:
  IndoorMap() = default;
  IndoorMap(std::string name, std::string start, std::vector<MapNode> nodes, std::vector<MapEdge> edges)
      : name_(std::move(name)), start_(std::move(start)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::stable_sort(nodes_.begin(), nodes_.end(),
                     [](const MapNode& a, const MapNode& b) { return a.id < b.id; });
    std::stable_sort(edges_.begin(), edges_.end(), canonical_less);
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_.emplace(nodes_[i].id, i);
    for (std::size_t i = 0; i < edges_.size(); ++i) out_index_[edges_[i].from].push_back(i);
  }

  const std::string& name() const { return name_; }
  const std::string& start() const { return start_; }
  const std::vector<MapNode>& nodes() const { return nodes_; }
  const std::vector<MapEdge>& edges() const { return edges_; }

  const MapNode* find(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    return it == node_index_.end() ? nullptr : &nodes_[it->second];
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

  // Outgoing edges of `id` in canonical order.
  std::vector<const MapEdge*> out_edges(std::string_view id) const {
    std::vector<const MapEdge*> out;
    auto it = out_index_.find(std::string(id));
    if (it == out_index_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(&edges_[i]);
    return out;
  }

  const MapNode* room_by_number(int number) const {
    for (const auto& n : nodes_) {
      if (n.kind == NodeKind::room && n.room_number == number) return &n;
    }
    return nullptr;
  }

  // Rooms are destinations, not thoroughfares: a route may leave a room only when
  // that room is where the route begins.
  bool may_pass_through(std::string_view id, std::string_view origin) const {
    if (id == origin) return true;
    const MapNode* n = find(id);
    return n != nullptr && n->kind != NodeKind::room;
  }

  // Distinct landmark tokens used anywhere on the map, sorted.
  std::vector<std::string> landmark_vocabulary() const {
    std::set<std::string> vocab;
    for (const auto& e : edges_) {
      if (e.landmark) vocab.insert(*e.landmark);
    }
    return {vocab.begin(), vocab.end()};
  }

  bool operator==(const IndoorMap& other) const {
    return name_ == other.name_ && start_ == other.start_ && nodes_ == other.nodes_ &&
           edges_ == other.edges_;
  }

 private:
  std::string name_;
  std::string start_;
  std::vector<MapNode> nodes_;
  std::vector<MapEdge> edges_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> out_index_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationCode {
  duplicate_node,
  dangling_edge,
  missing_start,
  start_not_room,
  duplicate_room_number,
  room_number_on_non_room,
  invalid_room_number,
  enter_to_non_room,
  room_entry_not_enter,
  self_loop,
  landmark_format,
  invalid_length,
  landmark_ambiguous,
  duplicate_passage,
  unreachable,
};

inline std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::duplicate_node: return "DUPLICATE_NODE";
    case ViolationCode::dangling_edge: return "DANGLING_EDGE";
    case ViolationCode::missing_start: return "MISSING_START";
    case ViolationCode::start_not_room: return "START_NOT_ROOM";
    case ViolationCode::duplicate_room_number: return "DUPLICATE_ROOM_NUMBER";
    case ViolationCode::room_number_on_non_room: return "ROOM_NUMBER_ON_NON_ROOM";
    case ViolationCode::invalid_room_number: return "INVALID_ROOM_NUMBER";
    case ViolationCode::enter_to_non_room: return "ENTER_TO_NON_ROOM";
    case ViolationCode::room_entry_not_enter: return "ROOM_ENTRY_NOT_ENTER";
    case ViolationCode::self_loop: return "SELF_LOOP";
    case ViolationCode::landmark_format: return "LANDMARK_FORMAT";
    case ViolationCode::invalid_length: return "INVALID_LENGTH";
    case ViolationCode::landmark_ambiguous: return "LANDMARK_AMBIGUOUS";
    case ViolationCode::duplicate_passage: return "DUPLICATE_PASSAGE";
    case ViolationCode::unreachable: return "UNREACHABLE";
  }
  return "?";
}

struct Violation {
  ViolationCode code;
  std::string ref;  // node id, or "from->to" for edges
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool skeletal_safe = false;  // per node, the action alone selects one edge
  bool landmark_safe = false;  // per node, (action, landmark) selects one edge

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [code](const Violation& v) { return v.code == code; });
  }
};

// Lowercase token: [a-z0-9]+ separated by single hyphens.
inline bool is_landmark_token(std::string_view s) {
  if (s.empty() || s.front() == '-' || s.back() == '-') return false;
  char prev = 0;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    if (!ok || (c == '-' && prev == '-')) return false;
    prev = c;
  }
  return true;
}

inline std::string edge_ref(const MapEdge& e) { return e.from + "->" + e.to; }

// Nodes reachable from `origin` along directed edges, never leaving a room other than
// `origin` (see IndoorMap::may_pass_through).
inline std::set<std::string> reachable_from(const IndoorMap& map, const std::string& origin) {
  std::set<std::string> seen;
  if (!map.contains(origin)) return seen;
  std::vector<std::string> stack{origin};
  seen.insert(origin);
  while (!stack.empty()) {
    std::string u = std::move(stack.back());
    stack.pop_back();
    if (!map.may_pass_through(u, origin)) continue;
    for (const MapEdge* e : map.out_edges(u)) {
      if (map.contains(e->to) && seen.insert(e->to).second) stack.push_back(e->to);
    }
  }
  return seen;
}

inline ValidationReport validate_map(const IndoorMap& map) {
  ValidationReport report;
  auto add = [&](ViolationCode code, std::string ref, std::string message) {
    report.violations.push_back({code, std::move(ref), std::move(message)});
  };

  std::set<std::string> ids;
  std::map<int, std::string> room_numbers;
  for (const auto& n : map.nodes()) {
    if (!ids.insert(n.id).second) add(ViolationCode::duplicate_node, n.id, "node id declared twice");
    if (n.room_number) {
      if (n.kind != NodeKind::room) {
        add(ViolationCode::room_number_on_non_room, n.id, "room number on a non-room node");
      }
      if (*n.room_number <= 0) {
        add(ViolationCode::invalid_room_number, n.id, "room numbers must be positive");
      }
      auto [it, inserted] = room_numbers.emplace(*n.room_number, n.id);
      if (!inserted) {
        add(ViolationCode::duplicate_room_number, n.id,
            "room " + std::to_string(*n.room_number) + " already used by " + it->second);
      }
    }
  }

  const MapNode* start = map.find(map.start());
  if (map.start().empty() || start == nullptr) {
    add(ViolationCode::missing_start, map.start(), "start node is missing or undeclared");
  } else if (start->kind != NodeKind::room) {
    add(ViolationCode::start_not_room, start->id, "start node must be a room");
  }

  for (const auto& e : map.edges()) {
    const MapNode* from = map.find(e.from);
    const MapNode* to = map.find(e.to);
    if (from == nullptr || to == nullptr) {
      add(ViolationCode::dangling_edge, edge_ref(e),
          "edge endpoint '" + (from == nullptr ? e.from : e.to) + "' is not declared");
      continue;
    }
    if (e.from == e.to) add(ViolationCode::self_loop, edge_ref(e), "edge loops onto its own node");
    if (e.action == Action::enter && to->kind != NodeKind::room) {
      add(ViolationCode::enter_to_non_room, edge_ref(e), "action=enter must lead into a room");
    }
    if (to->kind == NodeKind::room && e.action != Action::enter && e.to != map.start()) {
      add(ViolationCode::room_entry_not_enter, edge_ref(e), "rooms are entered with action=enter");
    }
    if (e.landmark && !is_landmark_token(*e.landmark)) {
      add(ViolationCode::landmark_format, edge_ref(e),
          "landmark '" + *e.landmark + "' is not a lowercase token");
    }
    if (e.length_m && !(*e.length_m > 0.0)) {
      add(ViolationCode::invalid_length, edge_ref(e), "edge length must be positive");
    }
  }

  bool skeletal_safe = true;
  bool landmark_safe = true;
  for (const auto& n : map.nodes()) {
    std::map<Action, int> by_action;
    std::map<std::pair<Action, std::optional<std::string>>, int> by_pair;
    for (const MapEdge* e : map.out_edges(n.id)) {
      ++by_action[e->action];
      ++by_pair[{e->action, e->landmark}];
    }
    for (const auto& [action, count] : by_action) {
      if (count < 2) continue;
      skeletal_safe = false;
      // Straight runs and doorways are never verbalized with a landmark, so
      // a landmark cannot tell two of them apart.
      if (action == Action::straight || action == Action::enter) {
        landmark_safe = false;
        add(ViolationCode::duplicate_passage, n.id,
            std::to_string(count) + " outgoing '" + std::string(to_string(action)) + "' edges");
      }
    }
    for (const auto& [key, count] : by_pair) {
      if (count < 2 || key.first == Action::straight || key.first == Action::enter) continue;
      landmark_safe = false;
      add(ViolationCode::landmark_ambiguous, n.id,
          std::to_string(count) + " outgoing edges share action '" + std::string(to_string(key.first)) +
              "' and landmark '" + key.second.value_or("") + "'");
    }
  }

  if (start != nullptr) {
    auto seen = reachable_from(map, map.start());
    for (const auto& n : map.nodes()) {
      if (n.kind == NodeKind::room && !seen.contains(n.id)) {
        add(ViolationCode::unreachable, n.id, "room is not reachable from the start");
      }
    }
  }

  report.skeletal_safe = skeletal_safe;
  report.landmark_safe = landmark_safe;
  return report;
}

}  // namespace waydirector

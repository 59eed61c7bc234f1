#pragma once

#include <optional>
#include <string>
#include <vector>

#include "waydirector/map.hpp"

// How a navigator executes one instruction at a node. Shared by the simulator and
// by the router, which uses it to find straight runs that would be misread unless
// their length is spoken.
namespace waydirector::walk {

// What an instruction asks for at the current node. `landmark` is compared only when
// set; skeletal instructions and doorways leave it empty.
struct Requirement {
  Action action = Action::straight;
  std::optional<std::string> landmark;
};

// Edges at `node` satisfying `req`, never doubling back to `prev`.
inline std::vector<const MapEdge*> candidates(const IndoorMap& map, const std::string& node,
                                              const std::optional<std::string>& prev,
                                              const Requirement& req) {
  std::vector<const MapEdge*> out;
  for (const MapEdge* e : map.out_edges(node)) {
    if (prev && e->to == *prev) continue;
    if (e->action != req.action) continue;
    if (req.landmark && e->landmark != req.landmark) continue;
    out.push_back(e);
  }
  return out;
}

enum class FollowStatus { stopped, ambiguous, dead_end };

struct FollowResult {
  FollowStatus status = FollowStatus::stopped;
  std::vector<const MapEdge*> edges;  // straight edges taken
  std::string node;                   // where the walk ended
  std::optional<std::string> prev;
};

// Walks along straight edges. With `hops`, takes exactly that many. Without, takes at
// least one and stops at the first node where `until` selects an edge (any number of
// them; ambiguity there is the caller's concern).
inline FollowResult follow(const IndoorMap& map, std::string node, std::optional<std::string> prev,
                           const std::optional<Requirement>& until, std::optional<int> hops) {
  FollowResult result;
  const std::size_t limit = map.edges().size() + 1;
  const Requirement straight{Action::straight, std::nullopt};
  for (std::size_t taken = 0;; ++taken) {
    if (hops && static_cast<int>(taken) == *hops) break;
    if (!hops && taken > 0 && until && !candidates(map, node, prev, *until).empty()) break;
    if (taken >= limit) {
      result.status = FollowStatus::dead_end;
      break;
    }
    auto next = candidates(map, node, prev, straight);
    if (next.size() != 1) {
      result.status = next.empty() ? FollowStatus::dead_end : FollowStatus::ambiguous;
      break;
    }
    result.edges.push_back(next.front());
    prev = node;
    node = next.front()->to;
  }
  result.node = std::move(node);
  result.prev = std::move(prev);
  return result;
}

}  // namespace waydirector::walk

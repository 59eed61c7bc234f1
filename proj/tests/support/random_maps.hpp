#pragma once

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "waydirector/map.hpp"

namespace waydirector::testkit {

inline const std::vector<std::string>& landmark_pool() {
  static const std::vector<std::string> pool{"sofa",  "tv",     "plant",   "fire-extinguisher", "clock",
                                             "poster", "printer", "statue", "vending-machine",  "mirror"};
  return pool;
}

struct RandomMapOptions {
  int min_nodes = 3;
  int max_nodes = 30;
  double room_share = 0.35;      // chance a new node is a room (via a door)
  int cross_links = 3;           // extra corridor-to-corridor edges, creating alternatives
  int back_edges = 2;            // reverse traversals of existing corridor edges
  double metric_chance = 0.3;    // chance every edge gets a length
  double straight_landmark = 0.2;
};

// Builds a style-safe office: corridors grow from the start room, rooms hang off
// corridor nodes through doors, and each node uses every action at most once.
inline IndoorMap random_office(std::mt19937_64& rng, const RandomMapOptions& opt = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& vocab = landmark_pool();
  auto pick_landmark = [&] { return vocab[rng() % vocab.size()]; };

  const int target = opt.min_nodes + static_cast<int>(rng() % static_cast<unsigned>(opt.max_nodes - opt.min_nodes + 1));
  std::vector<MapNode> nodes;
  std::vector<MapEdge> edges;
  struct Open {
    std::string id;
    std::vector<Action> free;
  };
  std::vector<Open> open;
  int rooms = 0;
  int corridors = 0;
  auto id_of = [](char prefix, int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%02d", prefix, n);
    return std::string(buf);
  };

  nodes.push_back({"a00", NodeKind::room, std::string("reception"), std::nullopt, std::nullopt, std::nullopt});
  open.push_back({"a00", {Action::left, Action::right, Action::straight, Action::enter}});

  // With `want_enter`, takes the door if it is still free; otherwise any other action.
  auto free_action = [&](Open& o, bool want_enter) -> std::optional<Action> {
    if (want_enter) {
      auto door = std::find(o.free.begin(), o.free.end(), Action::enter);
      if (door != o.free.end()) {
        o.free.erase(door);
        return Action::enter;
      }
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < o.free.size(); ++i) {
      if (o.free[i] != Action::enter) idx.push_back(i);
    }
    if (idx.empty()) return std::nullopt;
    std::size_t k = idx[rng() % idx.size()];
    Action a = o.free[k];
    o.free.erase(o.free.begin() + static_cast<long>(k));
    return a;
  };

  while (static_cast<int>(nodes.size()) < target && !open.empty()) {
    std::size_t oi = rng() % open.size();
    bool make_room = unit(rng) < opt.room_share || static_cast<int>(nodes.size()) + 1 == target;
    if (rooms == 0 && static_cast<int>(nodes.size()) + 1 == target) make_room = true;
    auto action = free_action(open[oi], make_room);
    if (!action) {
      if (open[oi].free.empty()) open.erase(open.begin() + static_cast<long>(oi));
      continue;
    }
    std::string from = open[oi].id;
    if (open[oi].free.empty()) open.erase(open.begin() + static_cast<long>(oi));
    if (*action == Action::enter) {
      ++rooms;
      std::string id = id_of('r', rooms);
      nodes.push_back({id, NodeKind::room, std::nullopt, rooms, std::nullopt, std::nullopt});
      edges.push_back({from, id, Action::enter, std::nullopt, std::nullopt});
    } else {
      ++corridors;
      std::string id = id_of('c', corridors);
      nodes.push_back({id, corridors % 4 == 0 ? NodeKind::junction : NodeKind::corridor, std::nullopt, std::nullopt,
                       std::nullopt, std::nullopt});
      std::optional<std::string> mark;
      if (is_turn(*action) || unit(rng) < opt.straight_landmark) mark = pick_landmark();
      edges.push_back({from, id, *action, mark, std::nullopt});
      open.push_back({id, {Action::left, Action::right, Action::straight, Action::enter}});
    }
  }
  // A corridor-only map is useless as a routing target; hang a room somewhere.
  if (rooms == 0) {
    for (auto& o : open) {
      auto it = std::find(o.free.begin(), o.free.end(), Action::enter);
      if (it == o.free.end()) continue;
      o.free.erase(it);
      ++rooms;
      nodes.push_back({id_of('r', rooms), NodeKind::room, std::nullopt, rooms, std::nullopt, std::nullopt});
      edges.push_back({o.id, id_of('r', rooms), Action::enter, std::nullopt, std::nullopt});
      break;
    }
  }

  std::vector<std::string> corridor_ids;
  for (const auto& n : nodes) {
    if (n.kind != NodeKind::room) corridor_ids.push_back(n.id);
  }
  auto find_open = [&](const std::string& id) -> Open* {
    for (auto& o : open) {
      if (o.id == id) return &o;
    }
    return nullptr;
  };
  auto link = [&](const std::string& from, const std::string& to) {
    Open* o = find_open(from);
    if (o == nullptr || from == to) return;
    auto action = free_action(*o, false);
    if (!action) return;
    std::optional<std::string> mark;
    if (is_turn(*action)) mark = pick_landmark();
    edges.push_back({from, to, *action, mark, std::nullopt});
  };
  if (corridor_ids.size() >= 2) {
    for (int i = 0; i < opt.cross_links; ++i) {
      link(corridor_ids[rng() % corridor_ids.size()], corridor_ids[rng() % corridor_ids.size()]);
    }
  }
  const std::size_t tree_edges = edges.size();
  for (int i = 0; i < opt.back_edges && tree_edges > 0; ++i) {
    const MapEdge e = edges[rng() % tree_edges];
    if (e.action == Action::enter) continue;
    link(e.to, e.from);
  }

  if (unit(rng) < opt.metric_chance) {
    std::uniform_int_distribution<int> metres(1, 9);
    for (auto& e : edges) e.length_m = metres(rng);
  }
  return IndoorMap("random", "a00", std::move(nodes), std::move(edges));
}

}  // namespace waydirector::testkit

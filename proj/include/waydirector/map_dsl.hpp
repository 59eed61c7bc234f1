#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "waydirector/lexer.hpp"
#include "waydirector/map.hpp"

// Reader and writer for the line-oriented map format:
//
//   map <name>
//   start <id>
//   node <id> kind=<room|corridor|junction> [label="..."] [room=<int>] [x=<float>] [y=<float>]
//   edge <from> <to> action=<left|right|straight|enter> [landmark="..."] [length=<float>]
//        [back=<action>] [back_landmark="..."]
//
// `back=` declares the reverse traversal with its own action (and landmark).

namespace waydirector {

class MapParseError : public SyntaxError {
 public:
  enum class Kind { syntax, duplicate_node, dangling_endpoint, missing_start, duplicate_room_number };

  MapParseError(Kind kind, int line, int column, const std::string& message)
      : SyntaxError(line, column, message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline double parse_real(const lex::Token& tok, int line) {
  double value = 0.0;
  const char* first = tok.value.data();
  const char* last = first + tok.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw MapParseError(MapParseError::Kind::syntax, line, tok.column,
                        "'" + tok.key + "' expects a number, got '" + tok.value + "'");
  }
  return value;
}

inline int parse_int(const lex::Token& tok, int line) {
  int value = 0;
  const char* first = tok.value.data();
  const char* last = first + tok.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw MapParseError(MapParseError::Kind::syntax, line, tok.column,
                        "'" + tok.key + "' expects an integer, got '" + tok.value + "'");
  }
  return value;
}

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

inline void expect_bare(const lex::Token& tok, int line, std::string_view what) {
  if (tok.is_pair() || tok.quoted) {
    throw MapParseError(MapParseError::Kind::syntax, line, tok.column,
                        "expected " + std::string(what));
  }
}

}  // namespace detail

inline IndoorMap parse_map(std::string_view text) {
  using Kind = MapParseError::Kind;

  std::optional<std::string> name;
  struct StartDecl {
    std::string id;
    int line;
    int column;
  };
  std::optional<StartDecl> start;
  std::vector<MapNode> nodes;
  std::map<std::string, int> node_lines;
  std::map<int, std::string> room_owner;
  struct PendingEdge {
    MapEdge edge;
    int line;
    int from_col;
    int to_col;
  };
  std::vector<PendingEdge> pending;

  std::vector<lex::Line> lines;
  try {
    lines = lex::tokenize(text);
  } catch (const SyntaxError& e) {
    throw MapParseError(MapParseError::Kind::syntax, e.line(), e.column(), e.message());
  }
  for (const auto& line : lines) {
    const auto& toks = line.tokens;
    const int ln = line.number;
    const auto& head = toks.front();
    detail::expect_bare(head, ln, "a directive");
    const std::string& directive = head.value;

    if (directive == "map") {
      if (toks.size() != 2) throw MapParseError(Kind::syntax, ln, head.column, "usage: map <name>");
      if (name) throw MapParseError(Kind::syntax, ln, head.column, "duplicate 'map' directive");
      if (toks[1].is_pair()) throw MapParseError(Kind::syntax, ln, toks[1].column, "expected a map name");
      name = toks[1].value;
    } else if (directive == "start") {
      if (toks.size() != 2) throw MapParseError(Kind::syntax, ln, head.column, "usage: start <id>");
      if (start) throw MapParseError(Kind::syntax, ln, head.column, "duplicate 'start' directive");
      detail::expect_bare(toks[1], ln, "a node id");
      start = StartDecl{toks[1].value, ln, toks[1].column};
    } else if (directive == "node") {
      if (toks.size() < 2) throw MapParseError(Kind::syntax, ln, head.column, "usage: node <id> kind=<kind> ...");
      detail::expect_bare(toks[1], ln, "a node id");
      MapNode node;
      node.id = toks[1].value;
      bool have_kind = false;
      int room_col = 0;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (!t.is_pair()) throw MapParseError(Kind::syntax, ln, t.column, "expected key=value");
        if (t.key == "kind") {
          auto kind = parse_node_kind(t.value);
          if (!kind) throw MapParseError(Kind::syntax, ln, t.column, "unknown node kind '" + t.value + "'");
          node.kind = *kind;
          have_kind = true;
        } else if (t.key == "label") {
          node.label = t.value;
        } else if (t.key == "room") {
          node.room_number = detail::parse_int(t, ln);
          if (*node.room_number <= 0) {
            throw MapParseError(Kind::syntax, ln, t.column, "room numbers must be positive");
          }
          room_col = t.column;
        } else if (t.key == "x") {
          node.x = detail::parse_real(t, ln);
        } else if (t.key == "y") {
          node.y = detail::parse_real(t, ln);
        } else {
          throw MapParseError(Kind::syntax, ln, t.column, "unknown node attribute '" + t.key + "'");
        }
      }
      if (!have_kind) throw MapParseError(Kind::syntax, ln, head.column, "node '" + node.id + "' needs kind=");
      if (auto it = node_lines.find(node.id); it != node_lines.end()) {
        throw MapParseError(Kind::duplicate_node, ln, toks[1].column,
                            "node '" + node.id + "' already declared on line " + std::to_string(it->second));
      }
      if (node.room_number) {
        auto [it, inserted] = room_owner.emplace(*node.room_number, node.id);
        if (!inserted) {
          throw MapParseError(Kind::duplicate_room_number, ln, room_col,
                              "room " + std::to_string(*node.room_number) + " already assigned to '" +
                                  it->second + "'");
        }
      }
      node_lines.emplace(node.id, ln);
      nodes.push_back(std::move(node));
    } else if (directive == "edge") {
      if (toks.size() < 3) throw MapParseError(Kind::syntax, ln, head.column, "usage: edge <from> <to> action=...");
      detail::expect_bare(toks[1], ln, "a node id");
      detail::expect_bare(toks[2], ln, "a node id");
      MapEdge edge;
      edge.from = toks[1].value;
      edge.to = toks[2].value;
      std::optional<Action> back;
      std::optional<std::string> back_landmark;
      int back_landmark_col = 0;
      bool have_action = false;
      for (std::size_t i = 3; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (!t.is_pair()) throw MapParseError(Kind::syntax, ln, t.column, "expected key=value");
        if (t.key == "action" || t.key == "back") {
          auto action = parse_action(t.value);
          if (!action) throw MapParseError(Kind::syntax, ln, t.column, "unknown action '" + t.value + "'");
          (t.key == "action" ? edge.action : back.emplace()) = *action;
          if (t.key == "action") have_action = true;
        } else if (t.key == "landmark" || t.key == "back_landmark") {
          if (t.value.empty()) throw MapParseError(Kind::syntax, ln, t.column, "landmark must be non-empty");
          if (t.key == "landmark") {
            edge.landmark = t.value;
          } else {
            back_landmark = t.value;
            back_landmark_col = t.column;
          }
        } else if (t.key == "length") {
          edge.length_m = detail::parse_real(t, ln);
          if (!(*edge.length_m > 0.0)) throw MapParseError(Kind::syntax, ln, t.column, "length must be positive");
        } else {
          throw MapParseError(Kind::syntax, ln, t.column, "unknown edge attribute '" + t.key + "'");
        }
      }
      if (!have_action) throw MapParseError(Kind::syntax, ln, head.column, "edge needs action=");
      if (back_landmark && !back) {
        throw MapParseError(Kind::syntax, ln, back_landmark_col, "back_landmark requires back=");
      }
      pending.push_back({edge, ln, toks[1].column, toks[2].column});
      if (back) {
        MapEdge reverse{edge.to, edge.from, *back, back_landmark, edge.length_m};
        pending.push_back({std::move(reverse), ln, toks[2].column, toks[1].column});
      }
    } else {
      throw MapParseError(Kind::syntax, ln, head.column, "unknown directive '" + directive + "'");
    }
  }

  if (!name) throw MapParseError(Kind::syntax, 1, 1, "missing 'map <name>' directive");
  if (!start) throw MapParseError(Kind::missing_start, 1, 1, "missing 'start <id>' directive");
  if (!node_lines.contains(start->id)) {
    throw MapParseError(Kind::dangling_endpoint, start->line, start->column,
                        "start node '" + start->id + "' is not declared");
  }
  std::vector<MapEdge> edges;
  edges.reserve(pending.size());
  for (auto& p : pending) {
    if (!node_lines.contains(p.edge.from)) {
      throw MapParseError(Kind::dangling_endpoint, p.line, p.from_col,
                          "edge endpoint '" + p.edge.from + "' is not declared");
    }
    if (!node_lines.contains(p.edge.to)) {
      throw MapParseError(Kind::dangling_endpoint, p.line, p.to_col,
                          "edge endpoint '" + p.edge.to + "' is not declared");
    }
    edges.push_back(std::move(p.edge));
  }
  return IndoorMap(*name, start->id, std::move(nodes), std::move(edges));
}

inline IndoorMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

// Canonical document: map, start, nodes by id, then edges by (from, to, action). A
// pair of opposite edges with equal length is folded into one `back=` directive.
inline std::string serialize_map(const IndoorMap& map) {
  std::ostringstream out;
  out << "map " << map.name() << "\n";
  out << "start " << map.start() << "\n";
  for (const auto& n : map.nodes()) {
    out << "node " << n.id << " kind=" << to_string(n.kind);
    if (n.label) out << " label=" << lex::quote(*n.label);
    if (n.room_number) out << " room=" << *n.room_number;
    if (n.x) out << " x=" << detail::format_real(*n.x);
    if (n.y) out << " y=" << detail::format_real(*n.y);
    out << "\n";
  }
  const auto& edges = map.edges();
  std::vector<bool> used(edges.size(), false);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const MapEdge& e = edges[i];
    const MapEdge* back = nullptr;
    if (e.from < e.to) {
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (!used[j] && edges[j].from == e.to && edges[j].to == e.from && edges[j].length_m == e.length_m) {
          used[j] = true;
          back = &edges[j];
          break;
        }
      }
    }
    out << "edge " << e.from << " " << e.to << " action=" << to_string(e.action);
    if (e.landmark) out << " landmark=" << lex::quote(*e.landmark);
    if (e.length_m) out << " length=" << detail::format_real(*e.length_m);
    if (back) {
      out << " back=" << to_string(back->action);
      if (back->landmark) out << " back_landmark=" << lex::quote(*back->landmark);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace waydirector

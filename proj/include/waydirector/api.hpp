#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "waydirector/dialogue.hpp"
#include "waydirector/map.hpp"
#include "waydirector/navsim.hpp"
#include "waydirector/report.hpp"
#include "waydirector/session.hpp"
#include "waydirector/templates.hpp"

namespace waydirector::api {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceOptions {
  std::filesystem::path session_dir;  // empty: session and stats endpoints answer 503
  report::AnalysisOptions analysis;
};

struct Response {
  int status = 200;
  json body;
};

inline Response error_response(int status, std::string code, std::string message) {
  return {status, json{{"code", std::move(code)}, {"message", std::move(message)}}};
}

// ---------------------------------------------------------------------------
// JSON views

inline json map_to_json(const IndoorMap& map) {
  json j;
  j["name"] = map.name();
  j["start"] = map.start();
  j["nodes"] = json::array();
  for (const auto& n : map.nodes()) {
    json nj{{"id", n.id}, {"kind", to_string(n.kind)}};
    if (n.label) nj["label"] = *n.label;
    if (n.room_number) nj["room"] = *n.room_number;
    if (n.x) nj["x"] = *n.x;
    if (n.y) nj["y"] = *n.y;
    j["nodes"].push_back(std::move(nj));
  }
  j["edges"] = json::array();
  for (const auto& e : map.edges()) {
    json ej{{"from", e.from}, {"to", e.to}, {"action", to_string(e.action)}};
    if (e.landmark) ej["landmark"] = *e.landmark;
    if (e.length_m) ej["length"] = *e.length_m;
    j["edges"].push_back(std::move(ej));
  }
  return j;
}

inline json segment_to_json(const Segment& s) {
  json j{{"kind", to_string(s.kind)}};
  if (s.direction) j["direction"] = to_string(*s.direction);
  if (s.landmark) j["landmark"] = *s.landmark;
  j["follow_hops"] = s.follow_hops;
  j["count_required"] = s.count_required;
  return j;
}

inline json action_to_json(const NavAction& a) {
  json j{{"verb", to_string(a.verb)}};
  if (a.direction) j["direction"] = to_string(*a.direction);
  if (a.landmark) j["landmark"] = *a.landmark;
  if (a.hops) j["hops"] = *a.hops;
  return j;
}

inline json intent_to_json(const Intent& i) {
  json j{{"kind", to_string(i.kind)}};
  if (i.destination) j["destination"] = *i.destination;
  if (i.kind == IntentKind::navigate) j["resolved"] = i.resolved();
  if (i.node) j["node"] = *i.node;
  if (i.style) j["style"] = to_string(*i.style);
  j["utterance"] = i.raw;
  return j;
}

inline json route_response(const RoundTrip& rt, std::string_view destination) {
  json j;
  j["destination"] = destination;
  j["node"] = rt.route.destination;
  j["style"] = to_string(rt.script.style);
  j["seed"] = rt.script.seed;
  j["sentences"] = rt.script.sentences;
  j["text"] = rt.script.text();
  j["route"] = rt.route.nodes();
  j["segments"] = json::array();
  for (const auto& s : rt.script.source_segments) j["segments"].push_back(segment_to_json(s));
  json trace;
  trace["ok"] = rt.ok;
  trace["outcome"] = to_string(rt.trace.outcome.kind);
  trace["node"] = rt.trace.outcome.node;
  trace["visited"] = rt.trace.visited;
  trace["actions"] = json::array();
  for (const auto& a : rt.actions) trace["actions"].push_back(action_to_json(a));
  j["trace"] = std::move(trace);
  return j;
}

// ---------------------------------------------------------------------------
// Service

// Transport-independent request handling; http_server.hpp binds it to HTTP. The map
// and templates are immutable after construction, so route and intent requests need
// no locking. Session appends are serialized per participant.
class Service {
 public:
  Service(IndoorMap map, TemplateSet templates, ServiceOptions options = {})
      : map_(std::move(map)), templates_(std::move(templates)), options_(std::move(options)) {
    const ValidationReport report = validate_map(map_);
    if (!report.ok() || !report.skeletal_safe || !report.landmark_safe) {
      std::string why = "map is not servable:";
      for (const auto& v : report.violations) why += " " + std::string(to_string(v.code)) + " (" + v.message + ");";
      if (report.ok()) why += " not safe for both styles";
      throw ConfigError(why);
    }
    if (!options_.session_dir.empty()) std::filesystem::create_directories(options_.session_dir);
  }

  const IndoorMap& map() const { return map_; }

  Response handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      if (path == "/healthz") return method == "GET" ? Response{200, {{"status", "ok"}}} : not_allowed();
      if (path == "/api/map") return method == "GET" ? Response{200, map_to_json(map_)} : not_allowed();
      if (path == "/api/stats") return method == "GET" ? stats() : not_allowed();
      if (path == "/api/route") return method == "POST" ? route(parse_body(body)) : not_allowed();
      if (path == "/api/intent") return method == "POST" ? intent(parse_body(body)) : not_allowed();
      if (path == "/api/session/events") return method == "POST" ? session_events(parse_body(body)) : not_allowed();
      return error_response(404, "not_found", "no endpoint " + std::string(path));
    } catch (const BadRequest& e) {
      return error_response(400, e.code, e.what());
    } catch (const std::exception&) {
      return error_response(500, "internal", "internal error");
    }
  }

  Response route(const json& req) const {
    const std::string destination = required_string(req, "destination");
    Style style = Style::landmark;
    if (req.contains("style")) {
      if (!req["style"].is_string()) throw BadRequest("bad_style", "style must be \"landmark\" or \"skeletal\"");
      auto s = parse_style(req["style"].get<std::string>());
      if (!s) throw BadRequest("bad_style", "style must be \"landmark\" or \"skeletal\"");
      style = *s;
    }
    std::uint64_t seed = 0;
    if (req.contains("seed") && !req["seed"].is_null()) {
      if (!req["seed"].is_number_unsigned()) throw BadRequest("bad_request", "seed must be a non-negative integer");
      seed = req["seed"].get<std::uint64_t>();
    } else {
      seed = fresh_seed();
    }
    RoundTripOptions opt;
    opt.generation.include_arrival = optional_bool(req, "arrival");
    opt.segments.announce_departure = optional_bool(req, "depart");

    try {
      resolve_room(map_, destination);
      const Route probe = shortest_path(map_, destination);
      (void)probe;
    } catch (const RoutingError& e) {
      if (e.kind() == RoutingError::Kind::unknown_room) return error_response(400, "unknown_room", e.what());
      return error_response(422, "unreachable", e.what());
    }
    const RoundTrip rt = verify_roundtrip(map_, destination, style, seed, templates_, opt);
    if (!rt.ok) {
      return error_response(500, "unverified", "the generated directions did not pass simulated execution");
    }
    return {200, route_response(rt, destination)};
  }

  Response intent(const json& req) const {
    return {200, intent_to_json(recognize_intent(required_string(req, "utterance"), map_))};
  }

  // Body: {"participant_id": ..., "events": [...]} or {"participant_id": ..., "event": {...}}.
  // Events without "t" are stamped with the server clock. A batch is applied whole or
  // not at all.
  Response session_events(const json& req) {
    if (options_.session_dir.empty()) return error_response(503, "sessions_disabled", "no session directory configured");
    const std::string pid = required_string(req, "participant_id");
    if (!session::valid_participant_id(pid)) {
      throw BadRequest("bad_request", "participant_id must be 1-64 letters, digits, '-' or '_'");
    }
    std::vector<json> events;
    if (req.contains("events") && req["events"].is_array()) {
      events = req["events"].get<std::vector<json>>();
    } else if (req.contains("event") && req["event"].is_object()) {
      events.push_back(req["event"]);
    } else {
      throw BadRequest("bad_request", "expected \"events\" (array) or \"event\" (object)");
    }
    if (events.empty()) throw BadRequest("bad_request", "no events");

    Participant& p = participant(pid);
    std::lock_guard lock(p.mutex);
    if (!p.loaded) {
      const auto log = session::events_path(options_.session_dir, pid);
      if (std::filesystem::exists(log)) {
        std::ifstream in(log);
        for (const auto& e : session::parse_event_lines(in)) p.builder.apply(e);
      }
      p.loaded = true;
    }
    if (p.builder.finished()) return error_response(409, "session_finished", "session " + pid + " has already ended");

    session::SessionBuilder next = p.builder;
    for (auto& e : events) {
      if (!e.is_object()) throw BadRequest("invalid_event", "events must be objects");
      if (!e.contains("t")) {
        json stamped{{"t", session::system_clock_ms()}};
        for (auto& [k, v] : e.items()) stamped[k] = v;
        e = std::move(stamped);
      }
      if (e.value("type", "") == "session_start" && e.value("participant_id", "") != pid) {
        throw BadRequest("invalid_event", "session_start names a different participant");
      }
      try {
        next.apply(e);
      } catch (const session::SessionError& err) {
        throw BadRequest("invalid_event", err.what());
      }
    }
    session::EventLog log(session::events_path(options_.session_dir, pid));
    for (const auto& e : events) log.append(e);
    p.builder = std::move(next);
    session::write_record(session::record_path(options_.session_dir, pid), p.builder.record());
    return {200,
            json{{"participant_id", pid},
                 {"accepted", events.size()},
                 {"events_total", p.builder.record().events.size()},
                 {"complete", p.builder.record().complete},
                 {"finished", p.builder.finished()}}};
  }

  Response stats() const {
    if (options_.session_dir.empty()) return error_response(503, "sessions_disabled", "no session directory configured");
    auto loaded = report::load_sessions(options_.session_dir);
    try {
      return {200, report::to_json(report::analyze_sessions(loaded.records, options_.analysis, loaded.unreadable))};
    } catch (const report::ReportError& e) {
      return error_response(422, "insufficient_data", e.what());
    }
  }

 private:
  struct BadRequest : std::runtime_error {
    BadRequest(std::string c, const std::string& m) : std::runtime_error(m), code(std::move(c)) {}
    std::string code;
  };

  struct Participant {
    std::mutex mutex;
    bool loaded = false;
    session::SessionBuilder builder;
  };

  static Response not_allowed() { return error_response(405, "method_not_allowed", "method not allowed"); }

  static json parse_body(std::string_view body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception&) {
      throw BadRequest("bad_request", "body is not valid JSON");
    }
    if (!j.is_object()) throw BadRequest("bad_request", "body must be a JSON object");
    return j;
  }

  static std::string required_string(const json& req, const char* key) {
    if (!req.contains(key) || !req[key].is_string()) {
      throw BadRequest("bad_request", std::string("\"") + key + "\" (string) is required");
    }
    return req[key].get<std::string>();
  }

  static bool optional_bool(const json& req, const char* key) {
    if (!req.contains(key)) return false;
    if (!req[key].is_boolean()) throw BadRequest("bad_request", std::string("\"") + key + "\" must be a boolean");
    return req[key].get<bool>();
  }

  // Kept below 2^53 so browser clients can echo it back exactly.
  std::uint64_t fresh_seed() const {
    std::lock_guard lock(seed_mutex_);
    return seed_rng_() & ((std::uint64_t{1} << 53) - 1);
  }

  Participant& participant(const std::string& pid) {
    std::lock_guard lock(participants_mutex_);
    auto& slot = participants_[pid];
    if (!slot) slot = std::make_unique<Participant>();
    return *slot;
  }

  IndoorMap map_;
  TemplateSet templates_;
  ServiceOptions options_;
  mutable std::mutex seed_mutex_;
  mutable std::mt19937_64 seed_rng_{std::random_device{}()};
  std::mutex participants_mutex_;
  std::map<std::string, std::unique_ptr<Participant>> participants_;
};

}  // namespace waydirector::api

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "waydirector/dialogue.hpp"
#include "waydirector/map.hpp"
#include "waydirector/nlg.hpp"
#include "waydirector/random.hpp"
#include "waydirector/stats.hpp"
#include "waydirector/style.hpp"
#include "waydirector/templates.hpp"

namespace waydirector::session {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kRecordSchema = "waydirector.session/1";

class SessionError : public std::runtime_error {
 public:
  enum class Kind { invalid_event, invalid_record, io };
  SessionError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Study protocol: the three task rooms asked in each condition and the questionnaire
// scales. Animacy defaults to five items; set item_count to change it.
struct Protocol {
  std::vector<int> task_rooms{5, 3, 7};
  stats::ScaleDefinition nars{"nars", 14, 5, {}};
  stats::ScaleDefinition ptt{"ptt", 6, 5, {}};
  stats::ScaleDefinition animacy{"animacy", 5, 5, {}};
  stats::ScaleDefinition intelligence{"intelligence", 5, 5, {}};

  const stats::ScaleDefinition* scale(std::string_view name) const {
    if (name == "nars") return &nars;
    if (name == "ptt") return &ptt;
    if (name == "animacy") return &animacy;
    if (name == "intelligence") return &intelligence;
    return nullptr;
  }

  bool operator==(const Protocol& o) const {
    auto same = [](const stats::ScaleDefinition& a, const stats::ScaleDefinition& b) {
      return a.name == b.name && a.item_count == b.item_count && a.likert_max == b.likert_max &&
             a.reverse_items == b.reverse_items;
    };
    return task_rooms == o.task_rooms && same(nars, o.nars) && same(ptt, o.ptt) && same(animacy, o.animacy) &&
           same(intelligence, o.intelligence);
  }
};

inline json scale_to_json(const stats::ScaleDefinition& s) {
  json j;
  j["items"] = s.item_count;
  j["likert_max"] = s.likert_max;
  j["reverse"] = json::array();
  for (int i : s.reverse_items) j["reverse"].push_back(i);
  return j;
}

inline json protocol_to_json(const Protocol& p) {
  json j;
  j["task_rooms"] = p.task_rooms;
  j["scales"]["nars"] = scale_to_json(p.nars);
  j["scales"]["ptt"] = scale_to_json(p.ptt);
  j["scales"]["animacy"] = scale_to_json(p.animacy);
  j["scales"]["intelligence"] = scale_to_json(p.intelligence);
  return j;
}

// Missing fields keep their defaults, so a protocol file may override only what differs.
inline Protocol protocol_from_json(const json& j) {
  Protocol p;
  try {
    if (j.contains("task_rooms")) p.task_rooms = j.at("task_rooms").get<std::vector<int>>();
    if (j.contains("scales")) {
      for (auto* s : {&p.nars, &p.ptt, &p.animacy, &p.intelligence}) {
        if (!j["scales"].contains(s->name)) continue;
        const json& d = j["scales"][s->name];
        if (d.contains("items")) s->item_count = d.at("items").get<int>();
        if (d.contains("likert_max")) s->likert_max = d.at("likert_max").get<int>();
        if (d.contains("reverse")) {
          s->reverse_items.clear();
          for (int i : d.at("reverse").get<std::vector<int>>()) s->reverse_items.insert(i);
        }
      }
    }
  } catch (const json::exception& e) {
    throw SessionError(SessionError::Kind::invalid_record, std::string("protocol: ") + e.what());
  }
  if (p.task_rooms.empty()) throw SessionError(SessionError::Kind::invalid_record, "protocol: no task rooms");
  for (auto* s : {&p.nars, &p.ptt, &p.animacy, &p.intelligence}) {
    try {
      stats::check_scale(*s);
    } catch (const stats::StatsError& e) {
      throw SessionError(SessionError::Kind::invalid_record, std::string("protocol: ") + e.what());
    }
  }
  return p;
}

struct TaskOutcome {
  int room = 0;
  bool success = false;
  bool operator==(const TaskOutcome&) const = default;
};

struct ConditionRecord {
  Style style = Style::landmark;
  std::vector<int> animacy;
  std::vector<int> intelligence;
  std::vector<TaskOutcome> tasks;
  bool operator==(const ConditionRecord&) const = default;
};

struct SessionRecord {
  std::string participant_id;
  std::uint64_t order_seed = 0;
  std::array<Style, 2> condition_order{Style::landmark, Style::skeletal};
  Protocol protocol;
  std::vector<int> nars;
  std::vector<int> ptt;
  std::vector<ConditionRecord> conditions;  // in the order run
  int clarifications = 0;
  bool complete = false;
  std::optional<std::string> abort_reason;
  std::int64_t started_ms = 0;
  std::optional<std::int64_t> ended_ms;
  std::vector<json> events;

  const ConditionRecord* condition(Style s) const {
    for (const auto& c : conditions) {
      if (c.style == s) return &c;
    }
    return nullptr;
  }

  int successes(Style s) const {
    const ConditionRecord* c = condition(s);
    if (c == nullptr) return 0;
    int n = 0;
    for (const auto& t : c->tasks) n += t.success ? 1 : 0;
    return n;
  }
};

inline bool valid_participant_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

// Condition order from the first SplitMix64 draw: even puts landmark first.
inline std::array<Style, 2> condition_order_for(std::uint64_t order_seed) {
  SplitMix64 rng(order_seed);
  return (rng.next() & 1u) == 0 ? std::array<Style, 2>{Style::landmark, Style::skeletal}
                                 : std::array<Style, 2>{Style::skeletal, Style::landmark};
}

// ---------------------------------------------------------------------------
// Builder: every record is the fold of its event list.

class SessionBuilder {
 public:
  // Applies one event. A rejected event leaves the builder unchanged.
  void apply(const json& event) {
    std::vector<json> events = std::move(record_.events);
    record_.events.clear();
    SessionBuilder next = *this;
    try {
      try {
        next.apply_checked(event);
      } catch (const json::exception& e) {
        next.fail(std::string("malformed event: ") + e.what());
      } catch (const stats::StatsError& e) {
        next.fail(e.what());
      }
    } catch (...) {
      record_.events = std::move(events);
      throw;
    }
    *this = std::move(next);
    ++count_;
    record_.events = std::move(events);
    record_.events.push_back(event);
  }

  bool started() const { return started_; }
  bool finished() const { return record_.complete || record_.abort_reason.has_value(); }
  const SessionRecord& record() const { return record_; }

  // Whether every questionnaire and task of the protocol has been recorded.
  bool data_complete() const {
    const Protocol& p = record_.protocol;
    if (static_cast<int>(record_.nars.size()) != p.nars.item_count) return false;
    if (static_cast<int>(record_.ptt.size()) != p.ptt.item_count) return false;
    if (record_.conditions.size() != 2) return false;
    for (const auto& c : record_.conditions) {
      if (!condition_done(c)) return false;
    }
    return true;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw SessionError(SessionError::Kind::invalid_event,
                       "event " + std::to_string(count_ + 1) + ": " + message);
  }

  bool condition_done(const ConditionRecord& c) const {
    const Protocol& p = record_.protocol;
    return c.tasks.size() == p.task_rooms.size() && !open_task_ &&
           static_cast<int>(c.animacy.size()) == p.animacy.item_count &&
           static_cast<int>(c.intelligence.size()) == p.intelligence.item_count;
  }

  ConditionRecord& current(const json& event) {
    if (record_.conditions.empty()) fail("no condition has started");
    ConditionRecord& c = record_.conditions.back();
    if (event.contains("condition") && parse_style(event.at("condition").get<std::string>()) != c.style) {
      fail("event names condition " + event.at("condition").get<std::string>() + " but " +
           std::string(to_string(c.style)) + " is running");
    }
    return c;
  }

  void apply_checked(const json& event) {
    if (!event.is_object()) fail("not an object");
    const std::string type = event.at("type").get<std::string>();
    const auto t = event.at("t").get<std::int64_t>();
    if (finished()) fail("session already ended");
    if (!started_ && type != "session_start") fail("first event must be session_start");
    if (started_ && t < last_t_) fail("timestamp goes backwards");
    last_t_ = t;

    if (type == "session_start") {
      if (started_) fail("duplicate session_start");
      started_ = true;
      record_.participant_id = event.at("participant_id").get<std::string>();
      if (!valid_participant_id(record_.participant_id)) fail("invalid participant_id");
      record_.order_seed = event.at("order_seed").get<std::uint64_t>();
      const auto order = event.at("condition_order").get<std::vector<std::string>>();
      if (order.size() != 2) fail("condition_order must name two styles");
      for (std::size_t i = 0; i < 2; ++i) {
        auto s = parse_style(order[i]);
        if (!s) fail("unknown style " + order[i]);
        record_.condition_order[i] = *s;
      }
      if (record_.condition_order[0] == record_.condition_order[1]) fail("condition_order repeats a style");
      if (record_.condition_order != condition_order_for(record_.order_seed)) {
        fail("condition_order does not match order_seed");
      }
      record_.protocol = protocol_from_json(event.at("protocol"));
      record_.started_ms = t;
    } else if (type == "questionnaire") {
      const std::string scale = event.at("scale").get<std::string>();
      const stats::ScaleDefinition* def = record_.protocol.scale(scale);
      if (def == nullptr) fail("unknown scale " + scale);
      auto responses = event.at("responses").get<std::vector<int>>();
      stats::check_responses(responses, *def);
      std::vector<int>* slot = nullptr;
      if (scale == "nars") slot = &record_.nars;
      else if (scale == "ptt") slot = &record_.ptt;
      else {
        ConditionRecord& c = current(event);
        if (open_task_ || c.tasks.size() != record_.protocol.task_rooms.size()) {
          fail(scale + " asked before the condition's tasks finished");
        }
        slot = scale == "animacy" ? &c.animacy : &c.intelligence;
      }
      if (!slot->empty()) fail(scale + " answered twice");
      *slot = std::move(responses);
    } else if (type == "condition_start") {
      auto s = parse_style(event.at("style").get<std::string>());
      if (!s) fail("unknown style");
      const std::size_t k = record_.conditions.size();
      if (k >= 2) fail("both conditions already ran");
      if (*s != record_.condition_order[k]) fail("condition out of order");
      if (k == 1 && !condition_done(record_.conditions[0])) fail("previous condition unfinished");
      record_.conditions.push_back(ConditionRecord{*s, {}, {}, {}});
    } else if (type == "task_start") {
      ConditionRecord& c = current(event);
      if (open_task_) fail("previous task has no result");
      const int room = event.at("room").get<int>();
      if (c.tasks.size() >= record_.protocol.task_rooms.size()) fail("all tasks of the condition already ran");
      if (room != record_.protocol.task_rooms[c.tasks.size()]) fail("task room out of order");
      open_task_ = room;
    } else if (type == "task_result") {
      ConditionRecord& c = current(event);
      const int room = event.at("room").get<int>();
      if (!open_task_ || *open_task_ != room) fail("task_result without a matching task_start");
      c.tasks.push_back(TaskOutcome{room, event.at("success").get<bool>()});
      open_task_.reset();
    } else if (type == "clarification") {
      ++record_.clarifications;
    } else if (type == "utterance" || type == "directions" || type == "reply") {
      // transcript only
    } else if (type == "session_end") {
      if (!data_complete()) fail("session_end before all questionnaires and tasks were recorded");
      record_.complete = true;
      record_.ended_ms = t;
    } else if (type == "abort") {
      record_.abort_reason = event.at("reason").get<std::string>();
      record_.ended_ms = t;
    } else {
      fail("unknown event type " + type);
    }
  }

  SessionRecord record_;
  bool started_ = false;
  std::int64_t last_t_ = 0;
  std::optional<int> open_task_;
  std::size_t count_ = 0;
};

inline SessionRecord replay(const std::vector<json>& events) {
  SessionBuilder b;
  for (const auto& e : events) b.apply(e);
  if (!b.started()) throw SessionError(SessionError::Kind::invalid_record, "no events");
  return b.record();
}

// ---------------------------------------------------------------------------
// Record JSON

inline json to_json(const SessionRecord& r) {
  json j;
  j["schema"] = kRecordSchema;
  j["participant_id"] = r.participant_id;
  j["complete"] = r.complete;
  if (r.abort_reason) j["abort_reason"] = *r.abort_reason;
  j["order_seed"] = r.order_seed;
  j["condition_order"] = {to_string(r.condition_order[0]), to_string(r.condition_order[1])};
  j["protocol"] = protocol_to_json(r.protocol);
  j["nars"] = r.nars;
  j["ptt"] = r.ptt;
  j["conditions"] = json::array();
  for (const auto& c : r.conditions) {
    json cj;
    cj["style"] = to_string(c.style);
    cj["animacy"] = c.animacy;
    cj["intelligence"] = c.intelligence;
    cj["tasks"] = json::array();
    for (const auto& t : c.tasks) cj["tasks"].push_back({{"room", t.room}, {"success", t.success}});
    j["conditions"].push_back(std::move(cj));
  }
  j["clarifications"] = r.clarifications;
  j["started_ms"] = r.started_ms;
  j["ended_ms"] = r.ended_ms ? json(*r.ended_ms) : json(nullptr);
  j["events"] = r.events;
  return j;
}

inline std::string serialize_record(const SessionRecord& r) { return to_json(r).dump(2) + "\n"; }

// Rebuilds the record from its own event list and checks that the stored summary
// fields agree with it.
inline SessionRecord record_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kRecordSchema) {
      throw SessionError(SessionError::Kind::invalid_record, "unsupported schema");
    }
    SessionRecord r = replay(j.at("events").get<std::vector<json>>());
    json canonical = to_json(r);
    for (const auto& [key, value] : j.items()) {
      if (!canonical.contains(key) || canonical[key] != value) {
        throw SessionError(SessionError::Kind::invalid_record,
                           "field '" + key + "' disagrees with the event log");
      }
    }
    if (canonical.size() != j.size()) {
      throw SessionError(SessionError::Kind::invalid_record, "record is missing summary fields");
    }
    return r;
  } catch (const json::exception& e) {
    throw SessionError(SessionError::Kind::invalid_record, std::string("malformed record: ") + e.what());
  }
}

inline SessionRecord parse_record(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SessionError(SessionError::Kind::invalid_record, std::string("not JSON: ") + e.what());
  }
  return record_from_json(j);
}

inline std::vector<json> parse_event_lines(std::istream& in) {
  std::vector<json> events;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw SessionError(SessionError::Kind::invalid_record, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return events;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SessionError(SessionError::Kind::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SessionRecord load_record(const std::filesystem::path& path) {
  try {
    return parse_record(read_text_file(path));
  } catch (const SessionError& e) {
    if (e.kind() == SessionError::Kind::io) throw;
    throw SessionError(e.kind(), path.filename().string() + ": " + e.what());
  }
}

inline SessionRecord replay_events_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SessionError(SessionError::Kind::io, "cannot read " + path.string());
  return replay(parse_event_lines(in));
}

// Writes via a temporary file and rename, so a reader never sees half a record.
inline void write_record(const std::filesystem::path& path, const SessionRecord& r) {
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SessionError(SessionError::Kind::io, "cannot write " + tmp.string());
    out << serialize_record(r);
    if (!out.flush()) throw SessionError(SessionError::Kind::io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path record_path(const std::filesystem::path& dir, std::string_view participant) {
  return dir / (std::string(participant) + ".json");
}

inline std::filesystem::path events_path(const std::filesystem::path& dir, std::string_view participant) {
  return dir / (std::string(participant) + ".events.jsonl");
}

// Append-only event log, flushed after every line.
class EventLog {
 public:
  explicit EventLog(const std::filesystem::path& path) : out_(path, std::ios::app | std::ios::binary) {
    if (!out_) throw SessionError(SessionError::Kind::io, "cannot open " + path.string());
  }
  void append(const json& event) {
    out_ << event.dump() << '\n';
    out_.flush();
    if (!out_) throw SessionError(SessionError::Kind::io, "event log write failed");
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Interactive session

using Clock = std::function<std::int64_t()>;

inline std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct SessionConfig {
  std::string participant_id;
  std::uint64_t order_seed = 0;
  Protocol protocol;
  std::filesystem::path out_dir;  // empty: keep everything in memory
  GenerateOptions generation;
};

inline constexpr std::string_view kHelpText =
    "Ask me the way to a room, for example \"where is room 5?\". "
    "Say \"repeat\" to hear the directions again, or \"quit\" to stop.";

namespace detail {

class Runner {
 public:
  Runner(const IndoorMap& map, const TemplateSet& templates, const SessionConfig& config, std::istream& in,
         std::ostream& out, Clock clock)
      : map_(map), templates_(templates), config_(config), in_(in), out_(out), clock_(std::move(clock)),
        seeds_(config.order_seed) {
    seeds_.next();  // the draw that fixed the condition order
    if (!config.out_dir.empty()) {
      std::filesystem::create_directories(config.out_dir);
      const auto log_path = events_path(config.out_dir, config.participant_id);
      if (std::filesystem::exists(log_path) || std::filesystem::exists(record_path(config.out_dir, config.participant_id))) {
        throw SessionError(SessionError::Kind::io, "a session for " + config.participant_id + " already exists in " +
                                                       config.out_dir.string());
      }
      log_.emplace(log_path);
    }
  }

  SessionRecord run() {
    const auto order = condition_order_for(config_.order_seed);
    emit({{"type", "session_start"},
          {"participant_id", config_.participant_id},
          {"order_seed", config_.order_seed},
          {"condition_order", {to_string(order[0]), to_string(order[1])}},
          {"protocol", protocol_to_json(config_.protocol)}});
    out_ << "Session " << config_.participant_id << ": " << to_string(order[0]) << " directions first, then "
         << to_string(order[1]) << ".\n"
         << "Lines starting with ':' are for the facilitator (:y reached, :n not reached, :quit).\n";
    if (run_protocol(order)) emit({{"type", "session_end"}});
    save();
    return builder_.record();
  }

 private:
  struct Abort {
    std::string reason;
  };

  bool run_protocol(const std::array<Style, 2>& order) {
    try {
      questionnaire(config_.protocol.nars, std::nullopt);
      questionnaire(config_.protocol.ptt, std::nullopt);
      for (Style style : order) {
        emit({{"type", "condition_start"}, {"style", to_string(style)}});
        out_ << "\n-- " << to_string(style) << " directions --\n";
        for (std::size_t i = 0; i < config_.protocol.task_rooms.size(); ++i) task(style, i);
        questionnaire(config_.protocol.animacy, style);
        questionnaire(config_.protocol.intelligence, style);
      }
    } catch (const Abort& a) {
      emit({{"type", "abort"}, {"reason", a.reason}});
      out_ << "Session stopped (" << a.reason << "). Partial record kept.\n";
      return false;
    }
    out_ << "\nThank you. Session complete.\n";
    return true;
  }

  void emit(json event) {
    json stamped;
    stamped["t"] = clock_();
    for (auto& [k, v] : event.items()) stamped[k] = v;
    builder_.apply(stamped);
    if (log_) log_->append(stamped);
  }

  void save() {
    if (config_.out_dir.empty()) return;
    write_record(record_path(config_.out_dir, config_.participant_id), builder_.record());
  }

  std::string read_line(std::string_view prompt) {
    out_ << prompt << std::flush;
    std::string line;
    if (!std::getline(in_, line)) throw Abort{"input ended"};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  static std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  }

  void questionnaire(const stats::ScaleDefinition& def, std::optional<Style> condition) {
    out_ << "\nQuestionnaire " << def.name << ": " << def.item_count << " items, answer 1-" << def.likert_max
         << " (several answers per line are fine).\n";
    std::vector<int> values;
    while (static_cast<int>(values.size()) < def.item_count) {
      const std::string line = trimmed(read_line(def.name + " item " + std::to_string(values.size() + 1) + "/" +
                                                 std::to_string(def.item_count) + ": "));
      if (line == ":quit") throw Abort{"facilitator quit"};
      std::istringstream tokens(line);
      std::vector<int> got;
      std::string tok;
      bool ok = true;
      while (tokens >> tok) {
        auto v = waydirector::detail::parse_positive(tok);
        if (!v || *v > def.likert_max) {
          ok = false;
          break;
        }
        got.push_back(*v);
      }
      if (!ok || got.empty() || static_cast<int>(values.size() + got.size()) > def.item_count) {
        out_ << "Please answer with whole numbers from 1 to " << def.likert_max << ".\n";
        continue;
      }
      values.insert(values.end(), got.begin(), got.end());
    }
    json event{{"type", "questionnaire"}, {"scale", def.name}};
    if (condition) event["condition"] = to_string(*condition);
    event["responses"] = values;
    emit(std::move(event));
  }

  void say(const std::string& text, std::string_view type) {
    out_ << "Robot: " << text << "\n";
    emit({{"type", type}, {"text", text}});
  }

  void task(Style style, std::size_t index) {
    const int room = config_.protocol.task_rooms[index];
    const std::string condition(to_string(style));
    emit({{"type", "task_start"}, {"condition", condition}, {"room", room}});
    out_ << "\nTask " << index + 1 << "/" << config_.protocol.task_rooms.size() << ": ask the robot the way to room "
         << room << ".\n";
    std::optional<InstructionScript> last;
    for (;;) {
      const std::string line = trimmed(read_line("> "));
      if (line.empty()) continue;
      if (line[0] == ':') {
        if (line == ":quit") throw Abort{"facilitator quit"};
        if (line == ":y" || line == ":n") {
          emit({{"type", "task_result"}, {"condition", condition}, {"room", room}, {"success", line == ":y"}});
          return;
        }
        out_ << "Facilitator commands: :y, :n, :quit\n";
        continue;
      }
      const Intent intent = recognize_intent(line, map_);
      json heard{{"type", "utterance"}, {"text", line}, {"intent", to_string(intent.kind)}};
      if (intent.destination) heard["destination"] = *intent.destination;
      if (intent.kind == IntentKind::navigate) heard["resolved"] = intent.resolved();
      emit(std::move(heard));

      switch (intent.kind) {
        case IntentKind::navigate:
          if (!intent.resolved()) {
            say("I don't know " + *intent.destination + ". Which room do you mean? For example, room " +
                    std::to_string(room) + ".",
                "clarification");
          } else {
            try {
              const std::uint64_t seed = seeds_.next();
              InstructionScript script =
                  give_directions(map_, *intent.node, style, templates_, seed, config_.generation);
              out_ << "Robot: " << script.text() << "\n";
              emit({{"type", "directions"},
                    {"condition", condition},
                    {"destination", *intent.destination},
                    {"node", *intent.node},
                    {"seed", seed},
                    {"sentences", script.sentences}});
              last = std::move(script);
            } catch (const std::exception&) {
              say("Sorry, I cannot give directions to " + *intent.destination + ".", "reply");
            }
          }
          break;
        case IntentKind::repeat:
          say(last ? last->text() : "I have not given any directions yet.", "reply");
          break;
        case IntentKind::switch_style:
          say("In this part of the session I use one way of giving directions.", "reply");
          break;
        case IntentKind::help:
          say(std::string(kHelpText), "reply");
          break;
        case IntentKind::quit:
          throw Abort{"participant quit"};
        case IntentKind::unknown:
          say("Sorry, I did not understand. You can ask, for example, where is room " + std::to_string(room) + "?",
              "clarification");
          break;
      }
    }
  }

  const IndoorMap& map_;
  const TemplateSet& templates_;
  const SessionConfig& config_;
  std::istream& in_;
  std::ostream& out_;
  Clock clock_;
  SplitMix64 seeds_;
  SessionBuilder builder_;
  std::optional<EventLog> log_;
};

}  // namespace detail

// Runs one participant through the protocol, reading participant and facilitator input
// from `in`. With an out_dir, every event is appended to <id>.events.jsonl as it happens
// and <id>.json is written when the session ends or is stopped.
inline SessionRecord run_session(const IndoorMap& map, const TemplateSet& templates, const SessionConfig& config,
                                 std::istream& in, std::ostream& out, Clock clock = system_clock_ms) {
  if (!valid_participant_id(config.participant_id)) {
    throw SessionError(SessionError::Kind::invalid_event, "participant id must be 1-64 letters, digits, '-' or '_'");
  }
  for (int room : config.protocol.task_rooms) {
    if (map.room_by_number(room) == nullptr) {
      throw SessionError(SessionError::Kind::invalid_event, "task room " + std::to_string(room) + " is not on the map");
    }
  }
  detail::Runner runner(map, templates, config, in, out, std::move(clock));
  return runner.run();
}

}  // namespace waydirector::session

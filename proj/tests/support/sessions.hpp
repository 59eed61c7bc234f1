#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "waydirector/session.hpp"

namespace waydirector::testkit {

struct ConditionAnswers {
  std::vector<int> animacy;
  std::vector<int> intelligence;
  std::vector<bool> success;  // one per task room
};

struct ScriptedParticipant {
  std::string id;
  std::uint64_t order_seed = 0;
  std::vector<int> nars;
  std::vector<int> ptt;
  ConditionAnswers landmark;
  ConditionAnswers skeletal;
};

inline std::string answers_line(const std::vector<int>& v) {
  std::string out;
  for (int x : v) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(x);
  }
  return out + "\n";
}

// Console input that takes the participant through the whole protocol: one question
// per task followed by the facilitator's outcome mark.
inline std::string session_script(const ScriptedParticipant& p, const session::Protocol& protocol) {
  std::string s = answers_line(p.nars) + answers_line(p.ptt);
  for (Style style : session::condition_order_for(p.order_seed)) {
    const ConditionAnswers& c = style == Style::landmark ? p.landmark : p.skeletal;
    for (std::size_t i = 0; i < protocol.task_rooms.size(); ++i) {
      s += "where is room " + std::to_string(protocol.task_rooms[i]) + "?\n";
      s += c.success[i] ? ":y\n" : ":n\n";
    }
    s += answers_line(c.animacy) + answers_line(c.intelligence);
  }
  return s;
}

// Deterministic clock: starts at a fixed epoch and advances one second per reading.
inline session::Clock step_clock(std::int64_t start = 1'700'000'000'000, std::int64_t step = 1000) {
  auto now = std::make_shared<std::int64_t>(start - step);
  return [now, step] { return *now += step; };
}

inline ScriptedParticipant uniform_participant(std::string id, std::uint64_t order_seed, int value,
                                               const session::Protocol& protocol = {}) {
  ScriptedParticipant p;
  p.id = std::move(id);
  p.order_seed = order_seed;
  p.nars.assign(static_cast<std::size_t>(protocol.nars.item_count), value);
  p.ptt.assign(static_cast<std::size_t>(protocol.ptt.item_count), value);
  for (ConditionAnswers* c : {&p.landmark, &p.skeletal}) {
    c->animacy.assign(static_cast<std::size_t>(protocol.animacy.item_count), value);
    c->intelligence.assign(static_cast<std::size_t>(protocol.intelligence.item_count), value);
    c->success.assign(protocol.task_rooms.size(), true);
  }
  return p;
}

inline session::SessionRecord run_scripted(const IndoorMap& map, const TemplateSet& templates,
                                           const ScriptedParticipant& p, const session::Protocol& protocol = {},
                                           const std::filesystem::path& out_dir = {}) {
  session::SessionConfig config;
  config.participant_id = p.id;
  config.order_seed = p.order_seed;
  config.protocol = protocol;
  config.out_dir = out_dir;
  std::istringstream in(session_script(p, protocol));
  std::ostringstream out;
  return session::run_session(map, templates, config, in, out, step_clock());
}

}  // namespace waydirector::testkit

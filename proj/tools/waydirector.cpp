#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "waydirector/api.hpp"
#include "waydirector/http_server.hpp"
#include "waydirector/map_dsl.hpp"
#include "waydirector/navsim.hpp"
#include "waydirector/report.hpp"
#include "waydirector/session.hpp"

using namespace waydirector;
using json = nlohmann::ordered_json;

namespace {

const std::string kDefaultMap = std::string(WAYDIRECTOR_DATA_DIR) + "/office.map";
const std::string kDefaultTemplates = std::string(WAYDIRECTOR_DATA_DIR) + "/default.tpl";

// Exit codes: 0 success, 1 a check failed, 2 bad input.
struct Failure {
  int code;
  std::string message;
};

IndoorMap load_valid_map(const std::string& path) {
  IndoorMap map = load_map_file(path);
  const ValidationReport report = validate_map(map);
  if (!report.ok()) {
    std::string why = path + " does not validate:";
    for (const auto& v : report.violations) why += "\n  " + std::string(to_string(v.code)) + " " + v.ref + ": " + v.message;
    throw Failure{2, why};
  }
  return map;
}

std::vector<Style> styles_for(const std::string& s) {
  if (s == "both") return {Style::landmark, Style::skeletal};
  auto style = parse_style(s);
  if (!style) throw Failure{2, "unknown style '" + s + "' (landmark, skeletal or both)"};
  return {*style};
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{2, "cannot write " + path};
  out << text;
}

std::function<void()> g_stop_server;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Route directions for indoor maps, a console study session, and session analysis"};
  app.require_subcommand(1);
  std::string map_path = kDefaultMap;
  std::string templates_path = kDefaultTemplates;

  // route
  auto* route_cmd = app.add_subcommand("route", "Print directions from the map's start to a room");
  std::string to;
  std::string style_name = "both";
  std::uint64_t seed = 0;
  bool as_json = false, arrival = false, no_arrival = false, depart = false;
  route_cmd->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);
  route_cmd->add_option("--templates", templates_path, "Template file")->check(CLI::ExistingFile);
  route_cmd->add_option("--to", to, "Destination, e.g. \"room 4\"")->required();
  route_cmd->add_option("--style", style_name, "landmark, skeletal or both (one line each)");
  route_cmd->add_option("--seed", seed, "Phrasing seed; 0 uses the first variant of every template");
  route_cmd->add_flag("--json", as_json, "Print the full route response as JSON");
  route_cmd->add_flag("--arrival", arrival, "End with an arrival sentence");
  route_cmd->add_flag("--no-arrival", no_arrival, "No arrival sentence (the default)");
  route_cmd->add_flag("--depart", depart, "Start with a departure sentence");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Generate, parse and simulate directions to every room");
  int seeds = 20;
  bool verify_all = true;
  verify_cmd->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);
  verify_cmd->add_option("--templates", templates_path, "Template file")->check(CLI::ExistingFile);
  verify_cmd->add_option("--seeds", seeds, "Seeds 0..N-1 per room and style")->check(CLI::PositiveNumber);
  verify_cmd->add_flag("--all", verify_all, "Include runs with the arrival sentence (default)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a map file");
  validate_cmd->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);

  // repl
  auto* repl_cmd = app.add_subcommand("repl", "Run one participant through the console study session");
  std::string participant;
  std::uint64_t order_seed = 0;
  std::string sessions_dir = "sessions";
  std::string protocol_path;
  repl_cmd->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);
  repl_cmd->add_option("--templates", templates_path, "Template file")->check(CLI::ExistingFile);
  repl_cmd->add_option("--participant", participant, "Participant id")->required();
  repl_cmd->add_option("--order-seed", order_seed, "Seed for the condition order and phrasing draws");
  repl_cmd->add_option("--sessions", sessions_dir, "Directory for session files");
  repl_cmd->add_option("--protocol", protocol_path, "Protocol JSON (task rooms, scale sizes)")->check(CLI::ExistingFile);
  repl_cmd->add_flag("--arrival", arrival, "End directions with an arrival sentence");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild a session record from its event log");
  std::string events_file;
  std::string out_path = "-";
  replay_cmd->add_option("--events", events_file, "<id>.events.jsonl")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", out_path, "Output file, - for stdout");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Descriptives, reliability and tests over session records");
  std::string report_out = "-";
  std::string markdown_out;
  double alpha_threshold = 0.7;
  std::string are_name = "normal_parent";
  analyze_cmd->add_option("--sessions", sessions_dir, "Directory of <id>.json records")->check(CLI::ExistingDirectory);
  analyze_cmd->add_option("--out", report_out, "Report JSON, - for stdout");
  analyze_cmd->add_option("--markdown", markdown_out, "Also write a markdown report");
  analyze_cmd->add_option("--alpha-threshold", alpha_threshold, "Minimum reliability for a scale to be compared");
  analyze_cmd->add_option("--are", are_name, "ARE for the sample-size section: normal_parent, min_are, laplace, paired_t");

  // power
  auto* power_cmd = app.add_subcommand("power", "A priori sample size for the signed-rank test");
  double dz = 0.42, power_alpha = 0.05, target = 0.80;
  int tails = 2;
  power_cmd->add_option("--dz", dz, "Effect size of the paired differences");
  power_cmd->add_option("--alpha", power_alpha, "Significance level");
  power_cmd->add_option("--power", target, "Target power");
  power_cmd->add_option("--tails", tails, "1 or 2");
  power_cmd->add_option("--are", are_name, "normal_parent, min_are, laplace or paired_t");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP JSON service for clients");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors = "*";
  std::string serve_sessions;
  serve_cmd->add_option("--map", map_path, "Map file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--templates", templates_path, "Template file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--sessions", serve_sessions, "Session directory for /api/session/events and /api/stats");
  serve_cmd->add_option("--cors", cors, "Access-Control-Allow-Origin value, empty to disable");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*route_cmd) {
      if (arrival && no_arrival) throw Failure{2, "--arrival and --no-arrival exclude each other"};
      const IndoorMap map = load_valid_map(map_path);
      const TemplateSet templates = load_templates_file(templates_path);
      RoundTripOptions opt;
      opt.generation.include_arrival = arrival;
      opt.segments.announce_departure = depart;
      json all = json::array();
      bool ok = true;
      for (Style style : styles_for(style_name)) {
        resolve_room(map, to);
        const RoundTrip rt = verify_roundtrip(map, to, style, seed, templates, opt);
        if (!rt.error.empty()) throw Failure{2, rt.error};
        if (!rt.ok) {
          ok = false;
          std::cerr << "warning: " << to_string(style) << " directions did not pass simulation ("
                    << to_string(rt.trace.outcome.kind) << " at " << rt.trace.outcome.node << ")\n";
        }
        if (as_json) all.push_back(api::route_response(rt, to));
        else std::cout << rt.script.text() << "\n";
      }
      if (as_json) std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
      return ok ? 0 : 1;
    }

    if (*verify_cmd) {
      const IndoorMap map = load_valid_map(map_path);
      const TemplateSet templates = load_templates_file(templates_path);
      int runs = 0, failures = 0;
      for (const auto& node : map.nodes()) {
        if (node.kind != NodeKind::room) continue;
        for (Style style : {Style::landmark, Style::skeletal}) {
          for (int s = 0; s < seeds; ++s) {
            for (bool with_arrival : {false, true}) {
              if (with_arrival && !verify_all) continue;
              RoundTripOptions opt;
              opt.generation.include_arrival = with_arrival;
              const RoundTrip rt = verify_roundtrip(map, node.id, style, static_cast<std::uint64_t>(s), templates, opt);
              ++runs;
              if (!rt.ok) {
                ++failures;
                std::cout << "FAIL " << node.id << " " << to_string(style) << " seed " << s
                          << (with_arrival ? " arrival" : "") << ": "
                          << (rt.error.empty() ? std::string(to_string(rt.trace.outcome.kind)) + " at " +
                                                     rt.trace.outcome.node + " " + rt.trace.outcome.detail
                                               : rt.error)
                          << "\n";
              }
            }
          }
        }
      }
      std::cout << runs << " runs, " << failures << " failed\n";
      return failures == 0 ? 0 : 1;
    }

    if (*validate_cmd) {
      const IndoorMap map = load_map_file(map_path);
      const ValidationReport report = validate_map(map);
      for (const auto& v : report.violations) {
        std::cout << to_string(v.code) << " " << v.ref << ": " << v.message << "\n";
      }
      std::cout << map.nodes().size() << " nodes, " << map.edges().size() << " edges; skeletal-safe "
                << (report.skeletal_safe ? "yes" : "no") << ", landmark-safe " << (report.landmark_safe ? "yes" : "no")
                << "\n";
      return report.ok() && report.skeletal_safe && report.landmark_safe ? 0 : 1;
    }

    if (*repl_cmd) {
      const IndoorMap map = load_valid_map(map_path);
      const TemplateSet templates = load_templates_file(templates_path);
      session::SessionConfig config;
      config.participant_id = participant;
      config.order_seed = order_seed;
      config.out_dir = sessions_dir;
      config.generation.include_arrival = arrival;
      if (!protocol_path.empty()) {
        try {
          config.protocol = session::protocol_from_json(json::parse(session::read_text_file(protocol_path)));
        } catch (const json::exception& e) {
          throw Failure{2, protocol_path + ": " + e.what()};
        }
      }
      const auto record = session::run_session(map, templates, config, std::cin, std::cout);
      std::cout << "Saved " << session::record_path(sessions_dir, participant).string() << "\n";
      return record.complete ? 0 : 1;
    }

    if (*replay_cmd) {
      write_text(out_path, session::serialize_record(session::replay_events_file(events_file)));
      return 0;
    }

    if (*analyze_cmd) {
      report::AnalysisOptions opt;
      opt.alpha_threshold = alpha_threshold;
      auto are = stats::parse_are_method(are_name);
      if (!are) throw Failure{2, "unknown ARE method '" + are_name + "'"};
      opt.power_are = *are;
      auto loaded = report::load_sessions(sessions_dir);
      const report::Report rep = report::analyze_sessions(loaded.records, opt, loaded.unreadable);
      write_text(report_out, report::to_json(rep).dump(2) + "\n");
      if (!markdown_out.empty()) write_text(markdown_out, report::render_markdown(rep));
      return 0;
    }

    if (*power_cmd) {
      auto are = stats::parse_are_method(are_name);
      if (!are) throw Failure{2, "unknown ARE method '" + are_name + "'"};
      const auto p = stats::power_analysis(dz, power_alpha, target, tails, *are);
      std::cout << "paired t: " << p.parametric_n << " pairs\n"
                << "signed-rank (ARE " << p.are << ", " << to_string(p.are_method) << "): " << p.required_n
                << " pairs, power " << p.actual_power << "\n";
      return 0;
    }

    if (*serve_cmd) {
      api::ServiceOptions opt;
      opt.session_dir = serve_sessions;
      api::Service service(load_valid_map(map_path), load_templates_file(templates_path), opt);
      api::HttpServer server(service, api::ServerConfig{host, port, cors});
      const int bound = server.bind();
      g_stop_server = [&server] { server.stop(); };
      std::signal(SIGINT, [](int) { g_stop_server(); });
      std::signal(SIGTERM, [](int) { g_stop_server(); });
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      server.run();
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "waydirector/session.hpp"
#include "waydirector/stats.hpp"

namespace waydirector::report {

using json = nlohmann::ordered_json;
using session::SessionRecord;

inline constexpr std::string_view kReportSchema = "waydirector.report/1";

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisOptions {
  double alpha_threshold = 0.7;  // scales with lower reliability are left out of comparisons
  double significance = 0.05;
  stats::WilcoxonOptions wilcoxon;
  double power_effect = 0.42;
  double power_alpha = 0.05;
  double power_target = 0.80;
  int power_tails = 2;
  stats::AreMethod power_are = stats::AreMethod::normal_parent;
};

struct ScoreRow {
  std::string key;
  std::string label;
  std::vector<double> values;  // one per included participant
  std::optional<stats::Descriptives> descriptives;
  std::optional<double> alpha;  // scales only
  std::string alpha_note;       // why alpha is missing
  bool is_scale = false;

  bool alpha_accepted(double threshold) const { return !is_scale || (alpha && *alpha >= threshold); }
};

enum class TestStatus { tested, excluded, degenerate };

inline std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::tested: return "tested";
    case TestStatus::excluded: return "excluded";
    case TestStatus::degenerate: return "degenerate";
  }
  return "?";
}

struct Comparison {
  std::string measure;  // animacy, intelligence, success
  double skeletal_mean = 0;
  double landmark_mean = 0;
  TestStatus status = TestStatus::tested;
  std::string note;
  std::optional<stats::WilcoxonResult> test;
  bool significant = false;
};

struct Correlation {
  std::string x;
  std::string y;
  TestStatus status = TestStatus::tested;
  std::string note;
  std::optional<stats::PearsonResult> result;
  bool alpha_accepted = false;
  bool significant = false;
};

struct Rejection {
  std::string id;  // participant id, or file name when the file could not be read
  std::string reason;
};

struct Report {
  AnalysisOptions options;
  std::vector<std::string> included;
  std::vector<Rejection> rejected;
  std::vector<ScoreRow> rows;
  std::vector<Comparison> comparisons;
  std::vector<Correlation> correlations;
  stats::PowerResult power;

  const ScoreRow& row(std::string_view key) const {
    for (const auto& r : rows) {
      if (r.key == key) return r;
    }
    throw ReportError("no row " + std::string(key));
  }
  const Comparison& comparison(std::string_view measure) const {
    for (const auto& c : comparisons) {
      if (c.measure == measure) return c;
    }
    throw ReportError("no comparison " + std::string(measure));
  }
};

// Pairs of score rows that are correlated.
inline const std::vector<std::pair<std::string, std::string>>& correlation_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs{
      {"nars", "ptt"},
      {"nars", "skeletal_intelligence"},
      {"ptt", "skeletal_intelligence"},
      {"nars", "landmark_intelligence"},
      {"ptt", "landmark_intelligence"},
  };
  return pairs;
}

namespace detail {

inline std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

inline ScoreRow scale_row(std::string key, std::string label, const std::vector<const SessionRecord*>& records,
                          const stats::ScaleDefinition& def,
                          const std::function<const std::vector<int>&(const SessionRecord&)>& items) {
  ScoreRow row{std::move(key), std::move(label), {}, std::nullopt, std::nullopt, "", true};
  std::vector<std::vector<double>> matrix;
  for (const SessionRecord* r : records) {
    row.values.push_back(stats::score_scale(items(*r), def));
    matrix.push_back(as_doubles(stats::coded_items(items(*r), def)));
  }
  row.descriptives = stats::descriptives(row.values);
  try {
    row.alpha = stats::cronbach_alpha(matrix);
  } catch (const stats::StatsError& e) {
    row.alpha_note = e.what();
  }
  return row;
}

inline const ScoreRow* find_row(const std::vector<ScoreRow>& rows, std::string_view key) {
  for (const auto& r : rows) {
    if (r.key == key) return &r;
  }
  return nullptr;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace detail

// Descriptives and reliability for every score, skeletal-vs-landmark signed-rank tests,
// the score correlations, and the a priori power analysis. Only complete records
// enter; incomplete ones are listed under `rejected`.
inline Report analyze_sessions(const std::vector<SessionRecord>& records, const AnalysisOptions& options = {},
                               std::vector<Rejection> rejected = {}) {
  Report rep;
  rep.options = options;
  rep.rejected = std::move(rejected);

  std::vector<const SessionRecord*> complete;
  for (const auto& r : records) {
    if (r.complete) {
      complete.push_back(&r);
    } else {
      rep.rejected.push_back({r.participant_id, "incomplete: " + r.abort_reason.value_or("session not finished")});
    }
  }
  std::sort(complete.begin(), complete.end(),
            [](const SessionRecord* a, const SessionRecord* b) { return a->participant_id < b->participant_id; });
  for (std::size_t i = 1; i < complete.size(); ++i) {
    if (complete[i]->participant_id == complete[i - 1]->participant_id) {
      throw ReportError("participant " + complete[i]->participant_id + " appears twice");
    }
  }
  if (complete.size() < 2) {
    throw ReportError("need at least two complete sessions, got " + std::to_string(complete.size()));
  }
  const session::Protocol& protocol = complete.front()->protocol;
  for (const SessionRecord* r : complete) {
    if (!(r->protocol == protocol)) {
      throw ReportError("session " + r->participant_id + " used a different protocol than " +
                        complete.front()->participant_id);
    }
    rep.included.push_back(r->participant_id);
  }

  using detail::scale_row;
  rep.rows.push_back(scale_row("nars", "NARS score", complete, protocol.nars,
                               [](const SessionRecord& r) -> const std::vector<int>& { return r.nars; }));
  rep.rows.push_back(scale_row("ptt", "PTT score", complete, protocol.ptt,
                               [](const SessionRecord& r) -> const std::vector<int>& { return r.ptt; }));
  for (Style style : {Style::skeletal, Style::landmark}) {
    const std::string s(to_string(style));
    const std::string title = style == Style::skeletal ? "Skeletal" : "Landmark";
    auto animacy = [style](const SessionRecord& r) -> const std::vector<int>& { return r.condition(style)->animacy; };
    auto intelligence = [style](const SessionRecord& r) -> const std::vector<int>& {
      return r.condition(style)->intelligence;
    };
    rep.rows.push_back(scale_row(s + "_animacy", title + " Godspeed animacy", complete, protocol.animacy, animacy));
    rep.rows.push_back(
        scale_row(s + "_intelligence", title + " Godspeed intelligence", complete, protocol.intelligence, intelligence));
  }
  for (Style style : {Style::skeletal, Style::landmark}) {
    ScoreRow row;
    row.key = std::string(to_string(style)) + "_success";
    row.label = std::string(style == Style::skeletal ? "Skeletal" : "Landmark") + " task success (of " +
                std::to_string(protocol.task_rooms.size()) + ")";
    for (const SessionRecord* r : complete) row.values.push_back(r->successes(style));
    row.descriptives = stats::descriptives(row.values);
    rep.rows.push_back(std::move(row));
  }

  for (const std::string measure : {"intelligence", "animacy", "success"}) {
    const ScoreRow& skl = *detail::find_row(rep.rows, "skeletal_" + measure);
    const ScoreRow& lnd = *detail::find_row(rep.rows, "landmark_" + measure);
    Comparison c;
    c.measure = measure;
    c.skeletal_mean = skl.descriptives->mean;
    c.landmark_mean = lnd.descriptives->mean;
    std::vector<std::string> unreliable;
    for (const ScoreRow* row : {&skl, &lnd}) {
      if (!row->alpha_accepted(options.alpha_threshold)) {
        unreliable.push_back(row->key + (row->alpha ? " alpha " + detail::fixed(*row->alpha, 2) : " alpha undefined"));
      }
    }
    if (!unreliable.empty()) {
      c.status = TestStatus::excluded;
      c.note = "reliability below " + detail::fixed(options.alpha_threshold, 2) + ":";
      for (const auto& u : unreliable) c.note += " " + u;
    } else {
      try {
        c.test = stats::wilcoxon_signed_rank(skl.values, lnd.values, options.wilcoxon);
        c.significant = c.test->p < options.significance;
      } catch (const stats::StatsError& e) {
        c.status = TestStatus::degenerate;
        c.note = e.what();
      }
    }
    rep.comparisons.push_back(std::move(c));
  }

  for (const auto& [xk, yk] : correlation_pairs()) {
    const ScoreRow& x = *detail::find_row(rep.rows, xk);
    const ScoreRow& y = *detail::find_row(rep.rows, yk);
    Correlation c;
    c.x = xk;
    c.y = yk;
    c.alpha_accepted = x.alpha_accepted(options.alpha_threshold) && y.alpha_accepted(options.alpha_threshold);
    try {
      c.result = stats::pearson_r(x.values, y.values);
      c.significant = c.result->p_two_tailed < options.significance;
    } catch (const stats::StatsError& e) {
      c.status = e.kind() == stats::StatsError::Kind::degenerate ? TestStatus::degenerate : TestStatus::excluded;
      c.note = e.what();
    }
    rep.correlations.push_back(std::move(c));
  }

  rep.power = stats::power_analysis(options.power_effect, options.power_alpha, options.power_target,
                                    options.power_tails, options.power_are);
  return rep;
}

struct LoadedSessions {
  std::vector<SessionRecord> records;
  std::vector<Rejection> unreadable;
};

// Every <id>.json in `dir`; event logs and other files are ignored.
inline LoadedSessions load_sessions(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ReportError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  LoadedSessions out;
  for (const auto& f : files) {
    try {
      out.records.push_back(session::load_record(f));
    } catch (const session::SessionError& e) {
      out.unreadable.push_back({f.filename().string(), e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline json to_json(const stats::Descriptives& d) {
  return {{"n", d.n}, {"median", d.median}, {"mean", d.mean}, {"sd", d.sd}, {"min", d.min}, {"max", d.max}};
}

inline json to_json(const stats::WilcoxonResult& w) {
  return {{"n_total", w.n_total},
          {"n_effective", w.n_effective},
          {"w_plus", w.w_plus},
          {"w_minus", w.w_minus},
          {"z", w.z},
          {"continuity_correction", w.continuity_correction},
          {"p_exact", detail::number_or_null(w.p_exact)},
          {"p_approx", w.p_approx},
          {"method", to_string(w.method)},
          {"p", w.p}};
}

inline json to_json(const stats::PowerResult& p) {
  return {{"effect_size_dz", p.effect_size_dz}, {"alpha", p.alpha},
          {"target_power", p.target_power},     {"tails", p.tails},
          {"are_method", to_string(p.are_method)}, {"are", p.are},
          {"parametric_n", p.parametric_n},     {"required_n", p.required_n},
          {"actual_power", p.actual_power}};
}

inline json to_json(const Report& rep) {
  json j;
  j["schema"] = kReportSchema;
  j["options"] = {{"alpha_threshold", rep.options.alpha_threshold},
                  {"significance", rep.options.significance},
                  {"continuity_correction", rep.options.wilcoxon.continuity_correction},
                  {"exact_limit", rep.options.wilcoxon.exact_limit}};
  j["included"] = rep.included;
  j["rejected"] = json::array();
  for (const auto& r : rep.rejected) j["rejected"].push_back({{"id", r.id}, {"reason", r.reason}});
  j["scores"] = json::array();
  for (const auto& r : rep.rows) {
    json row{{"key", r.key}, {"label", r.label}, {"values", r.values}};
    row["descriptives"] = r.descriptives ? to_json(*r.descriptives) : json(nullptr);
    if (r.is_scale) {
      row["alpha"] = detail::number_or_null(r.alpha);
      row["alpha_accepted"] = r.alpha_accepted(rep.options.alpha_threshold);
      if (!r.alpha_note.empty()) row["alpha_note"] = r.alpha_note;
    }
    j["scores"].push_back(std::move(row));
  }
  j["comparisons"] = json::array();
  for (const auto& c : rep.comparisons) {
    json cj{{"measure", c.measure},
            {"skeletal_mean", c.skeletal_mean},
            {"landmark_mean", c.landmark_mean},
            {"status", to_string(c.status)}};
    if (!c.note.empty()) cj["note"] = c.note;
    cj["wilcoxon"] = c.test ? to_json(*c.test) : json(nullptr);
    cj["significant"] = c.significant;
    j["comparisons"].push_back(std::move(cj));
  }
  j["correlations"] = json::array();
  for (const auto& c : rep.correlations) {
    json cj{{"x", c.x}, {"y", c.y}, {"status", to_string(c.status)}};
    if (!c.note.empty()) cj["note"] = c.note;
    if (c.result) {
      cj["r"] = c.result->r;
      cj["df"] = c.result->df;
      cj["p"] = c.result->p_two_tailed;
    } else {
      cj["r"] = nullptr;
      cj["df"] = nullptr;
      cj["p"] = nullptr;
    }
    cj["alpha_accepted"] = c.alpha_accepted;
    cj["significant"] = c.significant;
    j["correlations"].push_back(std::move(cj));
  }
  j["power"] = to_json(rep.power);
  return j;
}

inline std::string render_markdown(const Report& rep) {
  using detail::fixed;
  std::string md = "# Session analysis\n\n";
  md += "Included: " + std::to_string(rep.included.size()) + " sessions";
  if (!rep.included.empty()) {
    md += " (";
    for (std::size_t i = 0; i < rep.included.size(); ++i) md += (i ? ", " : "") + rep.included[i];
    md += ")";
  }
  md += ".\n";
  if (!rep.rejected.empty()) {
    md += "\nRejected:\n\n";
    for (const auto& r : rep.rejected) md += "- " + r.id + ": " + r.reason + "\n";
  }

  md += "\n## Scores\n\n| Measure | Median | Mean | SD | Min | Max | Alpha |\n|---|---|---|---|---|---|---|\n";
  for (const auto& r : rep.rows) {
    const auto& d = *r.descriptives;
    std::string a = "";
    if (r.is_scale) a = r.alpha ? fixed(*r.alpha, 2) : "n/a";
    if (r.is_scale && !r.alpha_accepted(rep.options.alpha_threshold)) a += " (below " + fixed(rep.options.alpha_threshold, 2) + ")";
    md += "| " + r.label + " | " + fixed(d.median, 3) + " | " + fixed(d.mean, 3) + " | " + fixed(d.sd, 3) + " | " +
          fixed(d.min, 3) + " | " + fixed(d.max, 3) + " | " + a + " |\n";
  }

  md += "\n## Skeletal vs landmark (Wilcoxon signed-rank)\n\n";
  md += "| Measure | Skeletal mean | Landmark mean | n | W+ | W- | z | p | Method |\n|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : rep.comparisons) {
    md += "| " + c.measure + " | " + fixed(c.skeletal_mean, 3) + " | " + fixed(c.landmark_mean, 3) + " | ";
    if (c.test) {
      const auto& w = *c.test;
      md += std::to_string(w.n_effective) + " | " + fixed(w.w_plus, 1) + " | " + fixed(w.w_minus, 1) + " | " +
            fixed(w.z, 3) + " | " + fixed(w.p, 4) + (c.significant ? " *" : "") + " | " +
            std::string(to_string(w.method)) + " |\n";
    } else {
      md += std::string(to_string(c.status)) + " | | | | | " + c.note + " |\n";
    }
  }

  md += "\n## Correlations (Pearson)\n\n| Pair | r | df | p | Reliable scales |\n|---|---|---|---|---|\n";
  for (const auto& c : rep.correlations) {
    md += "| " + c.x + " / " + c.y + " | ";
    if (c.result) {
      md += fixed(c.result->r, 3) + " | " + std::to_string(c.result->df) + " | " + fixed(c.result->p_two_tailed, 4) +
            (c.significant ? " *" : "") + " | ";
    } else {
      md += std::string(to_string(c.status)) + " | | | ";
    }
    md += std::string(c.alpha_accepted ? "yes" : "no") + " |\n";
  }

  const auto& p = rep.power;
  md += "\n## Sample size\n\n";
  md += "Paired design, dz = " + fixed(p.effect_size_dz, 2) + ", alpha = " + fixed(p.alpha, 2) + ", " +
        std::to_string(p.tails) + "-tailed, target power " + fixed(p.target_power, 2) + ": the paired t test needs " +
        std::to_string(p.parametric_n) + " pairs; the signed-rank test (ARE " + fixed(p.are, 3) + ", " +
        std::string(to_string(p.are_method)) + ") needs " + std::to_string(p.required_n) + ", for power " +
        fixed(p.actual_power, 3) + ".\n";
  md += "\n`*` p < " + fixed(rep.options.significance, 2) + "\n";
  return md;
}

}  // namespace waydirector::report

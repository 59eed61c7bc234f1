#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support/oracles.hpp"
#include "support/sessions.hpp"
#include "waydirector/map_dsl.hpp"
#include "waydirector/report.hpp"

using namespace waydirector;
using namespace waydirector::report;
using session::SessionRecord;
namespace fs = std::filesystem;

namespace {

const std::string kData = WAYDIRECTOR_DATA_DIR;

const IndoorMap& office() {
  static const IndoorMap map = load_map_file(kData + "/office.map");
  return map;
}
const TemplateSet& bundled() {
  static const TemplateSet t = load_templates_file(kData + "/default.tpl");
  return t;
}

std::vector<int> random_items(std::mt19937_64& rng, int k) {
  std::vector<int> v(static_cast<std::size_t>(k));
  for (int& x : v) x = 1 + static_cast<int>(rng() % 5);
  return v;
}

// Items driven by one latent level per participant, so the scale is reliable.
std::vector<int> consistent_items(std::mt19937_64& rng, int level, int k) {
  std::vector<int> v(static_cast<std::size_t>(k));
  for (int& x : v) x = std::clamp(level + static_cast<int>(rng() % 3) - 1, 1, 5);
  return v;
}

// Seven participants; landmark animacy answers alternate so that its reliability is poor.
std::vector<testkit::ScriptedParticipant> seven_participants() {
  std::mt19937_64 rng(2024);
  std::vector<testkit::ScriptedParticipant> out;
  const int levels[] = {1, 2, 3, 4, 5, 2, 4};
  for (int i = 0; i < 7; ++i) {
    testkit::ScriptedParticipant p;
    p.id = "P0" + std::to_string(i + 1);
    p.order_seed = static_cast<std::uint64_t>(100 + i);
    p.nars = random_items(rng, 14);
    p.ptt = random_items(rng, 6);
    p.skeletal.animacy = consistent_items(rng, levels[i], 5);
    p.skeletal.intelligence = consistent_items(rng, levels[i], 5);
    p.landmark.animacy = i % 2 == 0 ? std::vector<int>{1, 5, 1, 5, 1} : std::vector<int>{5, 1, 5, 1, 5};
    p.landmark.intelligence = consistent_items(rng, std::min(5, levels[i] + 1), 5);
    p.skeletal.success = {i % 3 != 0, true, i % 2 == 0};
    p.landmark.success = {true, true, i != 4};
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SessionRecord> run_all(const std::vector<testkit::ScriptedParticipant>& ps) {
  std::vector<SessionRecord> out;
  for (const auto& p : ps) out.push_back(testkit::run_scripted(office(), bundled(), p));
  return out;
}

}  // namespace

TEST(Analyze, SevenParticipantFixture) {
  const auto ps = seven_participants();
  const auto records = run_all(ps);
  const Report rep = analyze_sessions(records);
  EXPECT_EQ(rep.included.size(), 7u);
  EXPECT_TRUE(rep.rejected.empty());
  ASSERT_EQ(rep.rows.size(), 8u);
  const std::vector<std::string> keys{"nars",          "ptt",           "skeletal_animacy", "skeletal_intelligence",
                                      "landmark_animacy", "landmark_intelligence", "skeletal_success", "landmark_success"};
  for (std::size_t i = 0; i < keys.size(); ++i) EXPECT_EQ(rep.rows[i].key, keys[i]);

  // Independent recomputation of the NARS row and the alpha values.
  std::vector<double> nars;
  std::vector<std::vector<double>> nars_items;
  for (const auto& p : ps) {
    double s = 0;
    for (int x : p.nars) s += x;
    nars.push_back(s / 14.0);
    nars_items.emplace_back(p.nars.begin(), p.nars.end());
  }
  const auto& row = rep.row("nars");
  EXPECT_EQ(row.values, nars);
  double m = 0;
  for (double x : nars) m += x;
  m /= 7;
  double ss = 0;
  for (double x : nars) ss += (x - m) * (x - m);
  EXPECT_NEAR(row.descriptives->mean, m, 1e-12);
  EXPECT_NEAR(row.descriptives->sd, std::sqrt(ss / 6), 1e-12);
  ASSERT_TRUE(row.alpha);
  EXPECT_NEAR(*row.alpha, waydirector::oracle::alpha_from_covariance(nars_items), 1e-12);

  for (Style s : {Style::skeletal, Style::landmark}) {
    std::vector<std::vector<double>> items;
    for (const auto& p : ps) {
      const auto& v = (s == Style::skeletal ? p.skeletal : p.landmark).intelligence;
      items.emplace_back(v.begin(), v.end());
    }
    const auto& r = rep.row(std::string(to_string(s)) + "_intelligence");
    ASSERT_TRUE(r.alpha);
    EXPECT_NEAR(*r.alpha, waydirector::oracle::alpha_from_covariance(items), 1e-12);
  }

  // Success counts.
  const auto& skl = rep.row("skeletal_success");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    int n = 0;
    for (bool b : ps[i].skeletal.success) n += b;
    EXPECT_EQ(skl.values[i], n);
  }
  EXPECT_FALSE(skl.is_scale);
}

TEST(Analyze, LowReliabilityExcludesComparison) {
  const Report rep = analyze_sessions(run_all(seven_participants()));
  const auto& la = rep.row("landmark_animacy");
  ASSERT_TRUE(la.alpha);
  EXPECT_LT(*la.alpha, 0.7);
  EXPECT_FALSE(la.alpha_accepted(0.7));
  const auto& animacy = rep.comparison("animacy");
  EXPECT_EQ(animacy.status, TestStatus::excluded);
  EXPECT_FALSE(animacy.test);
  EXPECT_NE(animacy.note.find("landmark_animacy"), std::string::npos);

  const auto& intel = rep.comparison("intelligence");
  EXPECT_EQ(intel.status, TestStatus::tested);
  ASSERT_TRUE(intel.test);
  const auto direct =
      stats::wilcoxon_signed_rank(rep.row("skeletal_intelligence").values, rep.row("landmark_intelligence").values);
  EXPECT_EQ(intel.test->w_plus, direct.w_plus);
  EXPECT_EQ(intel.test->p, direct.p);
  EXPECT_EQ(intel.test->method, stats::WilcoxonMethod::exact);
  EXPECT_TRUE(intel.test->p_exact);

  EXPECT_EQ(rep.comparison("success").status, TestStatus::tested);

  // With the threshold out of the way the comparison runs.
  AnalysisOptions loose;
  loose.alpha_threshold = -100;
  EXPECT_EQ(analyze_sessions(run_all(seven_participants()), loose).comparison("animacy").status, TestStatus::tested);
}

TEST(Analyze, CorrelationsMatchDirectComputation) {
  const Report rep = analyze_sessions(run_all(seven_participants()));
  ASSERT_EQ(rep.correlations.size(), 5u);
  for (std::size_t i = 0; i < rep.correlations.size(); ++i) {
    const auto& c = rep.correlations[i];
    EXPECT_EQ(std::make_pair(c.x, c.y), correlation_pairs()[i]);
    ASSERT_TRUE(c.result);
    const auto direct = stats::pearson_r(rep.row(c.x).values, rep.row(c.y).values);
    EXPECT_DOUBLE_EQ(c.result->r, direct.r);
    EXPECT_DOUBLE_EQ(c.result->p_two_tailed, direct.p_two_tailed);
    EXPECT_EQ(c.result->df, 5);
    EXPECT_EQ(c.significant, direct.p_two_tailed < 0.05);
    EXPECT_EQ(c.alpha_accepted, rep.row(c.x).alpha_accepted(0.7) && rep.row(c.y).alpha_accepted(0.7));
  }
}

TEST(Analyze, ScoreGranularity) {
  const Report rep = analyze_sessions(run_all(seven_participants()));
  const std::map<std::string, int> items{{"nars", 14}, {"ptt", 6}, {"skeletal_animacy", 5}, {"skeletal_intelligence", 5},
                                         {"landmark_animacy", 5}, {"landmark_intelligence", 5},
                                         {"skeletal_success", 1}, {"landmark_success", 1}};
  for (const auto& [key, k] : items) {
    const double scaled = rep.row(key).descriptives->mean * 7 * k;
    EXPECT_NEAR(scaled, std::round(scaled), 1e-9) << key;
    for (double v : rep.row(key).values) EXPECT_NEAR(v * k, std::round(v * k), 1e-12) << key;
  }
}

TEST(Analyze, IncompleteRecordsAreRejectedAndListed) {
  auto records = run_all(seven_participants());
  auto p = testkit::uniform_participant("P99", 1, 3);
  session::SessionConfig config;
  config.participant_id = "P99";
  config.order_seed = 1;
  std::istringstream in(testkit::session_script(p, {}).substr(0, 40));
  std::ostringstream out;
  records.push_back(session::run_session(office(), bundled(), config, in, out, testkit::step_clock()));
  const Report rep = analyze_sessions(records);
  EXPECT_EQ(rep.included.size(), 7u);
  ASSERT_EQ(rep.rejected.size(), 1u);
  EXPECT_EQ(rep.rejected[0].id, "P99");
  EXPECT_NE(rep.rejected[0].reason.find("input ended"), std::string::npos);
}

TEST(Analyze, IdenticalParticipantsAreDegenerateNotFatal) {
  std::vector<SessionRecord> records{testkit::run_scripted(office(), bundled(), testkit::uniform_participant("A", 1, 3)),
                                     testkit::run_scripted(office(), bundled(), testkit::uniform_participant("B", 1, 3))};
  Report rep;
  ASSERT_NO_THROW(rep = analyze_sessions(records));
  for (const auto& r : rep.rows) {
    if (r.is_scale) {
      EXPECT_FALSE(r.alpha) << r.key;
      EXPECT_FALSE(r.alpha_note.empty());
    }
    EXPECT_EQ(r.descriptives->sd, 0.0);
  }
  EXPECT_EQ(rep.comparison("success").status, TestStatus::degenerate);
  EXPECT_EQ(rep.comparison("intelligence").status, TestStatus::excluded);  // alpha undefined
  for (const auto& c : rep.correlations) EXPECT_NE(c.status, TestStatus::tested);
  const json j = to_json(rep);
  EXPECT_TRUE(j["scores"][0]["alpha"].is_null());
  EXPECT_FALSE(render_markdown(rep).empty());
}

TEST(Analyze, InputErrors) {
  auto one = std::vector<SessionRecord>{testkit::run_scripted(office(), bundled(), testkit::uniform_participant("A", 1, 3))};
  EXPECT_THROW(analyze_sessions(one), ReportError);
  EXPECT_THROW(analyze_sessions({}), ReportError);
  auto twice = one;
  twice.push_back(one[0]);
  EXPECT_THROW(analyze_sessions(twice), ReportError);

  session::Protocol six;
  six.animacy.item_count = 6;
  auto mixed = one;
  mixed.push_back(testkit::run_scripted(office(), bundled(), testkit::uniform_participant("B", 1, 3, six), six));
  EXPECT_THROW(analyze_sessions(mixed), ReportError);
}

TEST(Analyze, PowerSection) {
  const Report rep = analyze_sessions(run_all(seven_participants()));
  EXPECT_EQ(rep.power.required_n, 50);
  EXPECT_NEAR(rep.power.actual_power, 0.81, 0.005);
  AnalysisOptions o;
  o.power_are = stats::AreMethod::paired_t;
  EXPECT_EQ(analyze_sessions(run_all(seven_participants()), o).power.required_n,
            stats::power_analysis(0.42, 0.05, 0.8, 2, stats::AreMethod::paired_t).required_n);
}

TEST(Analyze, JsonAndMarkdownShape) {
  const Report rep = analyze_sessions(run_all(seven_participants()));
  const json j = to_json(rep);
  EXPECT_EQ(j["schema"], "waydirector.report/1");
  EXPECT_EQ(j["scores"].size(), 8u);
  EXPECT_EQ(j["comparisons"].size(), 3u);
  EXPECT_EQ(j["correlations"].size(), 5u);
  EXPECT_EQ(j["power"]["required_n"], 50);
  EXPECT_TRUE(j["comparisons"][1]["wilcoxon"].is_null());  // animacy excluded
  const std::string md = render_markdown(rep);
  for (const auto& r : rep.rows) EXPECT_NE(md.find(r.label), std::string::npos) << r.label;
  EXPECT_NE(md.find("| Measure | Median | Mean | SD | Min | Max | Alpha |"), std::string::npos);
  EXPECT_NE(md.find("excluded"), std::string::npos);
  EXPECT_NE(md.find("needs 50"), std::string::npos);
}

TEST(LoadSessions, ReadsRecordsAndReportsBadFiles) {
  const fs::path dir = fs::temp_directory_path() / ("waydirector_load_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  for (const auto& p : seven_participants()) testkit::run_scripted(office(), bundled(), p, {}, dir);
  std::ofstream(dir / "broken.json") << "{\"schema\": 3}";
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto loaded = load_sessions(dir);
  EXPECT_EQ(loaded.records.size(), 7u);
  ASSERT_EQ(loaded.unreadable.size(), 1u);
  EXPECT_EQ(loaded.unreadable[0].id, "broken.json");
  const Report rep = analyze_sessions(loaded.records, {}, loaded.unreadable);
  EXPECT_EQ(rep.included.size(), 7u);
  EXPECT_EQ(rep.rejected.size(), 1u);
  EXPECT_THROW(load_sessions(dir / "missing"), ReportError);
  fs::remove_all(dir);
}

#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "waydirector/map_dsl.hpp"
#include "waydirector/nlg.hpp"

using namespace waydirector;

namespace {

const std::string kData = WAYDIRECTOR_DATA_DIR;

IndoorMap office() { return load_map_file(kData + "/office.map"); }
TemplateSet bundled() { return load_templates_file(kData + "/default.tpl"); }

InstructionScript directions(const IndoorMap& map, const TemplateSet& t, const std::string& room, Style style,
                             std::uint64_t seed, GenerateOptions opt = {}) {
  auto route = shortest_path(map, room);
  return generate(plan_segments(map, route, style), style, t, seed, opt);
}

// A complete template document with the line for `replace_key` swapped out (or dropped).
std::string template_doc(const std::string& replace_key = "", const std::string& replacement = "") {
  const std::vector<std::pair<std::string, std::string>> lines{
      {"landmark depart", "Start here."},
      {"landmark decision", "Turn {dir} at the {landmark}."},
      {"landmark follow_decision", "Follow on and turn {dir} at the {landmark}."},
      {"landmark follow_decision#2", "Go {hops} section(s) and turn {dir} at the {landmark}."},
      {"landmark follow_arrive", "Go {hops} section(s) and enter."},
      {"landmark arrive", "Enter."},
      {"skeletal depart", "Start here."},
      {"skeletal decision", "Turn {dir}."},
      {"skeletal follow_decision", "Go {hops} section(s) and turn {dir}."},
      {"skeletal follow_arrive", "Go {hops} section(s) and enter."},
      {"skeletal arrive", "Enter."},
  };
  std::string out;
  for (const auto& [key, text] : lines) {
    std::string body = key == replace_key ? replacement : text;
    if (body.empty()) continue;
    std::string k = key.substr(0, key.find('#'));
    out += "style " + k.substr(0, k.find(' ')) + " segment=" + k.substr(k.find(' ') + 1) + " \"" + body + "\"\n";
  }
  return out;
}

TemplateError::Kind load_error(const std::string& doc, std::string* message = nullptr) {
  try {
    parse_templates(doc);
  } catch (const TemplateError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "expected a template error for:\n" << doc;
  return TemplateError::Kind::syntax;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::size_t count_word(const std::string& text, const std::string& word) {
  std::regex re("\\b" + word + "\\b", std::regex::icase);
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), {}));
}

}  // namespace

TEST(SplitMix64, ReferenceStream) {
  SplitMix64 g(1234567);
  for (std::uint64_t expected : {6457827717110365317ULL, 3203168211198807973ULL, 9817491932198370423ULL,
                                 4593380528125082431ULL, 16408922859458223821ULL}) {
    EXPECT_EQ(g.next(), expected);
  }
  EXPECT_EQ(SplitMix64(0).next(), 0xE220A8397B1DCDAFULL);
}

TEST(LoadTemplates, BundledSetIsCompleteAndInjective) {
  auto t = bundled();
  for (Style s : {Style::landmark, Style::skeletal}) {
    for (SegmentKind k : kAllSegmentKinds) EXPECT_EQ(t.variants(s, k).size(), 3u);
  }
  EXPECT_EQ(t.variants(Style::landmark, SegmentKind::decision).front().text,
            "Turn {dir} in the corridor at the {landmark}.");
  EXPECT_NO_THROW(check_injective(t, office().landmark_vocabulary(), 30));
}

TEST(LoadTemplates, MinimalDocumentLoads) { EXPECT_NO_THROW(parse_templates(template_doc())); }

TEST(LoadTemplates, MissingCoverageNamesTheKey) {
  std::string message;
  EXPECT_EQ(load_error(template_doc("skeletal arrive", ""), &message), TemplateError::Kind::missing_coverage);
  EXPECT_NE(message.find("skeletal/arrive"), std::string::npos) << message;
}

TEST(LoadTemplates, LandmarkSlotForbiddenInSkeletal) {
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir} at the {landmark}.")),
            TemplateError::Kind::forbidden_slot);
}

TEST(LoadTemplates, SlotRules) {
  using K = TemplateError::Kind;
  EXPECT_EQ(load_error(template_doc("landmark decision", "Turn {dir}.")), K::missing_slot);
  EXPECT_EQ(load_error(template_doc("landmark decision", "Turn {dir} at the {place}.")), K::unknown_slot);
  EXPECT_EQ(load_error(template_doc("skeletal arrive", "Enter the {dir} room.")), K::forbidden_slot);
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir} after {hops} sections.")), K::forbidden_slot);
  EXPECT_EQ(load_error(template_doc("skeletal follow_decision", "Follow and turn {dir}.")), K::missing_coverage);
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir}")), K::syntax);
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir}. Now.")), K::syntax);
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir} or {dir}.")), K::syntax);
  EXPECT_EQ(load_error(template_doc("landmark decision", "Turn {dir}{landmark}.")), K::syntax);
  EXPECT_EQ(load_error(template_doc("skeletal decision", "Turn {dir.")), K::syntax);
  EXPECT_EQ(load_error(template_doc() + "style fancy segment=arrive \"Enter.\"\n"), K::syntax);
  EXPECT_EQ(load_error(template_doc() + "style skeletal segment=leave \"Enter.\"\n"), K::syntax);
  EXPECT_EQ(load_error(template_doc() + "display tv \"Tele.vision\"\n"), K::syntax);
  EXPECT_EQ(load_error(template_doc() + "display tv \"screen\"\ndisplay pc \"Screen\"\n"), K::ambiguous);
}

TEST(LoadTemplates, ErrorsCarryLineNumbers) {
  try {
    parse_templates(template_doc("skeletal decision", "Turn {dir} at the {landmark}."));
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.line(), 8);
  }
}

TEST(CheckInjective, RejectsTemplatesThatRenderAlike) {
  auto doc = template_doc() + "style skeletal segment=arrive \"Turn left.\"\n";
  auto t = parse_templates(doc);
  EXPECT_THROW(check_injective(t, {"sofa"}, 3), TemplateError);
  // The same text twice under one key renders identical bindings, which is harmless.
  auto same = parse_templates(template_doc() + "style skeletal segment=follow_arrive \"Go {hops} section(s) and enter.\"\n");
  EXPECT_NO_THROW(check_injective(same, {"sofa"}, 3));
}

TEST(Display, SurfaceForms) {
  auto t = bundled();
  EXPECT_EQ(t.display("tv"), "TV");
  EXPECT_EQ(t.display("fire-extinguisher"), "fire extinguisher");
  EXPECT_EQ(t.display("sofa"), "sofa");
  EXPECT_EQ(t.token_for("Fire Extinguisher"), "fire-extinguisher");
  EXPECT_EQ(t.token_for("TV"), "tv");
}

TEST(Generate, RoomFourExamples) {
  auto map = office();
  auto t = bundled();
  EXPECT_EQ(directions(map, t, "room 4", Style::landmark, 0).text(),
            "Turn right in the corridor at the sofa. Follow the corridor and turn right at the TV.");
  EXPECT_EQ(directions(map, t, "room 4", Style::skeletal, 0).text(),
            "Go right in the corridor. Follow the hallway and turn right.");
}

TEST(Generate, EmptySegments) {
  auto script = generate({}, Style::landmark, bundled(), 5);
  EXPECT_TRUE(script.sentences.empty());
  EXPECT_EQ(script.text(), "");
}

TEST(Generate, ArrivalSentence) {
  auto map = office();
  auto t = bundled();
  auto with = directions(map, t, "room 4", Style::landmark, 0, {.include_arrival = true});
  ASSERT_EQ(with.sentences.size(), 3u);
  EXPECT_EQ(with.sentences.back(), "Your room is the door just ahead.");
  // A route that is only a doorway still says something.
  Route door{"a", "r", {{"a", "r", Action::enter, {}, {}}}};
  auto only = generate(segment_route(door), Style::skeletal, t, 0);
  EXPECT_EQ(only.text(), "Enter the room ahead.");
}

TEST(Generate, SeededDrawsSelectVariants) {
  auto map = office();
  auto t = bundled();
  auto segments = plan_segments(map, shortest_path(map, "room 4"), Style::landmark);
  for (std::uint64_t seed : {1ULL, 2ULL, 42ULL, 0xDEADBEEFULL}) {
    auto script = generate(segments, Style::landmark, t, seed);
    SplitMix64 g(seed);
    ASSERT_EQ(script.sentences.size(), 2u);
    for (std::size_t k = 0; k < script.sentences.size(); ++k) {
      const auto& seg = segments[script.sentence_segments[k]];
      const auto& pool = t.variants(Style::landmark, seg.kind);
      std::size_t idx = g.next() % pool.size();
      EXPECT_EQ(script.sentence_variants[k], idx);
      EXPECT_EQ(script.sentences[k], render(pool[idx], binding_of(seg, Style::landmark), t));
    }
    EXPECT_EQ(script.text(), generate(segments, Style::landmark, t, seed).text());
  }
  std::set<std::string> texts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) texts.insert(generate(segments, Style::landmark, t, seed).text());
  EXPECT_GT(texts.size(), 3u);
}

TEST(Generate, CountedPhrasingWhereRequired) {
  auto map = office();
  auto t = bundled();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto script = directions(map, t, "room 7", Style::skeletal, seed);
    ASSERT_EQ(script.sentences.size(), 3u);
    EXPECT_NE(script.sentences[1].find("2 hallway section(s)"), std::string::npos) << script.sentences[1];
  }
}

TEST(Generate, MissingLandmarkIsAnError) {
  std::vector<Segment> segs{{SegmentKind::decision, Action::left, std::nullopt, 0, false}};
  EXPECT_THROW(generate(segs, Style::landmark, bundled(), 0), GenerationError);
  EXPECT_NO_THROW(generate(segs, Style::skeletal, bundled(), 0));
}

TEST(Generate, StylePurityAndOrdering) {
  auto map = office();
  auto t = bundled();
  auto vocab = map.landmark_vocabulary();
  for (const auto& n : map.nodes()) {
    if (!n.room_number) continue;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (Style style : {Style::landmark, Style::skeletal}) {
        auto route = shortest_path(map, n.id);
        auto segs = plan_segments(map, route, style);
        auto script = generate(segs, style, t, seed, {.include_arrival = seed % 2 == 1});
        const std::string text = lower(script.text());
        std::vector<Action> said;
        std::regex dir_re("\\b(left|right)\\b");
        for (auto it = std::sregex_iterator(text.begin(), text.end(), dir_re); it != std::sregex_iterator(); ++it) {
          said.push_back((*it)[1] == "left" ? Action::left : Action::right);
        }
        std::vector<Action> expected;
        for (const auto& s : segs) {
          if (s.direction) expected.push_back(*s.direction);
        }
        EXPECT_EQ(said, expected) << text;
        if (style == Style::skeletal) {
          for (const auto& token : vocab) {
            EXPECT_EQ(count_word(text, lower(t.display(token))), 0u) << token << " in: " << text;
            EXPECT_EQ(count_word(text, token), 0u) << token << " in: " << text;
          }
        } else {
          std::map<std::string, std::size_t> wanted;
          for (const auto& s : segs) {
            if (has_turn(s.kind)) ++wanted[*s.landmark];
          }
          for (const auto& token : vocab) {
            EXPECT_EQ(count_word(text, lower(t.display(token))), wanted[token]) << token << " in: " << text;
          }
        }
      }
    }
  }
}

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "waydirector/random.hpp"
#include "waydirector/router.hpp"
#include "waydirector/style.hpp"
#include "waydirector/templates.hpp"

namespace waydirector {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateOptions {
  // Speak a bare final `arrive` segment. Off by default: the turn that reaches the
  // destination's door already ends the directions, and the navigator steps through
  // the only door there.
  bool include_arrival = false;
};

struct InstructionScript {
  Style style = Style::landmark;
  std::uint64_t seed = 0;
  std::vector<std::string> sentences;
  std::vector<Segment> source_segments;
  // Per sentence: index into source_segments, and which variant of its key was used.
  std::vector<std::size_t> sentence_segments;
  std::vector<std::size_t> sentence_variants;

  std::string text() const {
    std::string out;
    for (const auto& s : sentences) {
      if (!out.empty()) out.push_back(' ');
      out += s;
    }
    return out;
  }
};

// Whether generate() will speak `segments[i]`. A final bare arrival is dropped only
// when an earlier segment already moves the navigator.
inline bool is_spoken(const std::vector<Segment>& segments, std::size_t i, const GenerateOptions& options) {
  if (options.include_arrival || segments[i].kind != SegmentKind::arrive || i + 1 != segments.size()) return true;
  for (std::size_t j = 0; j < i; ++j) {
    if (segments[j].kind != SegmentKind::depart) return false;
  }
  return true;
}

inline Binding binding_of(const Segment& seg, Style style) {
  Binding b;
  if (has_turn(seg.kind)) b.dir = seg.direction;
  if (style == Style::landmark && has_turn(seg.kind)) b.landmark = seg.landmark;
  if (has_follow(seg.kind)) b.hops = seg.follow_hops;
  return b;
}

// Renders one sentence per spoken segment. Seed 0 picks the first-listed variant of
// every key; any other seed draws variant indices from SplitMix64(seed), one draw per
// spoken segment in route order, index = draw mod pool size. Segments flagged
// count_required draw only from variants that show {hops}.
inline InstructionScript generate(const std::vector<Segment>& segments, Style style, const TemplateSet& templates,
                                  std::uint64_t seed, GenerateOptions options = {}) {
  InstructionScript script;
  script.style = style;
  script.seed = seed;
  script.source_segments = segments;
  SplitMix64 rng(seed);

  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!is_spoken(segments, i, options)) continue;
    const Segment& seg = segments[i];
    const std::string key = std::string(to_string(style)) + "/" + std::string(to_string(seg.kind));
    if (has_turn(seg.kind) && !seg.direction) throw GenerationError("segment " + std::to_string(i) + " has no direction");
    if (style == Style::landmark && has_turn(seg.kind) && !seg.landmark) {
      throw GenerationError("segment " + std::to_string(i) + " (" + std::string(to_string(seg.kind)) +
                            ") has no landmark, but every " + key + " template names one");
    }
    const auto& variants = templates.variants(style, seg.kind);
    std::vector<const Template*> pool;
    for (const auto& t : variants) {
      if (!seg.count_required || t.uses(Slot::hops)) pool.push_back(&t);
    }
    if (pool.empty()) throw GenerationError("no usable template for " + key);
    const Template* chosen = seed == 0 ? pool.front() : pool[rng.below(pool.size())];
    script.sentences.push_back(render(*chosen, binding_of(seg, style), templates));
    script.sentence_segments.push_back(i);
    script.sentence_variants.push_back(static_cast<std::size_t>(chosen - variants.data()));
  }
  return script;
}

// Route from the map's start, segment, and render.
inline InstructionScript give_directions(const IndoorMap& map, std::string_view destination, Style style,
                                         const TemplateSet& templates, std::uint64_t seed,
                                         GenerateOptions options = {}, SegmentOptions segment_options = {}) {
  const Route route = shortest_path(map, destination);
  return generate(plan_segments(map, route, style, segment_options), style, templates, seed, options);
}

}  // namespace waydirector

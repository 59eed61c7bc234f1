#pragma once

#include <optional>
#include <string_view>

namespace waydirector {

// Landmark instructions name the object at each decision point; skeletal
// instructions keep only the actions.
enum class Style { landmark, skeletal };

inline std::string_view to_string(Style s) { return s == Style::landmark ? "landmark" : "skeletal"; }

inline std::optional<Style> parse_style(std::string_view s) {
  if (s == "landmark") return Style::landmark;
  if (s == "skeletal") return Style::skeletal;
  return std::nullopt;
}

inline Style other(Style s) { return s == Style::landmark ? Style::skeletal : Style::landmark; }

}  // namespace waydirector

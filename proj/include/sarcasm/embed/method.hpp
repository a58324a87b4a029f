#pragma once

#include <array>
#include <string>
#include <string_view>

#include "sarcasm/common/error.hpp"
#include "sarcasm/preprocess.hpp"

namespace sarcasm::embed {

enum class EmbeddingMethod { cascade, w_cascade, ed, summary };

inline constexpr std::array<EmbeddingMethod, 4> kAllMethods = {EmbeddingMethod::cascade, EmbeddingMethod::w_cascade,
                                                               EmbeddingMethod::ed, EmbeddingMethod::summary};

// Display name, as used in model names ("EX-W-CASCADE").
inline const char* display_name(EmbeddingMethod m) {
  switch (m) {
    case EmbeddingMethod::cascade: return "CASCADE";
    case EmbeddingMethod::w_cascade: return "W-CASCADE";
    case EmbeddingMethod::ed: return "ED";
    case EmbeddingMethod::summary: return "SUMMARY";
  }
  return "?";
}

// Command-line spelling.
inline const char* flag_name(EmbeddingMethod m) {
  switch (m) {
    case EmbeddingMethod::cascade: return "cascade";
    case EmbeddingMethod::w_cascade: return "wcascade";
    case EmbeddingMethod::ed: return "ed";
    case EmbeddingMethod::summary: return "summary";
  }
  return "?";
}

// Accepts the flag spelling, the display name and W_CASCADE, in any case.
inline EmbeddingMethod parse_method(std::string_view text) {
  std::string key = to_lower_ascii(text);
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  for (auto m : kAllMethods) {
    if (key == flag_name(m) || key == to_lower_ascii(display_name(m))) return m;
  }
  throw ConfigError("unknown embedding method '" + std::string(text) + "' (expected cascade, wcascade, ed or summary)");
}

}  // namespace sarcasm::embed

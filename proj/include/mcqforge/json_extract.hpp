#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mcqforge/error.hpp"
#include "mcqforge/jsonl.hpp"

namespace mcqforge {

namespace detail {

inline std::optional<Json> parse_object(std::string_view s) {
  Json value = Json::parse(s, nullptr, false);
  if (value.is_discarded() || !value.is_object()) return std::nullopt;
  return value;
}

// Contents of each ``` fenced block; the info string after the opening fence
// ("json", "JSON", ...) is skipped.
inline std::optional<Json> parse_fenced(std::string_view s) {
  std::size_t pos = 0;
  while (true) {
    const auto open = s.find("```", pos);
    if (open == std::string_view::npos) return std::nullopt;
    auto body = s.find('\n', open + 3);
    if (body == std::string_view::npos) return std::nullopt;
    ++body;
    const auto close = s.find("```", body);
    if (close == std::string_view::npos) return parse_object(s.substr(body));
    if (auto value = parse_object(s.substr(body, close - body))) return value;
    pos = close + 3;
  }
}

inline std::optional<Json> parse_outer_braces(std::string_view s) {
  const auto first = s.find('{');
  const auto last = s.rfind('}');
  if (first == std::string_view::npos || last == std::string_view::npos || last < first) return std::nullopt;
  return parse_object(s.substr(first, last - first + 1));
}

// Tries every '{' as the start of a brace-balanced span (string literals
// respected). Recovers an object surrounded by prose that itself contains
// stray braces.
inline std::optional<Json> parse_balanced(std::string_view s) {
  for (auto start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        if (auto value = parse_object(s.substr(start, i - start + 1))) return value;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Pulls a JSON object out of a model reply. Strategies, first success wins:
/// the whole reply; the inside of a ``` fence; the span from the first '{'
/// to the last '}'; any brace-balanced span.
inline Json extract_json(std::string_view content) {
  if (auto v = detail::parse_object(content)) return *v;
  if (auto v = detail::parse_fenced(content)) return *v;
  if (auto v = detail::parse_outer_braces(content)) return *v;
  if (auto v = detail::parse_balanced(content)) return *v;
  std::string preview(content.substr(0, 120));
  throw Error(ErrorKind::JsonExtractError, "no JSON object in reply: \"" + preview + "\"");
}

}  // namespace mcqforge

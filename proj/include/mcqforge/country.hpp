#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "mcqforge/error.hpp"
#include "mcqforge/text.hpp"

namespace mcqforge {

struct CountryTag {
  std::string name;  // canonical English name
  std::string code;  // ISO 3166-1 alpha-2

  bool operator==(const CountryTag&) const = default;
};

struct CountryEntry {
  std::string_view name;
  std::string_view code;
  std::array<std::string_view, 3> aliases;
};

// The 22 member states of the Arab League.
inline constexpr std::array<CountryEntry, 22> kArabCountries{{
    {"Algeria", "DZ", {}},
    {"Bahrain", "BH", {}},
    {"Comoros", "KM", {"Union of the Comoros"}},
    {"Djibouti", "DJ", {}},
    {"Egypt", "EG", {}},
    {"Iraq", "IQ", {}},
    {"Jordan", "JO", {}},
    {"Kuwait", "KW", {}},
    {"Lebanon", "LB", {}},
    {"Libya", "LY", {}},
    {"Mauritania", "MR", {}},
    {"Morocco", "MA", {}},
    {"Oman", "OM", {}},
    {"Palestine", "PS", {"State of Palestine"}},
    {"Qatar", "QA", {}},
    {"Saudi Arabia", "SA", {"KSA", "Kingdom of Saudi Arabia"}},
    {"Somalia", "SO", {}},
    {"Sudan", "SD", {}},
    {"Syria", "SY", {"Syrian Arab Republic"}},
    {"Tunisia", "TN", {}},
    {"United Arab Emirates", "AE", {"UAE", "U.A.E.", "Emirates"}},
    {"Yemen", "YE", {}},
}};

namespace detail {

inline std::string country_key(std::string_view name) {
  std::string key = text::ascii_lower(text::normalize(name));
  if (key.starts_with("the ")) key.erase(0, 4);
  while (!key.empty() && key.back() == '.') key.pop_back();
  return key;
}

}  // namespace detail

/// Case- and whitespace-insensitive lookup of an English country name or
/// alias. Returns nullopt for anything outside the table.
inline std::optional<CountryTag> find_country(std::string_view name) {
  const std::string key = detail::country_key(name);
  if (key.empty()) return std::nullopt;
  for (const auto& entry : kArabCountries) {
    bool match = detail::country_key(entry.name) == key;
    for (const auto alias : entry.aliases) {
      if (!alias.empty() && detail::country_key(alias) == key) match = true;
    }
    if (match) return CountryTag{std::string(entry.name), std::string(entry.code)};
  }
  return std::nullopt;
}

inline CountryTag parse_country(std::string_view name) {
  if (auto tag = find_country(name)) return *tag;
  throw Error(ErrorKind::UnknownCountry, "not an Arab League state: \"" + std::string(name) + "\"");
}

inline std::optional<CountryTag> country_by_code(std::string_view code) {
  for (const auto& entry : kArabCountries) {
    if (entry.code == code) return CountryTag{std::string(entry.name), std::string(entry.code)};
  }
  return std::nullopt;
}

}  // namespace mcqforge

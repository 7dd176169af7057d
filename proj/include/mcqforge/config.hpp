#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "mcqforge/augmentor.hpp"
#include "mcqforge/error.hpp"
#include "mcqforge/gateway.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/text.hpp"

namespace mcqforge {

inline constexpr std::string_view kApiKeyEnv = "MCQFORGE_API_KEY";

/// Flat dotted-key settings, layered defaults < file < flags < environment.
/// Every key must be one of the known keys.
class Config {
 public:
  Config() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> kDefaults{
        {"llm.base_url", ""},
        {"llm.cache_dir", ".mcqforge-cache"},
        {"llm.model", "gpt-4.1"},
        {"llm.parallelism", "4"},
        {"llm.timeout_s", "120"},
        {"llm.max_retries", "4"},
        {"llm.backoff_base_ms", "1000"},
        {"llm.max_tokens", "1024"},
        {"pipeline.max_prompt_tokens", "512"},
        {"pipeline.unsure_policy", "keep_flagged"},
        {"pipeline.distractor_retries", "2"},
        {"pipeline.shuffle_seed", "0"},
        {"pipeline.domain_allowlist", ""},
    };
    return kDefaults;
  }

  void set(const std::string& key, std::string value) {
    if (!defaults().contains(key)) throw Error(ErrorKind::ConfigError, "unknown config key \"" + key + "\"");
    values_[key] = std::move(value);
  }

  /// key = value lines; '#' starts a comment line; blank lines ignored.
  void load_text(std::string_view contents, std::string_view origin) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
      auto end = contents.find('\n', pos);
      if (end == std::string_view::npos) end = contents.size();
      const std::string line = text::trim(contents.substr(pos, end - pos));
      pos = end + 1;
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::ConfigError, std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = text::trim(std::string_view(line).substr(0, eq));
      try {
        set(key, text::trim(std::string_view(line).substr(eq + 1)));
      } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  void load_file(const std::filesystem::path& path) {
    std::string contents;
    try {
      contents = read_text_file(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    load_text(contents, path.string());
  }

  /// MCQFORGE_<KEY> with dots turned into underscores, e.g.
  /// MCQFORGE_LLM_BASE_URL overrides llm.base_url.
  void apply_env(const std::function<std::optional<std::string>(const std::string&)>& getenv) {
    for (const auto& [key, _] : defaults()) {
      std::string name = "MCQFORGE_";
      for (const char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (auto value = getenv(name)) values_[key] = *value;
    }
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::ConfigError, "unknown config key \"" + key + "\"");
    return it->second;
  }

  std::int64_t integer(const std::string& key) const {
    const auto& s = str(key);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::ConfigError, key + " must be an integer, got \"" + s + "\"");
    }
    return value;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

inline PipelineConfig pipeline_config(const Config& c) {
  PipelineConfig p;
  p.max_prompt_tokens = static_cast<int>(c.integer("pipeline.max_prompt_tokens"));
  p.distractor_retries = static_cast<int>(c.integer("pipeline.distractor_retries"));
  p.shuffle_seed = c.integer("pipeline.shuffle_seed");
  const auto& policy = c.str("pipeline.unsure_policy");
  if (policy == "keep_flagged") {
    p.unsure_policy = UnsurePolicy::keep_flagged;
  } else if (policy == "drop") {
    p.unsure_policy = UnsurePolicy::drop;
  } else {
    throw Error(ErrorKind::ConfigError, "pipeline.unsure_policy must be keep_flagged or drop");
  }
  const auto& allow = c.str("pipeline.domain_allowlist");
  if (!text::is_blank(allow)) {
    std::set<std::string> hosts;
    std::size_t pos = 0;
    while (pos <= allow.size()) {
      auto end = allow.find(',', pos);
      if (end == std::string::npos) end = allow.size();
      auto host = text::ascii_lower(text::trim(std::string_view(allow).substr(pos, end - pos)));
      if (!host.empty()) hosts.insert(std::move(host));
      pos = end + 1;
    }
    p.domain_allowlist = std::move(hosts);
  }
  p.model = c.str("llm.model");
  p.max_tokens = static_cast<int>(c.integer("llm.max_tokens"));
  p.parallelism = static_cast<int>(c.integer("llm.parallelism"));
  p.validate();
  return p;
}

inline GatewayConfig gateway_config(const Config& c, std::string api_key) {
  GatewayConfig g;
  g.base_url = c.str("llm.base_url");
  if (g.base_url.empty()) throw Error(ErrorKind::ConfigError, "llm.base_url is not set");
  g.api_key = std::move(api_key);
  g.parallelism = static_cast<int>(c.integer("llm.parallelism"));
  g.timeout = std::chrono::seconds(c.integer("llm.timeout_s"));
  g.retry.max_retries = static_cast<int>(c.integer("llm.max_retries"));
  g.retry.base_delay = std::chrono::milliseconds(c.integer("llm.backoff_base_ms"));
  if (g.retry.max_retries < 0) throw Error(ErrorKind::ConfigError, "llm.max_retries must be >= 0");
  if (!c.str("llm.cache_dir").empty()) g.cache_dir = c.str("llm.cache_dir");
  return g;
}

}  // namespace mcqforge

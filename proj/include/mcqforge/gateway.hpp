#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <semaphore>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>

#include <httplib.h>

#include "mcqforge/digest.hpp"
#include "mcqforge/error.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/text.hpp"
#include "mcqforge/url.hpp"

namespace mcqforge {

enum class ResponseFormat { text, json_object };

constexpr std::string_view to_string(ResponseFormat f) {
  return f == ResponseFormat::json_object ? "json_object" : "text";
}

/// One zero-shot round trip: a single system message and a single user
/// message.
struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 512;
  ResponseFormat response_format = ResponseFormat::text;
  // Non-zero when the same prompt is deliberately re-sampled (e.g. a retry
  // after a rejected reply). Part of the cache key; never sent on the wire.
  int sample_index = 0;

  void validate() const {
    if (text::is_blank(system)) throw Error(ErrorKind::ConfigError, "chat request: empty system message");
    if (text::is_blank(user)) throw Error(ErrorKind::ConfigError, "chat request: empty user message");
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
      throw Error(ErrorKind::ConfigError, "chat request: temperature must be in [0, 2]");
    }
    if (max_tokens <= 0) throw Error(ErrorKind::ConfigError, "chat request: max_tokens must be positive");
  }
};

struct ChatResponse {
  std::string content;
  std::string model;
  int attempts = 1;
  bool from_cache = false;
  std::int64_t latency_ms = 0;
};

/// Anything that can answer a ChatRequest: the HTTP gateway, or a scripted
/// stand-in in tests.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  double jitter = 0.25;  // extra delay, as a fraction of the nominal delay

  /// Delay before retry number `retry` (1-based): base * factor^(retry-1),
  /// plus up to `jitter` of that. Never shorter than the nominal delay.
  std::chrono::milliseconds delay(int retry, double jitter_draw) const {
    const double nominal = static_cast<double>(base_delay.count()) * std::pow(factor, retry - 1);
    return std::chrono::milliseconds(static_cast<std::int64_t>(std::ceil(nominal * (1.0 + jitter * jitter_draw))));
  }
};

/// Content-addressed store of replies. One file per request digest; a file
/// that fails to parse or names a different key counts as a miss.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::CacheIoError, "cannot create cache dir " + dir_.string() + ": " + ec.message());
  }

  static std::string key(const ChatRequest& r) {
    Json fields = {{"model", r.model},
                   {"system", r.system},
                   {"user", r.user},
                   {"temperature", r.temperature},
                   {"max_tokens", r.max_tokens},
                   {"response_format", std::string(to_string(r.response_format))}};
    if (r.sample_index != 0) fields["sample_index"] = r.sample_index;
    return sha256_hex(canonical_line(fields));
  }

  std::filesystem::path path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
  }

  struct Entry {
    std::string content;
    std::string model;
  };

  std::optional<Entry> load(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    Json j = Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    const auto k = j.find("key");
    const auto c = j.find("content");
    const auto m = j.find("model");
    if (k == j.end() || !k->is_string() || *k != key) return std::nullopt;
    if (c == j.end() || !c->is_string() || m == j.end() || !m->is_string()) return std::nullopt;
    return Entry{c->get<std::string>(), m->get<std::string>()};
  }

  /// Atomic replace; concurrent writers of one key race benignly.
  void store(const std::string& key, const Entry& entry) const {
    const auto path = path_for(key);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::CacheIoError, "cannot create " + path.parent_path().string());
    std::ostringstream tag;
    tag << std::this_thread::get_id() << '.' << counter_.fetch_add(1);
    auto tmp = path;
    tmp += ".tmp." + tag.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      const std::string line = canonical_line({{"key", key}, {"content", entry.content}, {"model", entry.model}}) + "\n";
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
      if (!out) throw Error(ErrorKind::CacheIoError, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::CacheIoError, "cannot rename into " + path.string() + ": " + ec.message());
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::atomic<std::uint64_t> counter_{0};
};

struct GatewayConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string api_key;
  int parallelism = 4;   // max HTTP requests in flight
  std::chrono::milliseconds timeout{120000};
  RetryPolicy retry;
  std::optional<std::filesystem::path> cache_dir;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

/// Client for an OpenAI-compatible /chat/completions endpoint. Shareable
/// across threads; at most `parallelism` requests are on the wire at once.
class Gateway : public ChatBackend {
 public:
  explicit Gateway(GatewayConfig config) : config_(std::move(config)), slots_(std::max(1, config_.parallelism)) {
    auto url = parse_url(config_.base_url);
    if (!url || (url->scheme != "http" && url->scheme != "https")) {
      throw Error(ErrorKind::ConfigError, "llm.base_url is not an http(s) URL: \"" + config_.base_url + "\"");
    }
    if (config_.api_key.empty()) throw Error(ErrorKind::ConfigError, "MCQFORGE_API_KEY is not set");
    if (config_.parallelism < 1) throw Error(ErrorKind::ConfigError, "parallelism must be >= 1");
    origin_ = url->origin();
    std::string prefix = url->path;
    if (auto q = prefix.find_first_of("?#"); q != std::string::npos) prefix.resize(q);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
    if (config_.cache_dir) cache_.emplace(*config_.cache_dir);
  }

  /// Sends the request, retrying 429/5xx/timeouts with exponential backoff.
  ChatResponse chat(const ChatRequest& request) {
    request.validate();
    const auto started = std::chrono::steady_clock::now();
    const std::string body = wire_body(request);
    std::string last_failure;
    for (int attempt = 1;; ++attempt) {
      const Outcome outcome = post_once(body);
      if (outcome.status == 200) {
        ChatResponse response = parse_reply(outcome.body, request.model);
        response.attempts = attempt;
        response.latency_ms = elapsed_ms(started);
        return response;
      }
      if (outcome.status == 401 || outcome.status == 403) {
        throw Error(ErrorKind::AuthError, "endpoint answered HTTP " + std::to_string(outcome.status));
      }
      const bool transient = outcome.status == 0 || outcome.status == 408 || outcome.status == 429 ||
                             (outcome.status >= 500 && outcome.status <= 599);
      if (!transient) {
        throw Error(ErrorKind::HttpError, "endpoint answered HTTP " + std::to_string(outcome.status) + ": " +
                                              outcome.body.substr(0, 200));
      }
      last_failure = outcome.status == 0 ? outcome.error : "HTTP " + std::to_string(outcome.status);
      if (attempt > config_.retry.max_retries) {
        throw Error(ErrorKind::TransientExhausted,
                    std::to_string(attempt) + " attempts failed; last: " + last_failure);
      }
      config_.sleep(config_.retry.delay(attempt, jitter_draw()));
    }
  }

  /// Returns the stored reply when present; otherwise calls chat() and stores
  /// the result.
  ChatResponse cached_chat(const ChatRequest& request, const ResponseCache& cache) {
    request.validate();
    const auto started = std::chrono::steady_clock::now();
    const std::string key = ResponseCache::key(request);
    if (auto hit = cache.load(key)) {
      cache_hits_.fetch_add(1);
      return ChatResponse{hit->content, hit->model, 1, true, elapsed_ms(started)};
    }
    ChatResponse response = chat(request);
    cache.store(key, {response.content, response.model});
    return response;
  }

  ChatResponse complete(const ChatRequest& request) override {
    return cache_ ? cached_chat(request, *cache_) : chat(request);
  }

  /// HTTP attempts issued so far (retries included).
  std::uint64_t http_requests() const { return http_requests_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }

  static std::string wire_body(const ChatRequest& r) {
    Json body = {{"model", r.model},
                 {"messages", Json::array({{{"role", "system"}, {"content", r.system}},
                                           {{"role", "user"}, {"content", r.user}}})},
                 {"temperature", r.temperature},
                 {"max_tokens", r.max_tokens}};
    if (r.response_format == ResponseFormat::json_object) body["response_format"] = {{"type", "json_object"}};
    return canonical_line(body);
  }

 private:
  struct Outcome {
    int status = 0;  // 0: no HTTP response (connect failure, timeout)
    std::string body;
    std::string error;
  };

  Outcome post_once(const std::string& body) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    http_requests_.fetch_add(1);

    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) return Outcome{0, {}, httplib::to_string(result.error())};
    return Outcome{result->status, result->body, {}};
  }

  static ChatResponse parse_reply(const std::string& body, const std::string& requested_model) {
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::MalformedResponse, "reply is not a JSON object");
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) {
      throw Error(ErrorKind::MalformedResponse, "reply has no choices");
    }
    const auto& first = (*choices)[0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
        !first["message"].contains("content") || !first["message"]["content"].is_string()) {
      throw Error(ErrorKind::MalformedResponse, "reply has no assistant message content");
    }
    ChatResponse response;
    response.content = first["message"]["content"].get<std::string>();
    const auto model = j.find("model");
    response.model = (model != j.end() && model->is_string()) ? model->get<std::string>() : requested_model;
    return response;
  }

  static std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
  }

  static double jitter_draw() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }

  GatewayConfig config_;
  std::counting_semaphore<> slots_;
  std::string origin_;
  std::string path_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::uint64_t> http_requests_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace mcqforge

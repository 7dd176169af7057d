#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mcqforge/text.hpp"

namespace mcqforge {

struct Url {
  std::string scheme;  // lower-cased
  std::string host;    // lower-cased, no brackets for IPv6
  std::optional<int> port;
  std::string path;    // begins with '/' or is empty; query and fragment kept

  int effective_port() const {
    if (port) return *port;
    return scheme == "https" ? 443 : 80;
  }

  /// scheme://host[:port] with no path.
  std::string origin() const {
    std::string out = scheme + "://";
    out += host.find(':') != std::string::npos ? "[" + host + "]" : host;
    if (port) out += ":" + std::to_string(*port);
    return out;
  }
};

/// Parses an absolute URL of the form scheme://[userinfo@]host[:port][/path].
/// Returns nullopt for relative references or a missing host.
inline std::optional<Url> parse_url(std::string_view raw) {
  const auto sep = raw.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  Url url;
  for (std::size_t i = 0; i < sep; ++i) {
    const char c = raw[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    const bool ok = alpha || (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.'));
    if (!ok) return std::nullopt;
  }
  url.scheme = text::ascii_lower(raw.substr(0, sep));

  std::string_view rest = raw.substr(sep + 3);
  const auto path_start = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, path_start);
  if (path_start != std::string_view::npos) url.path = std::string(rest.substr(path_start));

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(1, close - 1);
    std::string_view tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':') return std::nullopt;
      port = tail.substr(1);
    }
  } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) return std::nullopt;
  for (const char c : host) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/' || c == '\\') return std::nullopt;
  }
  url.host = text::ascii_lower(host);
  if (!port.empty()) {
    int value = 0;
    for (const char c : port) {
      if (c < '0' || c > '9') return std::nullopt;
      value = value * 10 + (c - '0');
      if (value > 65535) return std::nullopt;
    }
    url.port = value;
  }
  return url;
}

/// True iff `host` equals `domain` or is a subdomain of it.
inline bool host_within(std::string_view host, std::string_view domain) {
  const std::string h = text::ascii_lower(host);
  std::string d = text::ascii_lower(domain);
  while (!d.empty() && d.back() == '.') d.pop_back();
  if (d.empty()) return false;
  if (h == d) return true;
  return h.size() > d.size() && h.ends_with(d) && h[h.size() - d.size() - 1] == '.';
}

}  // namespace mcqforge

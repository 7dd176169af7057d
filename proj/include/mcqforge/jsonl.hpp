#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>  // nlohmann/json, vendored

#include "mcqforge/error.hpp"

namespace mcqforge {

// std::map-backed objects: keys always serialize in lexicographic order.
using Json = nlohmann::json;

/// One JSON object per line: sorted keys, no insignificant whitespace, raw
/// UTF-8 (no \u escapes for non-ASCII).
inline std::string canonical_line(const Json& value) {
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::BadField, std::string("cannot serialize: ") + e.what());
  }
}

struct JsonlLine {
  std::size_t line_no;  // 1-based
  Json value;
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path.string());
  return buf.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

/// Parses JSONL text. Blank lines are skipped; any other line that is not a
/// JSON object raises SchemaError naming the line.
inline std::vector<JsonlLine> parse_jsonl(std::string_view contents, std::string_view origin = "<input>") {
  std::vector<JsonlLine> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    Json value = Json::parse(line, nullptr, false);
    if (value.is_discarded() || !value.is_object()) {
      throw Error(ErrorKind::SchemaError,
                  std::string(origin) + ":" + std::to_string(line_no) + ": not a JSON object");
    }
    lines.push_back({line_no, std::move(value)});
  }
  return lines;
}

inline std::vector<JsonlLine> read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_text_file(path), path.string());
}

template <typename Range>
std::string to_jsonl(const Range& values) {
  std::string out;
  for (const auto& v : values) {
    out += canonical_line(v);
    out += '\n';
  }
  return out;
}

template <typename Range>
void write_jsonl(const std::filesystem::path& path, const Range& values) {
  write_text_file(path, to_jsonl(values));
}

}  // namespace mcqforge

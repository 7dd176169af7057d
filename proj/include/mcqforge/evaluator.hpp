#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcqforge/error.hpp"
#include "mcqforge/gateway.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/model.hpp"
#include "mcqforge/parallel.hpp"
#include "mcqforge/prompt_kit.hpp"
#include "mcqforge/text.hpp"

namespace mcqforge {

namespace detail {

inline bool ascii_alnum(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

}  // namespace detail

/// Maps a free-form reply to an option index:
///   1. the whole reply is a letter A-D, optionally followed by '.' or ')';
///   2. the first A-D that stands alone (no Latin letter or digit touching it);
///   3. the longest option whose text appears verbatim in the reply;
///   4. otherwise nothing.
inline std::optional<int> extract_choice(std::string_view raw, const std::array<std::string, 4>& options) {
  std::string t = text::trim(raw);
  if (!t.empty() && (t.back() == '.' || t.back() == ')')) t.pop_back();
  if (t.size() == 1) {
    if (auto idx = letter_index(t[0])) return idx;
  }

  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c < 'A' || c > 'D') continue;
    const bool left_ok = i == 0 || !detail::ascii_alnum(raw[i - 1]);
    const bool right_ok = i + 1 == raw.size() || !detail::ascii_alnum(raw[i + 1]);
    if (left_ok && right_ok) return c - 'A';
  }

  const std::string haystack = text::normalize(raw);
  std::optional<int> best;
  std::size_t best_len = 0;
  for (int i = 0; i < 4; ++i) {
    const std::string needle = text::normalize(options[static_cast<std::size_t>(i)]);
    if (needle.empty() || haystack.find(needle) == std::string::npos) continue;
    const std::size_t len = text::codepoint_length(needle);
    if (!best || len > best_len) {
      best = i;
      best_len = len;
    }
  }
  return best;
}

struct EvalRecord {
  std::string item_id;
  std::string model;
  std::string raw_response;
  std::optional<int> predicted_index;
  bool correct = false;
  std::int64_t latency_ms = 0;
  std::optional<std::string> error;  // set when no reply could be obtained

  bool operator==(const EvalRecord&) const = default;
};

inline Json to_json(const EvalRecord& r) {
  Json j = {{"item_id", r.item_id}, {"model", r.model},     {"raw_response", r.raw_response},
            {"correct", r.correct}, {"latency_ms", r.latency_ms}};
  j["predicted_index"] = r.predicted_index ? Json(*r.predicted_index) : Json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

inline EvalRecord score(const MCQItem& item, std::string model, std::string raw, std::int64_t latency_ms) {
  EvalRecord r;
  r.item_id = item.id;
  r.model = std::move(model);
  r.predicted_index = extract_choice(raw, item.options);
  r.correct = r.predicted_index && *r.predicted_index == item.gold_index;
  r.raw_response = std::move(raw);
  r.latency_ms = latency_ms;
  return r;
}

/// Accuracy in hundredths of a percent, rounded half up:
/// round(10000 * correct / total).
inline std::int64_t accuracy_hundredths(std::size_t n_correct, std::size_t n_items) {
  if (n_items == 0) throw Error(ErrorKind::EmptyEvalSet, "no records to score");
  const auto c = static_cast<std::int64_t>(n_correct);
  const auto n = static_cast<std::int64_t>(n_items);
  return (20000 * c + n) / (2 * n);
}

inline std::string format_pct(std::int64_t hundredths) {
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

inline std::int64_t to_hundredths(double pct) { return static_cast<std::int64_t>(std::llround(pct * 100.0)); }

inline double accuracy(const std::vector<EvalRecord>& records) {
  const auto correct = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const EvalRecord& r) { return r.correct; }));
  return static_cast<double>(accuracy_hundredths(correct, records.size())) / 100.0;
}

struct EvalReport {
  std::string model;
  std::string dataset;
  std::size_t n_items = 0;
  std::size_t n_correct = 0;
  std::size_t n_unparsed = 0;
  double accuracy_pct = 0.0;
};

inline Json to_json(const EvalReport& r) {
  return {{"model", r.model},         {"dataset", r.dataset},       {"n_items", r.n_items},
          {"n_correct", r.n_correct}, {"n_unparsed", r.n_unparsed}, {"accuracy_pct", r.accuracy_pct}};
}

inline EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    r.model = j.at("model").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.n_items = j.at("n_items").get<std::size_t>();
    r.n_correct = j.at("n_correct").get<std::size_t>();
    r.n_unparsed = j.at("n_unparsed").get<std::size_t>();
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("bad report: ") + e.what());
  }
}

inline EvalReport summarize(const std::vector<EvalRecord>& records, std::string model, std::string dataset) {
  EvalReport report;
  report.model = std::move(model);
  report.dataset = std::move(dataset);
  report.n_items = records.size();
  for (const auto& r : records) {
    if (r.correct) ++report.n_correct;
    if (!r.predicted_index) ++report.n_unparsed;
  }
  report.accuracy_pct = static_cast<double>(accuracy_hundredths(report.n_correct, report.n_items)) / 100.0;
  return report;
}

struct EvalResult {
  EvalReport report;
  std::vector<EvalRecord> records;  // sorted by item_id
};

struct EvalOptions {
  std::string model;
  std::string dataset = "dataset";
  int parallelism = 4;
  double temperature = 0.0;
  int max_tokens = 16;
};

/// Zero-shot evaluation: one request per item, choice extraction, scoring.
/// Unparseable replies and per-item request failures count as incorrect.
inline EvalResult evaluate_model(const std::vector<MCQItem>& items, ChatBackend& backend, const EvalOptions& opts) {
  if (items.empty()) throw Error(ErrorKind::EmptyEvalSet, "dataset has no items");
  std::vector<EvalRecord> records(items.size());
  parallel_for(items.size(), opts.parallelism, [&](std::size_t i) {
    const auto& item = items[i];
    const auto messages = render_eval_messages(item);
    ChatRequest request{opts.model, messages.system, messages.user, opts.temperature, opts.max_tokens,
                        ResponseFormat::text};
    try {
      const auto reply = backend.complete(request);
      records[i] = score(item, opts.model, reply.content, reply.latency_ms);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::AuthError ||
          e.kind() == ErrorKind::CacheIoError) {
        throw;
      }
      records[i] = EvalRecord{item.id, opts.model, "", std::nullopt, false, 0, e.what()};
    }
  });
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  return {summarize(records, opts.model, opts.dataset), std::move(records)};
}

/// Offline scoring of pre-generated replies ({"item_id", "raw_response"} per
/// line). Items without a reply count as unparsed.
inline EvalResult score_responses(const std::vector<MCQItem>& items, const std::vector<JsonlLine>& responses,
                                  const std::string& model, const std::string& dataset) {
  if (items.empty()) throw Error(ErrorKind::EmptyEvalSet, "dataset has no items");
  std::map<std::string, std::string> by_id;
  for (const auto& line : responses) {
    const auto id = line.value.find("item_id");
    const auto raw = line.value.find("raw_response");
    if (id == line.value.end() || !id->is_string() || raw == line.value.end() || !raw->is_string()) {
      throw Error(ErrorKind::SchemaError,
                  "responses line " + std::to_string(line.line_no) + ": expected item_id and raw_response strings");
    }
    by_id[id->get<std::string>()] = raw->get<std::string>();
  }
  std::vector<EvalRecord> records;
  records.reserve(items.size());
  for (const auto& item : items) {
    const auto it = by_id.find(item.id);
    if (it == by_id.end()) {
      records.push_back({item.id, model, "", std::nullopt, false, 0, std::string("no response")});
    } else {
      records.push_back(score(item, model, it->second, 0));
    }
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  return {summarize(records, model, dataset), std::move(records)};
}

inline std::string records_jsonl(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += canonical_line(to_json(r));
    out += '\n';
  }
  return out;
}

inline std::string report_markdown(const EvalReport& r) {
  std::string out = "| Model | Dataset | Items | Correct | Unparsed | Accuracy (%) |\n";
  out += "| :--- | :--- | ---: | ---: | ---: | ---: |\n";
  out += "| " + r.model + " | " + r.dataset + " | " + std::to_string(r.n_items) + " | " + std::to_string(r.n_correct) +
         " | " + std::to_string(r.n_unparsed) + " | " + format_pct(to_hundredths(r.accuracy_pct)) + " |\n";
  return out;
}

// ---------------------------------------------------------------------------
// Model comparison

struct ComparisonTable {
  std::vector<std::string> models;    // row order: first appearance
  std::vector<std::string> datasets;  // column order: first appearance
  std::vector<std::vector<std::optional<std::int64_t>>> cells;  // hundredths
  std::vector<std::optional<std::int64_t>> column_best;
};

inline ComparisonTable compare_models(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::EmptyEvalSet, "no reports to compare");
  ComparisonTable table;
  auto index_of = [](std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.push_back(name);
    return names.size() - 1;
  };
  for (const auto& r : reports) {
    index_of(table.models, r.model);
    index_of(table.datasets, r.dataset);
  }
  table.cells.assign(table.models.size(), std::vector<std::optional<std::int64_t>>(table.datasets.size()));
  for (const auto& r : reports) {
    auto& cell = table.cells[index_of(table.models, r.model)][index_of(table.datasets, r.dataset)];
    if (cell) throw Error(ErrorKind::DuplicateModelDataset, r.model + " on " + r.dataset + " reported twice");
    cell = to_hundredths(r.accuracy_pct);
  }
  table.column_best.resize(table.datasets.size());
  for (std::size_t c = 0; c < table.datasets.size(); ++c) {
    for (const auto& row : table.cells) {
      if (row[c] && (!table.column_best[c] || *row[c] > *table.column_best[c])) table.column_best[c] = row[c];
    }
  }
  return table;
}

/// Models as rows, datasets as columns; the best score in each column is
/// bold, missing cells show an em dash.
inline std::string comparison_markdown(const ComparisonTable& table) {
  std::string out = "| Model |";
  for (const auto& d : table.datasets) out += " " + d + " |";
  out += "\n| :--- |";
  for (std::size_t c = 0; c < table.datasets.size(); ++c) out += " :---: |";
  out += "\n";
  for (std::size_t r = 0; r < table.models.size(); ++r) {
    out += "| " + table.models[r] + " |";
    for (std::size_t c = 0; c < table.datasets.size(); ++c) {
      const auto& cell = table.cells[r][c];
      if (!cell) {
        out += " — |";
      } else if (cell == table.column_best[c]) {
        out += " **" + format_pct(*cell) + "** |";
      } else {
        out += " " + format_pct(*cell) + " |";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace mcqforge

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcqforge/error.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/text.hpp"
#include "mcqforge/url.hpp"

namespace mcqforge {

enum class SourceTag { palm, palmx_ext, user };
enum class QaFlag { refined_answer, unsure_relevance };

constexpr std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::palm: return "palm";
    case SourceTag::palmx_ext: return "palmx_ext";
    case SourceTag::user: return "user";
  }
  return "user";
}

constexpr std::string_view to_string(QaFlag flag) {
  switch (flag) {
    case QaFlag::refined_answer: return "refined_answer";
    case QaFlag::unsure_relevance: return "unsure_relevance";
  }
  return "";
}

inline std::optional<SourceTag> parse_source_tag(std::string_view s) {
  for (auto tag : {SourceTag::palm, SourceTag::palmx_ext, SourceTag::user}) {
    if (to_string(tag) == s) return tag;
  }
  return std::nullopt;
}

inline std::optional<QaFlag> parse_flag(std::string_view s) {
  for (auto flag : {QaFlag::refined_answer, QaFlag::unsure_relevance}) {
    if (to_string(flag) == s) return flag;
  }
  return std::nullopt;
}

struct QAPair {
  std::string id;
  std::string question;
  std::string answer;
  std::optional<std::string> country;  // alpha-2 code
  std::optional<std::string> source_url;
  SourceTag source_tag = SourceTag::user;
  std::set<QaFlag> flags;

  bool has(QaFlag flag) const { return flags.contains(flag); }
  bool operator==(const QAPair&) const = default;
};

struct Lineage {
  std::string source_qa_id;
  std::string distractor_model;
  std::int64_t shuffle_seed = 0;
  std::optional<std::string> answer;  // gold text the options were built around

  bool operator==(const Lineage&) const = default;
};

struct MCQItem {
  std::string id;
  std::string question;
  std::array<std::string, 4> options;
  int gold_index = 0;
  std::optional<std::string> country;
  std::optional<Lineage> lineage;
  std::optional<std::int64_t> token_count;

  const std::string& gold_text() const { return options.at(static_cast<std::size_t>(gold_index)); }
  bool operator==(const MCQItem&) const = default;
};

enum class AnswerEvaluation { Correct, Incorrect, PartiallyCorrect };
enum class CultureRelevance { Yes, No, Unsure };

constexpr std::string_view to_string(AnswerEvaluation e) {
  switch (e) {
    case AnswerEvaluation::Correct: return "Correct";
    case AnswerEvaluation::Incorrect: return "Incorrect";
    case AnswerEvaluation::PartiallyCorrect: return "Partially Correct";
  }
  return "";
}

constexpr std::string_view to_string(CultureRelevance r) {
  switch (r) {
    case CultureRelevance::Yes: return "Yes";
    case CultureRelevance::No: return "No";
    case CultureRelevance::Unsure: return "Unsure";
  }
  return "";
}

struct Assessment {
  AnswerEvaluation answer_evaluation = AnswerEvaluation::Correct;
  std::string corrected_answer;
  CultureRelevance culture_relevance = CultureRelevance::Yes;

  bool operator==(const Assessment&) const = default;
};

enum class StratumKey { country };

struct DatasetSplit {
  std::vector<std::string> half_a;
  std::vector<std::string> half_b;
  StratumKey stratum_key = StratumKey::country;
  std::int64_t seed = 0;
};

namespace detail {

// Lower-case, drop spaces/underscores/hyphens: "Partially Correct",
// "partially_correct" and "PartiallyCorrect" all fold to "partiallycorrect".
inline std::string fold_enum_literal(std::string_view s) {
  std::string out;
  for (const char c : text::trim(s)) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

inline bool is_country_code(std::string_view s) {
  return s.size() == 2 && s[0] >= 'A' && s[0] <= 'Z' && s[1] >= 'A' && s[1] <= 'Z';
}

class FieldReader {
 public:
  FieldReader(const Json& record, std::vector<FieldIssue>& issues) : record_(record), issues_(issues) {}

  std::optional<std::string> string(std::string_view name, bool required) {
    const auto it = record_.find(name);
    if (it == record_.end() || it->is_null()) {
      if (required) issue(ErrorKind::MissingField, name);
      return std::nullopt;
    }
    if (!it->is_string()) {
      issue(ErrorKind::BadField, name, "expected string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<std::string> text(std::string_view name) {
    auto value = string(name, true);
    if (value && text::is_blank(*value)) {
      issue(ErrorKind::EmptyText, name);
      return std::nullopt;
    }
    return value;
  }

  std::optional<std::int64_t> integer(std::string_view name, bool required) {
    const auto it = record_.find(name);
    if (it == record_.end() || it->is_null()) {
      if (required) issue(ErrorKind::MissingField, name);
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      issue(ErrorKind::BadField, name, "expected integer");
      return std::nullopt;
    }
    return it->get<std::int64_t>();
  }

  void issue(ErrorKind kind, std::string_view field, std::string detail = {}) {
    issues_.push_back({kind, std::string(field), std::move(detail)});
  }

 private:
  const Json& record_;
  std::vector<FieldIssue>& issues_;
};

}  // namespace detail

inline std::optional<AnswerEvaluation> parse_answer_evaluation(std::string_view s) {
  const auto folded = detail::fold_enum_literal(s);
  if (folded == "correct") return AnswerEvaluation::Correct;
  if (folded == "incorrect") return AnswerEvaluation::Incorrect;
  if (folded == "partiallycorrect") return AnswerEvaluation::PartiallyCorrect;
  return std::nullopt;
}

inline std::optional<CultureRelevance> parse_culture_relevance(std::string_view s) {
  const auto folded = detail::fold_enum_literal(s);
  if (folded == "yes") return CultureRelevance::Yes;
  if (folded == "no") return CultureRelevance::No;
  if (folded == "unsure") return CultureRelevance::Unsure;
  return std::nullopt;
}

/// Validates one qa.jsonl record, reporting every violated field at once.
inline QAPair validate_qa(const Json& record) {
  std::vector<FieldIssue> issues;
  if (!record.is_object()) {
    throw ValidationError({{ErrorKind::BadField, "<record>", "expected JSON object"}});
  }
  detail::FieldReader read(record, issues);
  QAPair qa;
  if (auto id = read.text("id")) qa.id = *id;
  if (auto q = read.text("question")) qa.question = *q;
  if (auto a = read.text("answer")) qa.answer = *a;
  if (auto tag = read.string("source_tag", true)) {
    if (auto parsed = parse_source_tag(*tag)) {
      qa.source_tag = *parsed;
    } else {
      read.issue(ErrorKind::BadField, "source_tag", "unknown value \"" + *tag + "\"");
    }
  }
  if (auto country = read.string("country", false)) {
    if (detail::is_country_code(*country)) {
      qa.country = *country;
    } else {
      read.issue(ErrorKind::BadField, "country", "expected two-letter upper-case code");
    }
  }
  if (auto url = read.string("source_url", false)) {
    if (parse_url(*url)) {
      qa.source_url = *url;
    } else {
      read.issue(ErrorKind::BadUrl, "source_url", "not an absolute URL");
    }
  }
  if (const auto it = record.find("flags"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) {
      read.issue(ErrorKind::BadField, "flags", "expected array");
    } else {
      for (const auto& f : *it) {
        const auto flag = f.is_string() ? parse_flag(f.get<std::string>()) : std::nullopt;
        if (flag) {
          qa.flags.insert(*flag);
        } else {
          read.issue(ErrorKind::BadField, "flags", "unknown flag " + f.dump());
        }
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return qa;
}

/// Validates one mcq.jsonl record against every MCQItem invariant.
inline MCQItem validate_mcq(const Json& record) {
  std::vector<FieldIssue> issues;
  if (!record.is_object()) {
    throw ValidationError({{ErrorKind::BadField, "<record>", "expected JSON object"}});
  }
  detail::FieldReader read(record, issues);
  MCQItem item;
  if (auto id = read.text("id")) item.id = *id;
  if (auto q = read.text("question")) item.question = *q;

  bool options_ok = false;
  if (const auto it = record.find("options"); it == record.end() || it->is_null()) {
    read.issue(ErrorKind::MissingField, "options");
  } else if (!it->is_array()) {
    read.issue(ErrorKind::BadField, "options", "expected array");
  } else if (it->size() != 4) {
    read.issue(ErrorKind::OptionCountError, "options", "got " + std::to_string(it->size()) + " options");
  } else {
    options_ok = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& o = (*it)[i];
      if (!o.is_string()) {
        read.issue(ErrorKind::BadField, "options", "option " + std::to_string(i) + " is not a string");
        options_ok = false;
      } else if (text::is_blank(o.get_ref<const std::string&>())) {
        read.issue(ErrorKind::EmptyText, "options", "option " + std::to_string(i) + " is blank");
        options_ok = false;
      } else {
        item.options[i] = o.get<std::string>();
      }
    }
    if (options_ok) {
      std::set<std::string> seen;
      for (const auto& o : item.options) {
        if (!seen.insert(text::normalize(o)).second) {
          read.issue(ErrorKind::DuplicateOption, "options", "\"" + o + "\" repeats");
          options_ok = false;
          break;
        }
      }
    }
  }

  bool gold_ok = false;
  if (auto gold = read.integer("gold_index", true)) {
    if (*gold < 0 || *gold > 3) {
      read.issue(ErrorKind::GoldIndexOutOfRange, "gold_index", std::to_string(*gold));
    } else {
      item.gold_index = static_cast<int>(*gold);
      gold_ok = true;
    }
  }
  if (auto country = read.string("country", false)) {
    if (detail::is_country_code(*country)) {
      item.country = *country;
    } else {
      read.issue(ErrorKind::BadField, "country", "expected two-letter upper-case code");
    }
  }
  if (auto count = read.integer("token_count", false)) {
    if (*count < 0) {
      read.issue(ErrorKind::BadField, "token_count", "negative");
    } else {
      item.token_count = *count;
    }
  }
  if (const auto it = record.find("lineage"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) {
      read.issue(ErrorKind::BadField, "lineage", "expected object");
    } else {
      std::vector<FieldIssue> sub;
      detail::FieldReader lin(*it, sub);
      Lineage lineage;
      if (auto v = lin.string("source_qa_id", true)) lineage.source_qa_id = *v;
      if (auto v = lin.string("distractor_model", true)) lineage.distractor_model = *v;
      if (auto v = lin.integer("shuffle_seed", true)) lineage.shuffle_seed = *v;
      lineage.answer = lin.string("answer", false);
      for (auto& s : sub) {
        s.field = "lineage." + s.field;
        issues.push_back(std::move(s));
      }
      if (sub.empty()) {
        if (options_ok && gold_ok && lineage.answer && item.gold_text() != *lineage.answer) {
          read.issue(ErrorKind::GoldMismatch, "gold_index",
                     "options[" + std::to_string(item.gold_index) + "] is not the recorded answer");
        }
        item.lineage = std::move(lineage);
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return item;
}

inline Json to_json(const QAPair& qa) {
  Json j = {{"id", qa.id}, {"question", qa.question}, {"answer", qa.answer},
            {"source_tag", std::string(to_string(qa.source_tag))}};
  if (qa.country) j["country"] = *qa.country;
  if (qa.source_url) j["source_url"] = *qa.source_url;
  if (!qa.flags.empty()) {
    std::vector<std::string> flags;
    for (auto f : qa.flags) flags.emplace_back(to_string(f));
    std::sort(flags.begin(), flags.end());
    j["flags"] = flags;
  }
  return j;
}

inline Json to_json(const MCQItem& item) {
  Json j = {{"id", item.id},
            {"question", item.question},
            {"options", Json::array({item.options[0], item.options[1], item.options[2], item.options[3]})},
            {"gold_index", item.gold_index}};
  if (item.country) j["country"] = *item.country;
  if (item.token_count) j["token_count"] = *item.token_count;
  if (item.lineage) {
    Json lin = {{"source_qa_id", item.lineage->source_qa_id},
                {"distractor_model", item.lineage->distractor_model},
                {"shuffle_seed", item.lineage->shuffle_seed}};
    if (item.lineage->answer) lin["answer"] = *item.lineage->answer;
    j["lineage"] = std::move(lin);
  }
  return j;
}

inline Json to_json(const Assessment& a) {
  return {{"answer_evaluation", std::string(to_string(a.answer_evaluation))},
          {"corrected_answer", a.corrected_answer},
          {"culture_relevance", std::string(to_string(a.culture_relevance))}};
}

inline Json to_json(const DatasetSplit& split) {
  return {{"half_a", split.half_a}, {"half_b", split.half_b}, {"stratum_key", "country"}, {"seed", split.seed}};
}

/// Parses a dataset file with `validate`, collecting issues from every line
/// (line numbers attached) and rejecting duplicate ids.
template <typename Validate>
auto load_dataset(std::string_view contents, std::string_view origin, Validate validate) {
  using Item = decltype(validate(std::declval<const Json&>()));
  std::vector<Item> items;
  std::vector<FieldIssue> issues;
  std::unordered_map<std::string, std::size_t> first_line;
  for (auto& line : parse_jsonl(contents, origin)) {
    try {
      Item item = validate(line.value);
      auto [it, inserted] = first_line.emplace(item.id, line.line_no);
      if (!inserted) {
        issues.push_back({ErrorKind::DuplicateId, "id",
                          "\"" + item.id + "\" first seen on line " + std::to_string(it->second), line.line_no});
        continue;
      }
      items.push_back(std::move(item));
    } catch (const ValidationError& e) {
      for (auto issue : e.issues()) {
        issue.line = line.line_no;
        issues.push_back(std::move(issue));
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return items;
}

inline std::vector<QAPair> load_qa_file(const std::filesystem::path& path) {
  return load_dataset(read_text_file(path), path.string(), [](const Json& j) { return validate_qa(j); });
}

inline std::vector<MCQItem> load_mcq_file(const std::filesystem::path& path) {
  return load_dataset(read_text_file(path), path.string(), [](const Json& j) { return validate_mcq(j); });
}

template <typename Item>
std::string dataset_to_jsonl(const std::vector<Item>& items) {
  std::string out;
  for (const auto& item : items) {
    out += canonical_line(to_json(item));
    out += '\n';
  }
  return out;
}

template <typename Item>
void save_dataset(const std::filesystem::path& path, const std::vector<Item>& items) {
  write_text_file(path, dataset_to_jsonl(items));
}

}  // namespace mcqforge

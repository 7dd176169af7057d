#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mcqforge/country.hpp"
#include "mcqforge/error.hpp"
#include "mcqforge/gateway.hpp"
#include "mcqforge/json_extract.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/model.hpp"
#include "mcqforge/parallel.hpp"
#include "mcqforge/prompt_kit.hpp"
#include "mcqforge/prompts.hpp"
#include "mcqforge/rng.hpp"
#include "mcqforge/text.hpp"
#include "mcqforge/url.hpp"

namespace mcqforge {

enum class UnsurePolicy { keep_flagged, drop };

enum class Stage { country, domain, assess, distractor, assemble, token_guard };

constexpr std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::country: return "country";
    case Stage::domain: return "domain";
    case Stage::assess: return "assess";
    case Stage::distractor: return "distractor";
    case Stage::assemble: return "assemble";
    case Stage::token_guard: return "token_guard";
  }
  return "";
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (auto stage : {Stage::country, Stage::domain, Stage::assess, Stage::distractor, Stage::assemble,
                     Stage::token_guard}) {
    if (to_string(stage) == s) return stage;
  }
  return std::nullopt;
}

struct PipelineConfig {
  int max_prompt_tokens = 512;
  UnsurePolicy unsure_policy = UnsurePolicy::keep_flagged;
  int distractor_retries = 2;
  std::int64_t shuffle_seed = 0;
  std::optional<std::set<std::string>> domain_allowlist;

  std::string model = "gpt-4.1";
  double country_temperature = 0.0;
  double assess_temperature = 0.0;
  double distractor_temperature = 0.7;
  int max_tokens = 1024;
  int parallelism = 4;

  void validate() const {
    if (max_prompt_tokens < 32) throw Error(ErrorKind::ConfigError, "pipeline.max_prompt_tokens must be >= 32");
    if (distractor_retries < 0) throw Error(ErrorKind::ConfigError, "pipeline.distractor_retries must be >= 0");
    if (domain_allowlist && domain_allowlist->empty()) {
      throw Error(ErrorKind::ConfigError, "pipeline.domain_allowlist is set but empty");
    }
    if (model.empty()) throw Error(ErrorKind::ConfigError, "llm.model is empty");
    if (parallelism < 1) throw Error(ErrorKind::ConfigError, "llm.parallelism must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Token counting

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// ceil(1.3 * word count), in integers.
inline std::size_t approx_token_count(std::string_view s) {
  return (text::count_words(s) * 13 + 9) / 10;
}

// ---------------------------------------------------------------------------
// Country identification

inline ChatRequest country_request(const QAPair& qa, const PipelineConfig& cfg) {
  return {cfg.model, std::string(prompts::kCountrySystem),
          prompts::fill(prompts::kCountryUser, {{"question", qa.question}}), cfg.country_temperature,
          cfg.max_tokens, ResponseFormat::json_object};
}

inline CountryTag parse_country_reply(std::string_view content) {
  const Json j = extract_json(content);
  const auto it = j.find("country");
  if (it == j.end() || !it->is_string()) throw Error(ErrorKind::SchemaError, "reply lacks a \"country\" string");
  return parse_country(it->get<std::string>());
}

inline CountryTag identify_country(const QAPair& qa, ChatBackend& backend, const PipelineConfig& cfg) {
  return parse_country_reply(backend.complete(country_request(qa, cfg)).content);
}

// ---------------------------------------------------------------------------
// Assessment

inline ChatRequest assess_request(const QAPair& qa, const PipelineConfig& cfg) {
  return {cfg.model, std::string(prompts::kAssessSystem),
          prompts::fill(prompts::kAssessUser, {{"question", qa.question}, {"answer", qa.answer}}),
          cfg.assess_temperature, cfg.max_tokens, ResponseFormat::json_object};
}

inline Assessment parse_assessment(const Json& j) {
  auto field = [&](const char* name) -> std::string {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(ErrorKind::SchemaError, std::string("missing field ") + name);
    if (it->is_null()) return {};
    if (!it->is_string()) throw Error(ErrorKind::SchemaError, std::string(name) + " is not a string");
    return it->get<std::string>();
  };
  Assessment a;
  const auto evaluation = field("answer_evaluation");
  const auto parsed_eval = parse_answer_evaluation(evaluation);
  if (!parsed_eval) throw Error(ErrorKind::SchemaError, "illegal answer_evaluation \"" + evaluation + "\"");
  a.answer_evaluation = *parsed_eval;
  a.corrected_answer = text::trim(field("corrected_answer"));
  const auto relevance = field("culture_relevance");
  const auto parsed_rel = parse_culture_relevance(relevance);
  if (!parsed_rel) throw Error(ErrorKind::SchemaError, "illegal culture_relevance \"" + relevance + "\"");
  a.culture_relevance = *parsed_rel;
  return a;
}

inline Assessment assess_qa(const QAPair& qa, ChatBackend& backend, const PipelineConfig& cfg) {
  return parse_assessment(extract_json(backend.complete(assess_request(qa, cfg)).content));
}

struct AssessmentDecision {
  std::optional<QAPair> kept;
  std::string drop_reason;  // set iff !kept

  bool dropped() const { return !kept.has_value(); }
};

inline AssessmentDecision apply_assessment(const QAPair& qa, const Assessment& a, const PipelineConfig& cfg) {
  if (a.answer_evaluation == AnswerEvaluation::Incorrect) return {std::nullopt, "factually_incorrect"};
  if (a.culture_relevance == CultureRelevance::No) return {std::nullopt, "irrelevant"};
  QAPair kept = qa;
  if (a.culture_relevance == CultureRelevance::Unsure) {
    if (cfg.unsure_policy == UnsurePolicy::drop) return {std::nullopt, "unsure_relevance"};
    kept.flags.insert(QaFlag::unsure_relevance);
  }
  if (!text::is_blank(a.corrected_answer)) {
    kept.answer = a.corrected_answer;
    kept.flags.insert(QaFlag::refined_answer);
  }
  return {std::move(kept), {}};
}

// ---------------------------------------------------------------------------
// Domain allowlist

/// Without an allowlist everything passes. With one, the source host must
/// equal an entry or be a subdomain of it; records without a URL fail.
inline bool filter_by_domain(const QAPair& qa, const std::optional<std::set<std::string>>& allowlist) {
  if (!allowlist) return true;
  if (!qa.source_url) return false;
  const auto url = parse_url(*qa.source_url);
  if (!url) return false;
  return std::any_of(allowlist->begin(), allowlist->end(),
                     [&](const std::string& domain) { return host_within(url->host, domain); });
}

// ---------------------------------------------------------------------------
// Distractors

using Distractors = std::array<std::string, 3>;

inline ChatRequest distractor_request(const QAPair& qa, const PipelineConfig& cfg, int sample_index) {
  ChatRequest r{cfg.model, std::string(prompts::kDistractorSystem),
                prompts::fill(prompts::kDistractorUser, {{"question", qa.question}, {"answer", qa.answer}}),
                cfg.distractor_temperature, cfg.max_tokens, ResponseFormat::json_object};
  r.sample_index = sample_index;
  return r;
}

/// Keys are matched after trimming, dropping trailing periods and
/// upper-casing, so "A." and "a" both mean A.
inline Distractors parse_distractors(const Json& j, std::string_view answer) {
  std::array<std::optional<std::string>, 3> slots;
  for (const auto& [raw_key, value] : j.items()) {
    std::string key = text::trim(raw_key);
    while (!key.empty() && key.back() == '.') key.pop_back();
    key = text::trim(key);
    if (key.size() != 1 || !((key[0] >= 'A' && key[0] <= 'C') || (key[0] >= 'a' && key[0] <= 'c'))) {
      throw Error(ErrorKind::SchemaError, "unexpected distractor key \"" + raw_key + "\"");
    }
    const auto slot = static_cast<std::size_t>((key[0] | 0x20) - 'a');
    if (slots[slot]) throw Error(ErrorKind::SchemaError, "distractor key repeated: \"" + raw_key + "\"");
    if (!value.is_string()) throw Error(ErrorKind::SchemaError, "distractor \"" + raw_key + "\" is not a string");
    slots[slot] = value.get<std::string>();
  }
  Distractors out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!slots[i]) {
      throw Error(ErrorKind::SchemaError, std::string("missing distractor ") + static_cast<char>('A' + i));
    }
    out[i] = text::trim(*slots[i]);
  }
  const std::string gold = text::normalize(answer);
  std::set<std::string> seen;
  for (const auto& d : out) {
    if (d.empty()) throw Error(ErrorKind::DistractorQualityError, "blank distractor");
    const auto norm = text::normalize(d);
    if (norm == gold) throw Error(ErrorKind::DistractorQualityError, "distractor equals the correct answer: \"" + d + "\"");
    if (!seen.insert(norm).second) throw Error(ErrorKind::DistractorQualityError, "duplicate distractor \"" + d + "\"");
  }
  return out;
}

/// Requests distractors, re-sampling up to cfg.distractor_retries times when
/// the reply is unparseable or fails validation. The last failure is
/// rethrown once retries run out.
inline Distractors generate_distractors(const QAPair& qa, ChatBackend& backend, const PipelineConfig& cfg) {
  for (int attempt = 0;; ++attempt) {
    try {
      const auto reply = backend.complete(distractor_request(qa, cfg, attempt));
      return parse_distractors(extract_json(reply.content), qa.answer);
    } catch (const Error& e) {
      const bool retryable = e.kind() == ErrorKind::JsonExtractError || e.kind() == ErrorKind::SchemaError ||
                             e.kind() == ErrorKind::DistractorQualityError;
      if (!retryable) throw;
      if (attempt >= cfg.distractor_retries) {
        throw Error(e.kind(), std::to_string(attempt + 1) + " attempts rejected; last: " + e.what());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Assembly

/// Shuffles [answer, d1, d2, d3] with a stream keyed on (seed, qa.id).
inline MCQItem assemble_mcq(const QAPair& qa, const Distractors& distractors, std::int64_t seed,
                            std::string_view distractor_model = {}) {
  std::set<std::string> seen{text::normalize(qa.answer)};
  for (const auto& d : distractors) {
    if (!seen.insert(text::normalize(d)).second) {
      throw Error(ErrorKind::DuplicateOption, "option \"" + d + "\" repeats for " + qa.id);
    }
  }
  std::array<int, 4> order{0, 1, 2, 3};
  auto rng = SplitMix64::keyed(seed, qa.id);
  shuffle(std::span<int>(order), rng);

  MCQItem item;
  item.id = qa.id;
  item.question = qa.question;
  item.country = qa.country;
  for (std::size_t pos = 0; pos < 4; ++pos) {
    const int source = order[pos];
    item.options[pos] = source == 0 ? qa.answer : distractors[static_cast<std::size_t>(source - 1)];
    if (source == 0) item.gold_index = static_cast<int>(pos);
  }
  item.lineage = Lineage{qa.id, std::string(distractor_model), seed, qa.answer};
  return item;
}

// ---------------------------------------------------------------------------
// Token guard

struct TokenVerdict {
  bool pass = false;
  std::size_t count = 0;
};

/// Counts tokens over the fully rendered training sequence. Inclusive bound;
/// passing items get token_count filled in.
inline TokenVerdict guard_token_limit(MCQItem& item, const TokenCounter& counter, int limit) {
  const std::size_t count = counter(render_train_example(item).text);
  const bool pass = count <= static_cast<std::size_t>(std::max(limit, 0));
  if (pass) item.token_count = static_cast<std::int64_t>(count);
  return {pass, count};
}

// ---------------------------------------------------------------------------
// Review sampling

/// Seeded uniform sample of n distinct items, returned in id order.
inline std::vector<MCQItem> sample_for_review(const std::vector<MCQItem>& items, std::size_t n, std::int64_t seed) {
  if (n > items.size()) {
    throw Error(ErrorKind::SampleTooLarge,
                "asked for " + std::to_string(n) + " of " + std::to_string(items.size()) + " items");
  }
  std::vector<std::size_t> index(items.size());
  std::iota(index.begin(), index.end(), 0);
  auto rng = SplitMix64::keyed(seed, "review-sample");
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(items.size() - i));
    std::swap(index[i], index[j]);
  }
  std::vector<MCQItem> sample;
  sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sample.push_back(items[index[i]]);
  std::sort(sample.begin(), sample.end(), [](const MCQItem& a, const MCQItem& b) { return a.id < b.id; });
  return sample;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline constexpr std::string_view kReviewHeader = "id,question,options,gold,accuracy_score,clarity_score";

/// RFC 4180 CSV; the two score columns are left blank for reviewers (0-10).
inline std::string review_sheet_csv(const std::vector<MCQItem>& sample) {
  std::string out(kReviewHeader);
  out += "\r\n";
  for (const auto& item : sample) {
    std::string options;
    for (int i = 0; i < 4; ++i) {
      if (i) options += '\n';
      options += option_letter(i);
      options += ". ";
      options += item.options[static_cast<std::size_t>(i)];
    }
    out += detail::csv_field(item.id) + "," + detail::csv_field(item.question) + "," + detail::csv_field(options) +
           "," + option_letter(item.gold_index) + ",,\r\n";
  }
  return out;
}

inline void write_review_sheet(const std::filesystem::path& path, const std::vector<MCQItem>& items, std::size_t n,
                               std::int64_t seed) {
  write_text_file(path, review_sheet_csv(sample_for_review(items, n, seed)));
}

// ---------------------------------------------------------------------------
// Pipeline

struct Rejection {
  std::string qa_id;
  Stage stage = Stage::country;
  std::string reason;

  bool operator==(const Rejection&) const = default;
};

inline Json to_json(const Rejection& r) {
  return {{"qa_id", r.qa_id}, {"stage", std::string(to_string(r.stage))}, {"reason", r.reason}};
}

struct PipelineStats {
  // Mean over accepted items of (mean distractor length / answer length), in
  // code points. Values well below 1 mean distractors are visibly shorter
  // than the gold answer.
  double distractor_length_ratio = 0.0;
};

struct PipelineOutput {
  std::vector<MCQItem> accepted;    // sorted by id
  std::vector<Rejection> rejected;  // sorted by qa_id
  PipelineStats stats;
};

namespace detail {

// Errors that mean the run itself is misconfigured, not that one item failed.
inline bool aborts_run(ErrorKind kind) {
  return kind == ErrorKind::ConfigError || kind == ErrorKind::AuthError || kind == ErrorKind::CacheIoError;
}

struct ItemOutcome {
  std::optional<MCQItem> item;
  std::optional<Rejection> rejection;
};

class StageRunner {
 public:
  StageRunner(std::string id, Stage stage) : id_(std::move(id)), stage_(stage) {}

  template <typename Fn>
  auto operator()(Fn&& fn) -> std::optional<decltype(fn())> {
    try {
      return fn();
    } catch (const Error& e) {
      if (aborts_run(e.kind())) throw;
      rejection_ = Rejection{id_, stage_, e.what()};
      return std::nullopt;
    }
  }

  std::optional<Rejection> rejection_;

 private:
  std::string id_;
  Stage stage_;
};

}  // namespace detail

/// One item through every stage in order; the first failing stage ends it.
inline detail::ItemOutcome process_item(QAPair qa, const PipelineConfig& cfg, ChatBackend& backend,
                                        const TokenCounter& counter) {
  auto reject = [&](Stage stage, std::string reason) {
    return detail::ItemOutcome{std::nullopt, Rejection{qa.id, stage, std::move(reason)}};
  };
  auto guarded = [&](Stage stage, auto&& fn) {
    detail::StageRunner run(qa.id, stage);
    auto result = run(fn);
    return std::make_pair(std::move(result), std::move(run.rejection_));
  };

  if (!qa.country) {
    auto [tag, rejected] = guarded(Stage::country, [&] { return identify_country(qa, backend, cfg); });
    if (rejected) return {std::nullopt, rejected};
    qa.country = tag->code;
  }
  if (!filter_by_domain(qa, cfg.domain_allowlist)) {
    return reject(Stage::domain, qa.source_url ? "source domain not in allowlist: " + *qa.source_url
                                               : std::string("no source_url while an allowlist is set"));
  }
  auto [assessment, assess_failed] = guarded(Stage::assess, [&] { return assess_qa(qa, backend, cfg); });
  if (assess_failed) return {std::nullopt, assess_failed};
  auto decision = apply_assessment(qa, *assessment, cfg);
  if (decision.dropped()) return reject(Stage::assess, decision.drop_reason);
  qa = std::move(*decision.kept);

  auto [distractors, distractor_failed] =
      guarded(Stage::distractor, [&] { return generate_distractors(qa, backend, cfg); });
  if (distractor_failed) return {std::nullopt, distractor_failed};

  auto [item, assemble_failed] =
      guarded(Stage::assemble, [&] { return assemble_mcq(qa, *distractors, cfg.shuffle_seed, cfg.model); });
  if (assemble_failed) return {std::nullopt, assemble_failed};

  const auto verdict = guard_token_limit(*item, counter, cfg.max_prompt_tokens);
  if (!verdict.pass) {
    return reject(Stage::token_guard, "token_count=" + std::to_string(verdict.count) + " exceeds " +
                                          std::to_string(cfg.max_prompt_tokens));
  }
  return {std::move(item), std::nullopt};
}

inline double distractor_length_ratio(const MCQItem& item) {
  const double answer = static_cast<double>(text::codepoint_length(item.gold_text()));
  if (answer == 0) return 0.0;
  double total = 0;
  for (int i = 0; i < 4; ++i) {
    if (i != item.gold_index) total += static_cast<double>(text::codepoint_length(item.options[static_cast<std::size_t>(i)]));
  }
  return (total / 3.0) / answer;
}

/// Runs every item through country -> domain -> assess -> distractors ->
/// assemble -> token guard. Items run concurrently (cfg.parallelism) but the
/// output is ordered by id, so a warm cache reproduces it byte for byte.
/// Only configuration-level errors escape; item failures become rejections.
inline PipelineOutput run_pipeline(const std::vector<QAPair>& input, const PipelineConfig& cfg, ChatBackend& backend,
                                   const TokenCounter& counter = approx_token_count) {
  cfg.validate();
  std::vector<detail::ItemOutcome> outcomes(input.size());
  parallel_for(input.size(), cfg.parallelism,
               [&](std::size_t i) { outcomes[i] = process_item(input[i], cfg, backend, counter); });

  PipelineOutput out;
  double ratio_sum = 0;
  for (auto& outcome : outcomes) {
    if (outcome.item) {
      ratio_sum += distractor_length_ratio(*outcome.item);
      out.accepted.push_back(std::move(*outcome.item));
    } else {
      out.rejected.push_back(std::move(*outcome.rejection));
    }
  }
  std::sort(out.accepted.begin(), out.accepted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(out.rejected.begin(), out.rejected.end(), [](const auto& a, const auto& b) { return a.qa_id < b.qa_id; });
  if (!out.accepted.empty()) out.stats.distractor_length_ratio = ratio_sum / static_cast<double>(out.accepted.size());
  return out;
}

inline std::string rejections_jsonl(const std::vector<Rejection>& rejected) {
  std::string out;
  for (const auto& r : rejected) {
    out += canonical_line(to_json(r));
    out += '\n';
  }
  return out;
}

}  // namespace mcqforge

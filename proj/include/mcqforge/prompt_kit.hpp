#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcqforge/error.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/model.hpp"
#include "mcqforge/prompts.hpp"

namespace mcqforge {

inline constexpr std::string_view kEndOfTurn = "<end_of_turn>";

/// gold_index 0..3 <-> 'A'..'D'.
constexpr char option_letter(int index) { return static_cast<char>('A' + index); }

constexpr std::optional<int> letter_index(char letter) {
  if (letter >= 'A' && letter <= 'D') return letter - 'A';
  return std::nullopt;
}

struct RenderedExample {
  std::string id;
  std::string text;         // full training sequence, gold letter included
  std::string prompt_text;  // text up to where the model's answer begins

  bool operator==(const RenderedExample&) const = default;
};

namespace detail {

inline prompts::Bindings option_bindings(const MCQItem& item) {
  return {{"question", item.question},
          {"option_a", item.options[0]},
          {"option_b", item.options[1]},
          {"option_c", item.options[2]},
          {"option_d", item.options[3]}};
}

}  // namespace detail

inline RenderedExample render_train_example(const MCQItem& item) {
  constexpr std::string_view kAnswerSlot = "{answer_letter}";
  const auto slot = prompts::kTrainPrompt.find(kAnswerSlot);
  const auto bindings = detail::option_bindings(item);
  RenderedExample out;
  out.id = item.id;
  out.prompt_text = prompts::fill(prompts::kTrainPrompt.substr(0, slot), bindings);
  out.text = out.prompt_text;
  out.text += option_letter(item.gold_index);
  out.text += prompts::kTrainPrompt.substr(slot + kAnswerSlot.size());
  return out;
}

struct EvalMessages {
  std::string system;
  std::string user;
};

inline EvalMessages render_eval_messages(const MCQItem& item) {
  return {std::string(prompts::kEvalSystem), prompts::fill(prompts::kEvalUser, detail::option_bindings(item))};
}

struct TrainRecord {
  std::string id;
  std::string text;

  bool operator==(const TrainRecord&) const = default;
};

inline std::string train_jsonl(const std::vector<MCQItem>& items) {
  std::string out;
  for (const auto& item : items) {
    const auto ex = render_train_example(item);
    out += canonical_line({{"id", ex.id}, {"text", ex.text}});
    out += '\n';
  }
  return out;
}

inline void emit_train_jsonl(const std::vector<MCQItem>& items, const std::filesystem::path& path) {
  write_text_file(path, train_jsonl(items));
}

inline std::vector<TrainRecord> parse_train_jsonl(std::string_view contents, std::string_view origin = "<input>") {
  std::vector<TrainRecord> records;
  for (const auto& line : parse_jsonl(contents, origin)) {
    const auto& j = line.value;
    const auto id = j.find("id");
    const auto text = j.find("text");
    if (id == j.end() || !id->is_string() || text == j.end() || !text->is_string() || j.size() != 2) {
      throw Error(ErrorKind::SchemaError, std::string(origin) + ":" + std::to_string(line.line_no) +
                                              ": expected exactly {\"id\", \"text\"} strings");
    }
    records.push_back({id->get<std::string>(), text->get<std::string>()});
  }
  return records;
}

inline std::vector<TrainRecord> load_train_jsonl(const std::filesystem::path& path) {
  return parse_train_jsonl(read_text_file(path), path.string());
}

}  // namespace mcqforge

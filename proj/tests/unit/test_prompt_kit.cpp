#include <gtest/gtest.h>

#include "mcqforge/prompt_kit.hpp"
#include "support/temp_dir.hpp"

using namespace mcqforge;
using namespace mcqforge::testing;

namespace {

const std::string kSystemSentence =
    "You're a helpful Arabic assistant that answers multiple-choice questions accurately. "
    "Choose the best answer based only on the given question and options.";

std::string golden(const std::string& name) { return read_text_file(source_dir() / "tests" / "golden" / name); }

MCQItem golden_item(const std::string& id) { return validate_mcq(Json::parse(golden(id + ".mcq.json"))); }

MCQItem simple_item(std::string id, int gold) {
  MCQItem item;
  item.id = std::move(id);
  item.question = "ما هي عاصمة تونس؟";
  item.options = {"تونس", "صفاقس", "سوسة", "القيروان"};
  item.gold_index = gold;
  return item;
}

}  // namespace

class GoldenPrompt : public ::testing::TestWithParam<std::string> {};

TEST_P(GoldenPrompt, TrainExampleMatchesGoldenBytes) {
  const auto item = golden_item(GetParam());
  EXPECT_EQ(render_train_example(item).text, golden(GetParam() + ".train.txt"));
}

TEST_P(GoldenPrompt, EvalMessagesMatchGoldenBytes) {
  const auto item = golden_item(GetParam());
  const auto messages = render_eval_messages(item);
  EXPECT_EQ(messages.system, golden(GetParam() + ".eval_system.txt"));
  EXPECT_EQ(messages.user, golden(GetParam() + ".eval_user.txt"));
}

INSTANTIATE_TEST_SUITE_P(Fixtures, GoldenPrompt, ::testing::Values("golden-1", "golden-2", "golden-3"));

TEST(RenderTrainExample, SystemSentenceIsVerbatim) {
  const auto text = render_train_example(simple_item("t", 0)).text;
  EXPECT_EQ(text.rfind("<bos> " + kSystemSentence + " <start_of_turn>user\n", 0), 0u);
  EXPECT_EQ(render_eval_messages(simple_item("t", 0)).system, kSystemSentence);
}

TEST(RenderTrainExample, GoldOnlyChangesTheFinalLetter) {
  const auto a = render_train_example(simple_item("t", 0));
  const auto c = render_train_example(simple_item("t", 2));
  EXPECT_EQ(a.prompt_text, c.prompt_text);
  EXPECT_EQ(a.text, a.prompt_text + "A <end_of_turn>");
  EXPECT_EQ(c.text, c.prompt_text + "C <end_of_turn>");
  EXPECT_TRUE(a.prompt_text.ends_with("<end_of_turn>\n<start_of_turn>model\n"));
}

TEST(RenderTrainExample, NewlineInOptionKeepsLineStructure) {
  const auto item = golden_item("golden-3");
  const auto text = render_train_example(item).text;
  EXPECT_NE(text.find("B. يطيّره\nفي السماء\nC. يبيعه\n"), std::string::npos);
}

TEST(RenderTrainExample, BracesInContentAreNotTemplateSlots) {
  auto item = simple_item("t", 1);
  item.question = "ما معنى {option_a} هنا؟";
  const auto text = render_train_example(item).text;
  EXPECT_NE(text.find("ما معنى {option_a} هنا؟"), std::string::npos);
}

TEST(RenderEvalMessages, FourLabelLinesAndStableBytes) {
  const auto item = simple_item("t", 3);
  const auto first = render_eval_messages(item);
  const auto second = render_eval_messages(item);
  EXPECT_EQ(first.user, second.user);
  int labels = 0;
  std::size_t pos = 0;
  while (pos < first.user.size()) {
    const auto end = std::min(first.user.find('\n', pos), first.user.size());
    const auto line = first.user.substr(pos, end - pos);
    if (line.size() > 2 && line[0] >= 'A' && line[0] <= 'D' && line[1] == '.' && line[2] == ' ') ++labels;
    pos = end + 1;
  }
  EXPECT_EQ(labels, 4);
  EXPECT_TRUE(first.user.ends_with("\nAnswer with the letter only."));
}

TEST(OptionLetters, Bijection) {
  for (int i = 0; i < 4; ++i) EXPECT_EQ(letter_index(option_letter(i)), i);
  EXPECT_EQ(letter_index('E'), std::nullopt);
  EXPECT_EQ(letter_index('a'), std::nullopt);
}

TEST(Templates, ShippedFilesMatchCompiledPrompts) {
  const auto dir = source_dir() / "templates";
  const std::pair<const char*, std::string_view> files[] = {
      {"country_system.txt", prompts::kCountrySystem},       {"country_user.txt", prompts::kCountryUser},
      {"assess_system.txt", prompts::kAssessSystem},         {"assess_user.txt", prompts::kAssessUser},
      {"distractor_system.txt", prompts::kDistractorSystem}, {"distractor_user.txt", prompts::kDistractorUser},
      {"train_prompt.txt", prompts::kTrainPrompt},           {"eval_system.txt", prompts::kEvalSystem},
      {"eval_user.txt", prompts::kEvalUser},
  };
  for (const auto& [name, compiled] : files) EXPECT_EQ(read_text_file(dir / name), compiled) << name;
}

TEST(Fill, SinglePassAndUnboundSlotsKept) {
  EXPECT_EQ(prompts::fill("{a}-{b}-{c}", {{"a", "{b}"}, {"b", "2"}}), "{b}-2-{c}");
  EXPECT_EQ(prompts::fill("{ \"A.\": \"...\" } {x", {{"x", "1"}}), "{ \"A.\": \"...\" } {x");
}

TEST(TrainJsonl, EmitThenLoadRoundTrips) {
  TempDir dir;
  std::vector<MCQItem> items{golden_item("golden-1"), golden_item("golden-2"), golden_item("golden-3")};
  emit_train_jsonl(items, dir / "train.jsonl");
  const auto loaded = load_train_jsonl(dir / "train.jsonl");
  ASSERT_EQ(loaded.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(loaded[i], (TrainRecord{items[i].id, render_train_example(items[i]).text}));
  }
  const auto bytes = read_text_file(dir / "train.jsonl");
  EXPECT_EQ(bytes.find("\"id\""), 1u);  // keys sorted: id before text
}

TEST(TrainJsonl, TableOneTrainingMixtureLineCount) {
  // 2,000 + 500 + 950 + 22,000 items.
  const std::size_t total = 2000 + 500 + 950 + 22000;
  std::vector<MCQItem> items;
  items.reserve(total);
  for (std::size_t i = 0; i < total; ++i) items.push_back(simple_item("i" + std::to_string(i), static_cast<int>(i % 4)));
  TempDir dir;
  emit_train_jsonl(items, dir / "train.jsonl");
  const auto bytes = read_text_file(dir / "train.jsonl");
  EXPECT_EQ(std::count(bytes.begin(), bytes.end(), '\n'), 25450);
  EXPECT_EQ(load_train_jsonl(dir / "train.jsonl").size(), 25450u);
}

TEST(TrainJsonl, MalformedLineReportsLineNumber) {
  const std::string contents = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n";
  try {
    parse_train_jsonl(contents, "train.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
    EXPECT_NE(std::string(e.what()).find("train.jsonl:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_train_jsonl("not json\n"), Error);
}

#pragma once

#include <string>
#include <vector>

#include "mcqforge/jsonl.hpp"
#include "mcqforge/model.hpp"
#include "support/mock_llm.hpp"
#include "support/temp_dir.hpp"

namespace mcqforge::testing {

inline std::filesystem::path pipeline_fixture_dir() { return source_dir() / "tests" / "fixtures" / "pipeline20"; }

struct PipelineFixture {
  std::vector<QAPair> items;
  Json replies;
  Json expected_tokens;
};

inline PipelineFixture load_pipeline_fixture() {
  const auto dir = pipeline_fixture_dir();
  return {load_qa_file(dir / "qa.jsonl"), Json::parse(read_text_file(dir / "replies.json")),
          Json::parse(read_text_file(dir / "expected_tokens.json"))};
}

/// In-process backend replaying the recorded replies.
inline ScriptedBackend recorded_backend(RecordedReplies& recorded) {
  return ScriptedBackend([&recorded](const ChatRequest& r) { return std::get<2>(recorded.next(r.system, r.user)); });
}

}  // namespace mcqforge::testing

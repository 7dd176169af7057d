// mcqforge: QA -> MCQ augmentation, splitting, prompt emission and
// evaluation from the command line.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mcqforge/mcqforge.hpp"

namespace fs = std::filesystem;
using namespace mcqforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitConfig = 2;

struct GlobalOptions {
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;  // key=value
  bool verbose = false;
};

/// defaults < config file < flags < environment
Config layered_config(const GlobalOptions& g, const std::vector<std::pair<std::string, std::string>>& flag_values) {
  Config c;
  if (g.config_file) c.load_file(*g.config_file);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "--set expects key=value, got \"" + kv + "\"");
    c.set(text::trim(std::string_view(kv).substr(0, eq)), text::trim(std::string_view(kv).substr(eq + 1)));
  }
  for (const auto& [key, value] : flag_values) c.set(key, value);
  c.apply_env(process_env);
  return c;
}

bool same_file(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  if (fs::exists(a, ec) && fs::exists(b, ec)) return fs::equivalent(a, b, ec);
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

void refuse_overwrite(const fs::path& input, const fs::path& output) {
  if (same_file(input, output)) {
    throw Error(ErrorKind::ConfigError, "output " + output.string() + " would overwrite input " + input.string());
  }
}

std::string api_key() {
  auto key = process_env(std::string(kApiKeyEnv));
  if (!key || key->empty()) throw Error(ErrorKind::ConfigError, std::string(kApiKeyEnv) + " is not set");
  return *key;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string in, out, source_tag = "palm", id_prefix = "palm";
};

int run_ingest(const IngestArgs& a) {
  refuse_overwrite(a.in, a.out);
  if (!parse_source_tag(a.source_tag)) throw Error(ErrorKind::ConfigError, "unknown --source-tag " + a.source_tag);
  const std::string contents = read_text_file(a.in);
  std::size_t counter = 0;
  const auto items = load_dataset(contents, a.in, [&](const Json& raw) {
    Json record = raw;
    ++counter;
    if (record.is_object()) {
      if (!record.contains("id")) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "-%04zu", counter);
        record["id"] = a.id_prefix + buf;
      }
      if (!record.contains("source_tag")) record["source_tag"] = a.source_tag;
    }
    return validate_qa(record);
  });
  save_dataset(a.out, items);
  spdlog::info("ingest done in={} out={} items={}", a.in, a.out, items.size());
  return kExitOk;
}

struct AugmentArgs {
  std::string in, out;
  std::optional<std::string> rejected;
  std::optional<std::int64_t> seed;
  std::optional<int> parallelism;
  std::optional<std::string> model;
};

int run_augment(const GlobalOptions& g, const AugmentArgs& a) {
  const fs::path out = a.out;
  const fs::path rejected = a.rejected ? fs::path(*a.rejected) : out.parent_path() / "rejected.jsonl";
  refuse_overwrite(a.in, out);
  refuse_overwrite(a.in, rejected);
  if (same_file(out, rejected)) throw Error(ErrorKind::ConfigError, "--out and --rejected name the same file");

  std::vector<std::pair<std::string, std::string>> flags;
  if (a.seed) flags.emplace_back("pipeline.shuffle_seed", std::to_string(*a.seed));
  if (a.parallelism) flags.emplace_back("llm.parallelism", std::to_string(*a.parallelism));
  if (a.model) flags.emplace_back("llm.model", *a.model);
  const Config config = layered_config(g, flags);
  const PipelineConfig pipeline = pipeline_config(config);
  Gateway gateway(gateway_config(config, api_key()));

  const auto input = load_qa_file(a.in);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_pipeline(input, pipeline, gateway);
  save_dataset(out, result.accepted);
  write_text_file(rejected, rejections_jsonl(result.rejected));

  std::map<std::string, int> by_stage;
  for (const auto& r : result.rejected) ++by_stage[std::string(to_string(r.stage))];
  std::string stages;
  for (const auto& [stage, n] : by_stage) stages += " rejected_" + stage + "=" + std::to_string(n);
  spdlog::info("augment done input={} accepted={} rejected={}{} http_requests={} cache_hits={} seconds={:.2f}",
               input.size(), result.accepted.size(), result.rejected.size(), stages, gateway.http_requests(),
               gateway.cache_hits(), seconds_since(start));
  spdlog::info("augment distractor_length_ratio={:.3f}", result.stats.distractor_length_ratio);
  return kExitOk;
}

struct SplitArgs {
  std::string in, out_dir;
  double ratio = 0.5;
  std::int64_t seed = 0;
};

template <typename Item>
void write_split(const std::vector<Item>& items, const SplitArgs& a) {
  const auto split = stratified_split(items, a.ratio, a.seed);
  std::map<std::string, const Item*> by_id;
  for (const auto& item : items) by_id[item.id] = &item;
  auto subset = [&](const std::vector<std::string>& ids) {
    std::vector<Item> out;
    for (const auto& id : ids) out.push_back(*by_id.at(id));
    return out;
  };
  const fs::path dir = a.out_dir;
  save_dataset(dir / "half_a.jsonl", subset(split.half_a));
  save_dataset(dir / "half_b.jsonl", subset(split.half_b));
  write_text_file(dir / "split.json", canonical_line(to_json(split)) + "\n");
  spdlog::info("split done in={} half_a={} half_b={} ratio={} seed={}", a.in, split.half_a.size(),
               split.half_b.size(), a.ratio, a.seed);
}

int run_split(const SplitArgs& a) {
  const fs::path dir = a.out_dir;
  refuse_overwrite(a.in, dir / "half_a.jsonl");
  refuse_overwrite(a.in, dir / "half_b.jsonl");
  const std::string contents = read_text_file(a.in);
  const auto lines = parse_jsonl(contents, a.in);
  const bool is_mcq = !lines.empty() && lines.front().value.contains("options");
  if (is_mcq) {
    write_split(load_dataset(contents, a.in, [](const Json& j) { return validate_mcq(j); }), a);
  } else {
    write_split(load_dataset(contents, a.in, [](const Json& j) { return validate_qa(j); }), a);
  }
  return kExitOk;
}

struct EmitArgs {
  std::string in, out;
};

int run_emit_train(const EmitArgs& a) {
  refuse_overwrite(a.in, a.out);
  const auto items = load_mcq_file(a.in);
  emit_train_jsonl(items, a.out);
  spdlog::info("emit-train done in={} out={} examples={}", a.in, a.out, items.size());
  return kExitOk;
}

struct EvaluateArgs {
  std::string in, model, dataset, out;
  std::optional<int> parallelism;
  std::optional<std::string> responses;
};

int run_evaluate(const GlobalOptions& g, const EvaluateArgs& a) {
  const fs::path dir = a.out;
  for (const char* name : {"records.jsonl", "report.json", "report.md"}) {
    refuse_overwrite(a.in, dir / name);
    if (a.responses) refuse_overwrite(*a.responses, dir / name);
  }
  const auto items = load_mcq_file(a.in);
  const auto start = std::chrono::steady_clock::now();
  EvalResult result;
  if (a.responses) {
    result = score_responses(items, read_jsonl(*a.responses), a.model, a.dataset);
  } else {
    std::vector<std::pair<std::string, std::string>> flags;
    if (a.parallelism) flags.emplace_back("llm.parallelism", std::to_string(*a.parallelism));
    const Config config = layered_config(g, flags);
    Gateway gateway(gateway_config(config, api_key()));
    EvalOptions opts;
    opts.model = a.model;
    opts.dataset = a.dataset;
    opts.parallelism = static_cast<int>(config.integer("llm.parallelism"));
    result = evaluate_model(items, gateway, opts);
    spdlog::info("evaluate http_requests={} cache_hits={}", gateway.http_requests(), gateway.cache_hits());
  }
  write_text_file(dir / "records.jsonl", records_jsonl(result.records));
  write_text_file(dir / "report.json", canonical_line(to_json(result.report)) + "\n");
  write_text_file(dir / "report.md", report_markdown(result.report));
  spdlog::info("evaluate done model={} dataset={} items={} correct={} unparsed={} accuracy={} seconds={:.2f}",
               a.model, a.dataset, result.report.n_items, result.report.n_correct, result.report.n_unparsed,
               format_pct(to_hundredths(result.report.accuracy_pct)), seconds_since(start));
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

int run_report(const ReportArgs& a) {
  std::vector<EvalReport> reports;
  for (const auto& path : a.in) {
    refuse_overwrite(path, a.out);
    Json j = Json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::SchemaError, path + ": not a JSON document");
    try {
      reports.push_back(report_from_json(j));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": " + e.what());
    }
  }
  const auto table = compare_models(reports);
  write_text_file(a.out, comparison_markdown(table));
  spdlog::info("report done models={} datasets={} out={}", table.models.size(), table.datasets.size(), a.out);
  return kExitOk;
}

struct ReviewArgs {
  std::string in, out;
  std::size_t n = 100;
  std::int64_t seed = 0;
};

int run_review_sample(const ReviewArgs& a) {
  refuse_overwrite(a.in, a.out);
  const auto items = load_mcq_file(a.in);
  write_review_sheet(a.out, items, a.n, a.seed);
  spdlog::info("review-sample done in={} out={} n={} seed={}", a.in, a.out, a.n, a.seed);
  return kExitOk;
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::ConfigError ? kExitConfig : kExitData; }

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_mt("mcqforge");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"QA to multiple-choice augmentation, splitting, prompt emission and evaluation"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_file, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Override a config key (key=value); repeatable");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate raw QA records and write canonical qa.jsonl");
  ingest_cmd->add_option("--in", ingest.in, "Raw QA JSONL")->required();
  ingest_cmd->add_option("--out", ingest.out, "Canonical qa.jsonl")->required();
  ingest_cmd->add_option("--source-tag", ingest.source_tag, "source_tag for records without one")
      ->capture_default_str();
  ingest_cmd->add_option("--id-prefix", ingest.id_prefix, "Prefix for assigned ids (<prefix>-0001...)")
      ->capture_default_str();

  AugmentArgs augment;
  auto* augment_cmd = app.add_subcommand("augment", "Run the LLM augmentation pipeline");
  augment_cmd->add_option("--in", augment.in, "qa.jsonl")->required();
  augment_cmd->add_option("--out", augment.out, "mcq.jsonl")->required();
  augment_cmd->add_option("--rejected", augment.rejected, "Rejections JSONL (default: rejected.jsonl beside --out)");
  augment_cmd->add_option("--seed", augment.seed, "Option shuffle seed (pipeline.shuffle_seed)");
  augment_cmd->add_option("--parallelism", augment.parallelism, "Requests in flight (llm.parallelism)");
  augment_cmd->add_option("--model", augment.model, "Augmentation model (llm.model)");

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Country-stratified split into half_a.jsonl / half_b.jsonl");
  split_cmd->add_option("--in", split.in, "qa.jsonl or mcq.jsonl")->required();
  split_cmd->add_option("--out-dir", split.out_dir, "Output directory")->required();
  split_cmd->add_option("--ratio", split.ratio, "Share of each stratum in half_a")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

  EmitArgs emit;
  auto* emit_cmd = app.add_subcommand("emit-train", "Render mcq.jsonl as train.jsonl");
  emit_cmd->add_option("--in", emit.in, "mcq.jsonl")->required();
  emit_cmd->add_option("--out", emit.out, "train.jsonl")->required();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Zero-shot MCQ accuracy of a chat model");
  eval_cmd->add_option("--in", evaluate.in, "mcq.jsonl")->required();
  eval_cmd->add_option("--model", evaluate.model, "Model name sent to the endpoint")->required();
  eval_cmd->add_option("--dataset", evaluate.dataset, "Dataset label for the report")->required();
  eval_cmd->add_option("--out", evaluate.out, "Output directory (records.jsonl, report.json, report.md)")
      ->required();
  eval_cmd->add_option("--parallelism", evaluate.parallelism, "Requests in flight (llm.parallelism)");
  eval_cmd->add_option("--responses", evaluate.responses,
                       "Score pre-generated {item_id, raw_response} lines instead of calling an endpoint");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Model x dataset accuracy table from report.json files");
  report_cmd->add_option("--in", report.in, "report.json files")->required();
  report_cmd->add_option("--out", report.out, "Markdown table")->required();

  ReviewArgs review;
  auto* review_cmd = app.add_subcommand("review-sample", "Seeded sample for human review as CSV");
  review_cmd->add_option("--in", review.in, "mcq.jsonl")->required();
  review_cmd->add_option("--out", review.out, "CSV sheet")->required();
  review_cmd->add_option("--n", review.n, "Sample size")->capture_default_str();
  review_cmd->add_option("--seed", review.seed, "Sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    for (const auto* sub : app.get_subcommands()) std::cerr << sub->help() << "\n";
    std::cerr << app.get_formatter()->make_help(&app, app.get_name(), CLI::AppFormatMode::Normal);
    return kExitConfig;
  }
  if (g.verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*augment_cmd) return run_augment(g, augment);
    if (*split_cmd) return run_split(split);
    if (*emit_cmd) return run_emit_train(emit);
    if (*eval_cmd) return run_evaluate(g, evaluate);
    if (*report_cmd) return run_report(report);
    if (*review_cmd) return run_review_sample(review);
  } catch (const ValidationError& e) {
    spdlog::error("validation failed: {}", e.what());
    return kExitData;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("unexpected: {}", e.what());
    return kExitData;
  }
  return kExitConfig;
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/client.hpp"
#include "metaprompt/evaluator.hpp"
#include "metaprompt/template.hpp"

namespace metaprompt::harness {

enum class DatasetKind { math, gsm8k, game24 };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& name);

/// System-prompt presets: no system message at all, or a system message of
/// exactly two blank lines.
enum class SystemPreset { none, two_blank_lines };

std::string to_string(SystemPreset preset);
SystemPreset system_preset_from_string(const std::string& name);

struct RunConfig {
    DatasetKind dataset_kind = DatasetKind::math;
    std::filesystem::path dataset_path;
    std::string template_id;  // empty -> dataset default pairing
    llm::BackendConfig backend;
    SystemPreset system_preset = SystemPreset::none;
    std::string model = "qwen-72b-base";
    double temperature = 0.0;
    int max_tokens = 2048;
    std::vector<std::string> stop = {"----------"};
    std::size_t max_in_flight = 1;
    std::filesystem::path out_dir;  // transcripts.jsonl / report.json / report.md
    std::optional<std::size_t> limit;
    std::vector<std::string> task_ids;  // when non-empty, only these samples run
};

/// math: a directory tree of per-problem JSON files (problem/level/type/
/// solution with a boxed gold); gsm8k: JSONL with "#### <answer>" golds;
/// game24: CSV with a Puzzles column (gold is the target 24).
std::vector<eval::SampleRecord> load_dataset(DatasetKind kind,
                                             const std::filesystem::path& path);

/// The paper pairing: markdown template for MATH, JSON template for GSM8K.
std::string default_template_id(DatasetKind kind);

/// The exact request a run issues for one sample (exposed so replay fixtures
/// can compute fingerprints).
llm::CompletionRequest build_request(const RunConfig& config,
                                     const prompts::MetaPromptTemplate& tpl,
                                     const eval::SampleRecord& record);

struct TranscriptRecord {
    std::string task_id;
    std::string prompt_text;
    std::string response_text;
    eval::ExtractedAnswer extracted;
    eval::Verdict verdict;
    std::string subject;
    std::optional<int> level;
    llm::FinishReason finish_reason = llm::FinishReason::stop;
};

std::string transcript_to_json(const TranscriptRecord& record);
TranscriptRecord transcript_from_json(const std::string& line);
std::vector<TranscriptRecord> load_transcripts(const std::filesystem::path& path);

struct RunResult {
    eval::EvalReport report;
    std::size_t attempted = 0;
    std::size_t backend_failures = 0;
};

/// Instantiates the template per sample, completes through the backend with
/// bounded parallelism, judges each response, appends transcripts (resuming
/// past completed task ids), and persists report.json / report.md.
RunResult run(const RunConfig& config);

struct RunMeta {
    std::string model;
    std::string eval_method = "MP";
    std::string dataset;
};

/// Markdown table plus "Type scores: {...}" / "Level scores: {...}" lines in
/// the experiment-log style; deterministic key order.
std::string report_markdown(const eval::EvalReport& report, const RunMeta& meta);

}  // namespace metaprompt::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/client.hpp"
#include "metaprompt/render.hpp"
#include "metaprompt/template.hpp"

namespace metaprompt::mppt {

/// The prompting-task flavors: revise a prompt for better reasoning, make it
/// concise, or design a prompt from an in-context document.
enum class PromptingTaskKind { revise_for_reasoning, simplify, in_context_design };

std::string to_string(PromptingTaskKind kind);

/// Library id of the meta-meta-prompt template backing each kind.
std::string template_id(PromptingTaskKind kind);

enum class StageRole { proposer, executor };

std::string to_string(StageRole role);

struct PipelineStage {
    StageRole role = StageRole::proposer;
    llm::CompletionRequest request;
    std::string response_text;
    std::optional<prompts::MetaPromptTemplate> parsed;  // proposer stages with a good parse
    std::int64_t timestamp_ms = 0;
};

struct PipelineTrace {
    std::vector<PipelineStage> stages;  // depth proposer stages then one executor
    prompts::TaskInstance task;
    std::string final_output;
};

/// Raised when a proposer response parses in none of json/xml/markdown. The
/// partial trace (stages completed so far, including the failed one) rides
/// along for replay and inspection.
class ProposalUnparseable : public Error {
public:
    explicit ProposalUnparseable(PipelineTrace partial)
        : Error("proposer response could not be parsed as json, xml or markdown"),
          partial_(std::move(partial)) {}
    const PipelineTrace& partial_trace() const { return partial_; }

private:
    PipelineTrace partial_;
};

/// Generation settings applied to every request a pipeline issues.
struct RequestOptions {
    std::string model = "gpt-4";
    double temperature = 0.0;
    int max_tokens = 2048;
    std::vector<std::string> stop;
};

inline constexpr int kMaxRecursionDepth = 4;

/// Wraps an input prompt in the meta-meta-prompt for the given kind, binding
/// it to the template's input-prompt slot.
prompts::RenderedPrompt wrap_prompting_task(PromptingTaskKind kind,
                                            const std::string& input_prompt);

struct ProposalResult {
    prompts::MetaPromptTemplate proposed;
    PipelineStage stage;
};

/// One proposer step: sends the meta-meta-prompt and the task statement, then
/// parses the response as a template (json, then xml, then markdown).
ProposalResult propose_meta_prompt(llm::Backend& backend,
                                   const prompts::RenderedPrompt& meta_meta_prompt,
                                   const prompts::TaskInstance& task,
                                   const RequestOptions& options = {});

/// Runs `depth` proposer stages, each fed the previously generated meta
/// prompt, then one executor stage on the final proposal instantiated with
/// the task. Trace has depth+1 stages on success.
PipelineTrace recursive_solve(llm::Backend& backend,
                              const prompts::RenderedPrompt& meta_meta_prompt,
                              const prompts::TaskInstance& task, int depth,
                              const RequestOptions& options = {});

/// JSONL persistence: one object per stage with role, request messages,
/// response text, parse status and timestamp.
std::string trace_to_jsonl(const PipelineTrace& trace, bool include_timestamps = true);
void save_trace(const PipelineTrace& trace, const std::filesystem::path& path);

}  // namespace metaprompt::mppt

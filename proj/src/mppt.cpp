#include "metaprompt/mppt.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "metaprompt/library.hpp"
#include "metaprompt/parse.hpp"

namespace metaprompt::mppt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

llm::CompletionRequest base_request(const RequestOptions& options) {
    llm::CompletionRequest request;
    request.model = options.model;
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.stop = options.stop;
    return request;
}

std::optional<prompts::MetaPromptTemplate> try_parse_proposal(const std::string& text) {
    using prompts::RenderFormat;
    for (RenderFormat format : {RenderFormat::json, RenderFormat::xml, RenderFormat::markdown}) {
        try {
            return prompts::parse_template(text, format);
        } catch (const Error&) {
            // fall through to the next format
        }
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(PromptingTaskKind kind) {
    switch (kind) {
        case PromptingTaskKind::revise_for_reasoning: return "revise_for_reasoning";
        case PromptingTaskKind::simplify: return "simplify";
        case PromptingTaskKind::in_context_design: return "in_context_design";
    }
    return "revise_for_reasoning";
}

std::string template_id(PromptingTaskKind kind) {
    switch (kind) {
        case PromptingTaskKind::revise_for_reasoning: return "mp-pt-revise";
        case PromptingTaskKind::simplify: return "mp-pt-simplify";
        case PromptingTaskKind::in_context_design: return "mp-pt-icpd";
    }
    return "mp-pt-revise";
}

std::string to_string(StageRole role) {
    return role == StageRole::proposer ? "proposer" : "executor";
}

prompts::RenderedPrompt wrap_prompting_task(PromptingTaskKind kind,
                                            const std::string& input_prompt) {
    if (input_prompt.empty()) throw Error("input prompt must be non-empty");
    prompts::Bindings bindings;
    bindings.bind("input_prompt", input_prompt);
    return prompts::instantiate(prompts::builtin(template_id(kind)), bindings);
}

ProposalResult propose_meta_prompt(llm::Backend& backend,
                                   const prompts::RenderedPrompt& meta_meta_prompt,
                                   const prompts::TaskInstance& task,
                                   const RequestOptions& options) {
    PipelineStage stage;
    stage.role = StageRole::proposer;
    stage.request = base_request(options);
    stage.request.messages.push_back({llm::Role::user, meta_meta_prompt.text});
    stage.request.messages.push_back({llm::Role::user, task.statement});

    llm::CompletionResponse response = backend.complete(stage.request);
    stage.response_text = response.text;
    stage.parsed = try_parse_proposal(response.text);
    stage.timestamp_ms = now_ms();

    if (!stage.parsed) {
        PipelineTrace partial;
        partial.task = task;
        partial.stages.push_back(std::move(stage));
        throw ProposalUnparseable(std::move(partial));
    }
    return {*stage.parsed, stage};
}

PipelineTrace recursive_solve(llm::Backend& backend,
                              const prompts::RenderedPrompt& meta_meta_prompt,
                              const prompts::TaskInstance& task, int depth,
                              const RequestOptions& options) {
    if (depth < 1) throw Error("recursion depth must be >= 1");
    if (depth > kMaxRecursionDepth) {
        throw Error("recursion depth capped at " + std::to_string(kMaxRecursionDepth));
    }

    PipelineTrace trace;
    trace.task = task;
    prompts::RenderedPrompt current = meta_meta_prompt;
    prompts::MetaPromptTemplate proposed;
    for (int level = 0; level < depth; ++level) {
        ProposalResult result;
        try {
            result = propose_meta_prompt(backend, current, task, options);
        } catch (ProposalUnparseable& e) {
            PipelineTrace partial = trace;
            for (auto& stage : e.partial_trace().stages) partial.stages.push_back(stage);
            throw ProposalUnparseable(std::move(partial));
        }
        trace.stages.push_back(std::move(result.stage));
        proposed = std::move(result.proposed);
        if (level + 1 < depth) {
            current.text = prompts::render(proposed, proposed.default_format);
            current.format = proposed.default_format;
            current.bindings.clear();
        }
    }

    // the executor receives the generated meta prompt instantiated with the
    // original task; a proposal without a question slot is an error
    prompts::RenderedPrompt executor_prompt = prompts::instantiate(proposed, task);
    PipelineStage executor;
    executor.role = StageRole::executor;
    executor.request = base_request(options);
    executor.request.messages.push_back({llm::Role::user, executor_prompt.text});
    llm::CompletionResponse response = backend.complete(executor.request);
    executor.response_text = response.text;
    executor.timestamp_ms = now_ms();
    trace.final_output = executor.response_text;
    trace.stages.push_back(std::move(executor));
    return trace;
}

std::string trace_to_jsonl(const PipelineTrace& trace, bool include_timestamps) {
    std::string out;
    for (const auto& stage : trace.stages) {
        ordered_json j;
        j["role"] = to_string(stage.role);
        ordered_json request;
        request["model"] = stage.request.model;
        request["temperature"] = stage.request.temperature;
        request["max_tokens"] = stage.request.max_tokens;
        request["stop"] = stage.request.stop;
        request["messages"] = ordered_json::array();
        for (const auto& message : stage.request.messages) {
            ordered_json jm;
            jm["role"] = llm::to_string(message.role);
            jm["content"] = message.content;
            request["messages"].push_back(std::move(jm));
        }
        j["request"] = std::move(request);
        j["response_text"] = stage.response_text;
        if (stage.role == StageRole::proposer) {
            j["parse_status"] = stage.parsed ? "ok" : "failed";
        } else {
            j["parse_status"] = "n/a";
        }
        if (include_timestamps) j["timestamp_ms"] = stage.timestamp_ms;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_trace(const PipelineTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path.string());
    out << trace_to_jsonl(trace);
}

}  // namespace metaprompt::mppt

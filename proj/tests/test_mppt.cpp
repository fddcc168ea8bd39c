#include <doctest.h>

#include <filesystem>

#include <fstream>

#include "metaprompt/library.hpp"
#include "metaprompt/mppt.hpp"
#include "metaprompt/parse.hpp"
#include "metaprompt/transform.hpp"

using namespace metaprompt;
using namespace metaprompt::mppt;

namespace {

namespace fs = std::filesystem;

/// In-memory backend replaying a fixed response sequence.
class SequenceBackend : public llm::Backend {
public:
    explicit SequenceBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
        llm::validate(request);
        requests.push_back(request);
        if (next_ >= responses_.size()) throw Error("sequence backend exhausted");
        llm::CompletionResponse response;
        response.text = responses_[next_++];
        return response;
    }

    std::vector<llm::CompletionRequest> requests;

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

prompts::TaskInstance demo_task() {
    prompts::TaskInstance task;
    task.id = "demo";
    task.statement = "What is 2+2?";
    return task;
}

std::string math_json_text() {
    return prompts::render(prompts::builtin("math-json"), prompts::RenderFormat::json);
}

}  // namespace

TEST_CASE("wrap_prompting_task binds the input prompt into each template") {
    auto revise = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    CHECK(revise.text.find("Integrate complex problem-solving elements.") != std::string::npos);
    CHECK(revise.text.find("Solve 2+2") != std::string::npos);
    CHECK(revise.text.find("[input prompt]") == std::string::npos);

    auto simplify = wrap_prompting_task(PromptingTaskKind::simplify, "P");
    CHECK(simplify.text.find("Transform the original prompt into a more concise version") !=
          std::string::npos);

    auto design = wrap_prompting_task(PromptingTaskKind::in_context_design, "P");
    CHECK(design.text.find("Document Analysis:") != std::string::npos);
}

TEST_CASE("propose parses a meta prompt out of the model response") {
    SequenceBackend backend({math_json_text()});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve it");
    ProposalResult result = propose_meta_prompt(backend, meta_meta, demo_task());
    CHECK(prompts::semantically_equal(result.proposed, prompts::builtin("math-json")));
    CHECK(result.stage.role == StageRole::proposer);
    REQUIRE(backend.requests.size() == 1);
    REQUIRE(backend.requests[0].messages.size() == 2);
    CHECK(backend.requests[0].messages[0].content == meta_meta.text);
    CHECK(backend.requests[0].messages[1].content == "What is 2+2?");
}

TEST_CASE("propose surfaces garbage as ProposalUnparseable with the stage recorded") {
    SequenceBackend backend({"garbage {{{"});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::simplify, "Solve it");
    try {
        propose_meta_prompt(backend, meta_meta, demo_task());
        FAIL("expected ProposalUnparseable");
    } catch (const ProposalUnparseable& e) {
        REQUIRE(e.partial_trace().stages.size() == 1);
        CHECK(!e.partial_trace().stages[0].parsed.has_value());
        CHECK(e.partial_trace().stages[0].response_text == "garbage {{{");
    }
}

TEST_CASE("propose accepts the MP-CR XML agent prompt") {
    std::string xml = prompts::render(prompts::builtin("mp-cr-xml"), prompts::RenderFormat::xml);
    SequenceBackend backend({xml});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::in_context_design, "paper");
    ProposalResult result = propose_meta_prompt(backend, meta_meta, demo_task());
    std::string rendered = prompts::render(result.proposed, prompts::RenderFormat::xml);
    CHECK(rendered.find("Generate useful hints for solving the problem.") != std::string::npos);
}

TEST_CASE("depth-1 pipeline produces a two-stage trace") {
    SequenceBackend backend({math_json_text(), "The answer is $\\boxed{4}$."});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    PipelineTrace trace = recursive_solve(backend, meta_meta, demo_task(), 1);
    REQUIRE(trace.stages.size() == 2);
    CHECK(trace.stages[0].role == StageRole::proposer);
    CHECK(trace.stages[1].role == StageRole::executor);
    CHECK(trace.final_output.find("\\boxed{4}") != std::string::npos);
    // the executor receives the proposed template instantiated with the task
    CHECK(trace.stages[1].request.messages[0].content.find("What is 2+2?") != std::string::npos);
}

TEST_CASE("depth-2 pipeline issues exactly three requests") {
    SequenceBackend backend({math_json_text(), math_json_text(), "done"});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    PipelineTrace trace = recursive_solve(backend, meta_meta, demo_task(), 2);
    CHECK(trace.stages.size() == 3);
    CHECK(backend.requests.size() == 3);
}

TEST_CASE("unparseable proposal aborts with the partial trace") {
    SequenceBackend backend({"garbage {{{"});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    try {
        recursive_solve(backend, meta_meta, demo_task(), 1);
        FAIL("expected ProposalUnparseable");
    } catch (const ProposalUnparseable& e) {
        CHECK(e.partial_trace().stages.size() == 1);
    }
}

TEST_CASE("depth is validated and capped") {
    SequenceBackend backend({});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::simplify, "P");
    CHECK_THROWS_AS(recursive_solve(backend, meta_meta, demo_task(), 0), Error);
    CHECK_THROWS_AS(recursive_solve(backend, meta_meta, demo_task(), kMaxRecursionDepth + 1),
                    Error);
}

TEST_CASE("scripted pipelines are pure: identical inputs give identical traces") {
    auto run_once = [] {
        SequenceBackend backend(
            {math_json_text(), "The answer is $\\boxed{4}$."});
        auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
        return trace_to_jsonl(recursive_solve(backend, meta_meta, demo_task(), 1),
                              /*include_timestamps=*/false);
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("wrapping the meta-meta template with identity changes no request bytes") {
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    prompts::MetaPromptTemplate tpl = prompts::builtin("mp-pt-revise");
    prompts::MetaPromptTemplate same = prompts::identity().effect(tpl);
    prompts::Bindings bindings;
    bindings.bind("input_prompt", "Solve 2+2");
    CHECK(prompts::instantiate(same, bindings).text == meta_meta.text);
}

TEST_CASE("traces persist one JSONL object per stage") {
    SequenceBackend backend({math_json_text(), "The answer is $\\boxed{4}$."});
    auto meta_meta = wrap_prompting_task(PromptingTaskKind::revise_for_reasoning, "Solve 2+2");
    PipelineTrace trace = recursive_solve(backend, meta_meta, demo_task(), 1);
    fs::path path = fs::temp_directory_path() / "metaprompt-trace-test.jsonl";
    save_trace(trace, path);
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == trace.stages.size());
    fs::remove(path);
}

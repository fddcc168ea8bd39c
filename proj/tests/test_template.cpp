#include <doctest.h>

#include "metaprompt/library.hpp"
#include "metaprompt/parse.hpp"
#include "metaprompt/render.hpp"

using namespace metaprompt;
using namespace metaprompt::prompts;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("math-markdown renders the figure's key lines") {
    std::string text = render(builtin("math-markdown"), RenderFormat::markdown);
    CHECK(contains(text, "**Problem Statement**:"));
    CHECK(contains(text, "Begin the response with \"Let's think step by step.\""));
    CHECK(contains(text, "- **Problem**: [question to be answered]"));
    CHECK(text.ends_with("----------"));
}

TEST_CASE("math-json renders section keys and the boxed marker") {
    std::string text = render(builtin("math-json"), RenderFormat::json);
    CHECK(contains(text, "\"Problem\""));
    CHECK(contains(text, "\"Solution\""));
    CHECK(contains(text, "\"Final Answer\""));
    CHECK(contains(text, "$\\boxed{...}$"));
    CHECK(text.ends_with("----------"));
}

TEST_CASE("empty template renders to empty markdown") {
    MetaPromptTemplate tpl;
    CHECK(render(tpl, RenderFormat::markdown) == "");
}

TEST_CASE("render is deterministic") {
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        for (auto format : {RenderFormat::markdown, RenderFormat::json, RenderFormat::xml}) {
            CHECK(render(tpl, format) == render(tpl, format));
        }
    }
}

TEST_CASE("instantiate substitutes the question statement verbatim") {
    TaskInstance task;
    task.statement = "Find the domain of the expression $\\frac{\\sqrt{x-2}}{\\sqrt{5-x}}$.";
    RenderedPrompt prompt = instantiate(builtin("math-markdown"), task);
    CHECK(contains(prompt.text, "- **Problem**: " + task.statement));
    CHECK(!contains(prompt.text, "[question to be answered]"));
    CHECK(prompt.bindings.at("question") == task.statement);
}

TEST_CASE("instantiate without a question slot raises MissingSlot") {
    TaskInstance task;
    task.statement = "anything";
    CHECK_THROWS_AS(instantiate(builtin("system-generic"), task), MissingSlot);
}

TEST_CASE("quadratic keeps its worked structure when instantiated") {
    TaskInstance task;
    task.statement = "Solve $3x^2+4x-5=0$";
    RenderedPrompt prompt = instantiate(builtin("quadratic"), task);
    CHECK(contains(prompt.text, "Compute the discriminant using $\\Delta = b^2 - 4ac$."));
    CHECK(contains(prompt.text, "\"Problem\": \"Solve $3x^2+4x-5=0$\""));
}

TEST_CASE("binding the same slot twice raises AlreadyBound") {
    Bindings bindings;
    bindings.bind("question", "x");
    CHECK_THROWS_AS(bindings.bind("question", "y"), AlreadyBound);
}

TEST_CASE("parse round-trip re-renders byte-identically on every builtin") {
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        CAPTURE(id);
        for (auto format : {RenderFormat::markdown, RenderFormat::json, RenderFormat::xml}) {
            std::string text = render(tpl, format);
            MetaPromptTemplate reparsed = parse_template(text, format);
            CHECK(render(reparsed, format) == text);
        }
    }
}

TEST_CASE("json round-trip of math-json recovers the template itself") {
    MetaPromptTemplate tpl = builtin("math-json");
    MetaPromptTemplate reparsed =
        parse_template(render(tpl, RenderFormat::json), RenderFormat::json);
    CHECK(semantically_equal(tpl, reparsed));
}

TEST_CASE("parse_template rejects malformed input") {
    CHECK_THROWS_AS(parse_template("{not closed", RenderFormat::json), ParseError);
    CHECK_THROWS_AS(parse_template("garbage {{{", RenderFormat::xml), ParseError);
    CHECK_THROWS_AS(parse_template("garbage {{{", RenderFormat::markdown), ParseError);
}

TEST_CASE("xml parse recovers the system-instructions section") {
    MetaPromptTemplate tpl = builtin("mp-cr-xml");
    MetaPromptTemplate reparsed =
        parse_template(render(tpl, RenderFormat::xml), RenderFormat::xml);
    REQUIRE(!reparsed.sections.empty());
    CHECK(reparsed.sections[0].role == SectionRole::system_instructions);
    CHECK(contains(render(reparsed, RenderFormat::xml), "Automatically configure solutions"));
}

TEST_CASE("unknown heading parses to a custom section") {
    std::string text = "**Weird Heading**:\nbody line";
    MetaPromptTemplate tpl = parse_template(text, RenderFormat::markdown);
    REQUIRE(tpl.sections.size() == 1);
    CHECK(tpl.sections[0].role == SectionRole::custom);
    CHECK(tpl.sections[0].heading == "Weird Heading");
}

TEST_CASE("unknown builtin id raises UnknownTemplate") {
    CHECK_THROWS_AS(builtin("nope"), UnknownTemplate);
}

TEST_CASE("builtin library validates and carries the expected slots") {
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        CHECK_NOTHROW(validate(tpl));
    }
    CHECK(builtin("math-markdown").slots.at("question") == "question to be answered");
    CHECK(builtin("mp-cr-markdown").slots.at("question") == "problem");
    CHECK(builtin("mp-pt-revise").slots.at("input_prompt") == "input prompt");
    CHECK(builtin("system-generic").slots.empty());
}

TEST_CASE("system-generic opens as the figure does") {
    std::string text = render(builtin("system-generic"), RenderFormat::markdown);
    CHECK(contains(text, "You are ChatGPT, a highly advanced large language model"));
}

TEST_CASE("mp-cr-markdown carries the intermediate question scaffold") {
    std::string text = render(builtin("mp-cr-markdown"), RenderFormat::markdown);
    CHECK(contains(text, "#### Question 1: [the first question you raised]"));
}

TEST_CASE("template manifests round-trip through the on-disk format") {
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        MetaPromptTemplate loaded = template_from_manifest(template_to_manifest(tpl));
        CHECK(loaded == tpl);
    }
}

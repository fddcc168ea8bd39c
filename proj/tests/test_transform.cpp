#include <doctest.h>

#include <random>

#include "metaprompt/library.hpp"
#include "metaprompt/render.hpp"
#include "metaprompt/transform.hpp"

using namespace metaprompt::prompts;

namespace {

constexpr RenderFormat kFormats[] = {RenderFormat::markdown, RenderFormat::json,
                                     RenderFormat::xml};

bool renders_equal(const MetaPromptTemplate& a, const MetaPromptTemplate& b) {
    for (auto format : kFormats) {
        if (render(a, format) != render(b, format)) return false;
    }
    return true;
}

/// Draws one transform from the closed test set.
PromptTransform random_transform(std::mt19937& rng) {
    switch (rng() % 5) {
        case 0: {
            const char* hints[] = {"Check the units.", "Consider edge cases.",
                                   "Try a small example first."};
            return add_hints_section(hints[rng() % 3]);
        }
        case 1: {
            const SectionRole roles[] = {SectionRole::hints, SectionRole::final_solution,
                                         SectionRole::solution_structure};
            return remove_section(roles[rng() % 3]);
        }
        case 2: {
            const char* titles[] = {"Revised meta prompt", "v2", ""};
            return rename_title(titles[rng() % 3]);
        }
        case 3:
            return set_format(kFormats[rng() % 3]);
        default: {
            const char* descriptions[] = {"problem to solve", "the question",
                                          "question to be answered"};
            return rewrite_slot_description("question", descriptions[rng() % 3]);
        }
    }
}

}  // namespace

TEST_CASE("identity leaves every builtin unchanged in all formats") {
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        CHECK(renders_equal(identity().effect(tpl), tpl));
    }
}

TEST_CASE("identity on the empty template") {
    MetaPromptTemplate empty;
    CHECK(identity().effect(empty) == empty);
}

TEST_CASE("left and right identity composition") {
    PromptTransform f = add_hints_section("Check the units.");
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        CHECK(renders_equal(compose(identity(), f).effect(tpl), f.effect(tpl)));
        CHECK(renders_equal(compose(f, identity()).effect(tpl), f.effect(tpl)));
    }
}

TEST_CASE("compose applies left-to-right and names concatenate") {
    PromptTransform f = rename_title("first");
    PromptTransform g = rename_title("second");
    CHECK(compose(f, g).name == "rename-title;rename-title");
    MetaPromptTemplate tpl = builtin("math-markdown");
    CHECK(compose(f, g).effect(tpl).title == "second");
    CHECK(compose(g, f).effect(tpl).title == "first");
}

TEST_CASE("composition and associativity laws hold for random transform triples") {
    std::mt19937 rng(20240217);
    for (int trial = 0; trial < 200; ++trial) {
        PromptTransform f = random_transform(rng);
        PromptTransform g = random_transform(rng);
        PromptTransform h = random_transform(rng);
        for (const auto& id : builtin_ids()) {
            MetaPromptTemplate tpl = builtin(id);
            CHECK(renders_equal(compose(f, g).effect(tpl), g.effect(f.effect(tpl))));
            CHECK(renders_equal(compose(compose(f, g), h).effect(tpl),
                                compose(f, compose(g, h)).effect(tpl)));
        }
    }
}

TEST_CASE("the add-hints/set-format/rename-title triple associates over the library") {
    PromptTransform f = add_hints_section("Check the units.");
    PromptTransform g = set_format(RenderFormat::json);
    PromptTransform h = rename_title("renamed");
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        CHECK(renders_equal(compose(compose(f, g), h).effect(tpl),
                            compose(f, compose(g, h)).effect(tpl)));
    }
}

TEST_CASE("identity is stable across randomly slot-renamed templates") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        MetaPromptTemplate tpl = builtin(builtin_ids()[rng() % builtin_ids().size()]);
        std::string description = "slot description " + std::to_string(rng() % 1000);
        MetaPromptTemplate renamed = rewrite_slot_description("question", description).effect(tpl);
        CHECK(identity().effect(renamed) == renamed);
    }
}

TEST_CASE("rewrite-slot-description rewrites markers consistently") {
    MetaPromptTemplate tpl =
        rewrite_slot_description("question", "the question").effect(builtin("math-markdown"));
    std::string text = render(tpl, RenderFormat::markdown);
    CHECK(text.find("[the question]") != std::string::npos);
    CHECK(text.find("[question to be answered]") == std::string::npos);
    CHECK_NOTHROW(validate(tpl));
}

#include "metaprompt/template.hpp"

#include <array>

namespace metaprompt::prompts {

std::string to_string(RenderFormat format) {
    switch (format) {
        case RenderFormat::markdown: return "markdown";
        case RenderFormat::json: return "json";
        case RenderFormat::xml: return "xml";
    }
    return "markdown";
}

RenderFormat format_from_string(const std::string& name) {
    if (name == "markdown") return RenderFormat::markdown;
    if (name == "json") return RenderFormat::json;
    if (name == "xml") return RenderFormat::xml;
    throw Error("unknown render format: " + name);
}

std::string to_string(SectionRole role) {
    switch (role) {
        case SectionRole::problem_statement: return "problem_statement";
        case SectionRole::solution_structure: return "solution_structure";
        case SectionRole::system_instructions: return "system_instructions";
        case SectionRole::hints: return "hints";
        case SectionRole::intermediate_steps: return "intermediate_steps";
        case SectionRole::final_solution: return "final_solution";
        case SectionRole::custom: return "custom";
    }
    return "custom";
}

SectionRole role_from_string(const std::string& name) {
    if (name == "problem_statement") return SectionRole::problem_statement;
    if (name == "solution_structure") return SectionRole::solution_structure;
    if (name == "system_instructions") return SectionRole::system_instructions;
    if (name == "hints") return SectionRole::hints;
    if (name == "intermediate_steps") return SectionRole::intermediate_steps;
    if (name == "final_solution") return SectionRole::final_solution;
    if (name == "custom") return SectionRole::custom;
    throw Error("unknown section role: " + name);
}

SectionRole role_from_heading(const std::string& heading) {
    struct Mapping {
        const char* heading;
        SectionRole role;
    };
    static constexpr std::array<Mapping, 12> kMap{{
        {"Problem Statement", SectionRole::problem_statement},
        {"Problem", SectionRole::problem_statement},
        {"Solution Structure", SectionRole::solution_structure},
        {"Solution", SectionRole::solution_structure},
        {"Solution Approach", SectionRole::solution_structure},
        {"System Instructions", SectionRole::system_instructions},
        {"system", SectionRole::system_instructions},
        {"Hints", SectionRole::hints},
        {"hints", SectionRole::hints},
        {"Intermediate Steps", SectionRole::intermediate_steps},
        {"Final Answer", SectionRole::final_solution},
        {"Final Solution", SectionRole::final_solution},
    }};
    for (const auto& m : kMap) {
        if (heading == m.heading) return m.role;
    }
    return SectionRole::custom;
}

std::string to_string(ListStyle style) {
    switch (style) {
        case ListStyle::plain: return "plain";
        case ListStyle::bullet: return "bullet";
        case ListStyle::numbered: return "numbered";
    }
    return "plain";
}

ListStyle style_from_string(const std::string& name) {
    if (name == "plain") return ListStyle::plain;
    if (name == "bullet") return ListStyle::bullet;
    if (name == "numbered") return ListStyle::numbered;
    throw Error("unknown list style: " + name);
}

bool semantically_equal(const MetaPromptTemplate& a, const MetaPromptTemplate& b) {
    return a.title == b.title && a.sections == b.sections && a.slots == b.slots &&
           a.default_format == b.default_format && a.trailing_delimiter == b.trailing_delimiter;
}

void validate(const MetaPromptTemplate& tpl) {
    std::map<std::string, bool> referenced;
    for (const auto& [name, desc] : tpl.slots) {
        if (name.empty()) throw Error("template \"" + tpl.id + "\": empty slot name");
        referenced[name] = false;
    }
    for (const auto& section : tpl.sections) {
        if (section.role != SectionRole::custom && section.heading.empty()) {
            throw Error("template \"" + tpl.id + "\": non-custom section without heading");
        }
        for (const auto& line : section.lines) {
            if (line.slot.empty()) continue;
            auto it = referenced.find(line.slot);
            if (it == referenced.end()) {
                throw Error("template \"" + tpl.id + "\": line references undeclared slot \"" +
                            line.slot + "\"");
            }
            it->second = true;
        }
    }
    for (const auto& [name, seen] : referenced) {
        if (!seen) {
            throw Error("template \"" + tpl.id + "\": slot \"" + name +
                        "\" is not referenced by any section");
        }
    }
}

}  // namespace metaprompt::prompts

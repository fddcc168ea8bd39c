#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/errors.hpp"

namespace metaprompt::prompts {

enum class RenderFormat { markdown, json, xml };

std::string to_string(RenderFormat format);
RenderFormat format_from_string(const std::string& name);

enum class SectionRole {
    problem_statement,
    solution_structure,
    system_instructions,
    hints,
    intermediate_steps,
    final_solution,
    custom,
};

std::string to_string(SectionRole role);
SectionRole role_from_string(const std::string& name);

/// Maps a section heading (or XML tag / JSON key) onto a role; unknown headings are custom.
SectionRole role_from_heading(const std::string& heading);

/// How a section's lines are prefixed in the markdown rendering.
enum class ListStyle { plain, bullet, numbered };

std::string to_string(ListStyle style);
ListStyle style_from_string(const std::string& name);

/// One line of a section body. The text is literal except for slot markers:
/// when `slot` is set, the bracketed description of that slot marks the spot
/// where a binding is substituted. If the marker does not occur in the text,
/// the whole line is the slot's default content and is replaced wholesale.
struct SectionLine {
    std::string text;
    std::string label;  // sub-key in structured renderings, e.g. "Step 1"
    std::string slot;   // slot name this line references, empty if none

    friend bool operator==(const SectionLine&, const SectionLine&) = default;
};

struct TemplateSection {
    SectionRole role = SectionRole::custom;
    std::string heading;  // may be empty only for custom sections
    ListStyle style = ListStyle::plain;
    std::vector<SectionLine> lines;

    friend bool operator==(const TemplateSection&, const TemplateSection&) = default;
};

/// An example-agnostic structured prompt: ordered sections plus a slot table.
struct MetaPromptTemplate {
    std::string id;
    std::string title;  // rendered as a preamble line when non-empty
    std::vector<TemplateSection> sections;
    std::map<std::string, std::string> slots;  // slot name -> bracketed description
    RenderFormat default_format = RenderFormat::markdown;
    bool trailing_delimiter = false;  // whether renders end with the "----------" line

    friend bool operator==(const MetaPromptTemplate&, const MetaPromptTemplate&) = default;
};

/// Equality that ignores the library id (templates recovered by parsing carry none).
bool semantically_equal(const MetaPromptTemplate& a, const MetaPromptTemplate& b);

/// Checks structural invariants: unique slot names are guaranteed by the map,
/// every declared slot referenced by some line, every line slot declared,
/// non-custom sections carry a heading. Throws Error on violation.
void validate(const MetaPromptTemplate& tpl);

struct TaskInstance {
    std::string id;
    std::string statement;
    std::string subject;        // e.g. "Algebra"; empty when unlabeled
    std::optional<int> level;   // 1..5 when present
    std::string gold_answer;    // empty when unknown
};

struct RenderedPrompt {
    std::string text;
    RenderFormat format = RenderFormat::markdown;
    std::map<std::string, std::string> bindings;
};

/// Slot-name -> value collection that rejects double binding.
class Bindings {
public:
    void bind(const std::string& slot, std::string value) {
        if (values_.count(slot)) throw AlreadyBound(slot);
        values_.emplace(slot, std::move(value));
    }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace metaprompt::prompts

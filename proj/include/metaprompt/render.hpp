#pragma once

#include <string>
#include <string_view>

#include "metaprompt/template.hpp"

namespace metaprompt::prompts {

/// Separator line ending every delimiter-bearing prompt; also the default
/// stop sequence for base-model runs.
inline constexpr std::string_view kDelimiter = "----------";

/// Deterministic text rendering. Unfilled slots keep their bracketed
/// placeholders (or their default line text).
std::string render(const MetaPromptTemplate& tpl, RenderFormat format);

/// Renders with the given bindings substituted for slot markers.
std::string render_bound(const MetaPromptTemplate& tpl, RenderFormat format,
                         const std::map<std::string, std::string>& bindings);

/// Binds the task statement to the template's "question" slot and renders in
/// the default format. Throws MissingSlot when no "question" slot is declared.
RenderedPrompt instantiate(const MetaPromptTemplate& tpl, const TaskInstance& task);

/// General instantiation: every binding must name a declared slot.
RenderedPrompt instantiate(const MetaPromptTemplate& tpl, const Bindings& bindings);

}  // namespace metaprompt::prompts

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "metaprompt/template.hpp"

namespace metaprompt::prompts {

/// A named, pure template -> template mapping; the morphism of the prompt
/// category. Composition and identity obey the functor laws (checked by the
/// property suite over the closed transform set below).
struct PromptTransform {
    std::string name;
    std::function<MetaPromptTemplate(const MetaPromptTemplate&)> effect;
};

PromptTransform identity();

/// compose(f, g) applies f first, then g; name is "f;g".
PromptTransform compose(const PromptTransform& f, const PromptTransform& g);

// The closed transform set used by the law tests. All are total on
// well-formed templates: a transform that finds nothing to change is a no-op.
PromptTransform add_hints_section(std::string hint_line);
PromptTransform remove_section(SectionRole role);
PromptTransform rename_title(std::string new_title);
PromptTransform set_format(RenderFormat format);
PromptTransform rewrite_slot_description(std::string slot, std::string new_description);

}  // namespace metaprompt::prompts

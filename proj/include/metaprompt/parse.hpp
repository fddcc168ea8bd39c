#pragma once

#include <string>

#include "metaprompt/template.hpp"

namespace metaprompt::prompts {

/// Recovers a template from rendered text. Guarantees that re-rendering the
/// parsed template in the same format reproduces the input byte-for-byte for
/// text produced by render(). Throws ParseError on malformed input; headings
/// without a known role map to custom.
MetaPromptTemplate parse_template(const std::string& text, RenderFormat format);

}  // namespace metaprompt::prompts

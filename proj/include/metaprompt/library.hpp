#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metaprompt/template.hpp"

namespace metaprompt::prompts {

/// Ids of the canonical template library, in a stable order.
const std::vector<std::string>& builtin_ids();

/// Returns the canonical template for the id; throws UnknownTemplate.
MetaPromptTemplate builtin(const std::string& id);

// On-disk manifest format: one JSON file per template carrying id, title,
// default_format, trailing_delimiter, the slot table and the section bodies.
std::string template_to_manifest(const MetaPromptTemplate& tpl);
MetaPromptTemplate template_from_manifest(const std::string& json_text);

MetaPromptTemplate load_template_file(const std::filesystem::path& path);
void save_template_file(const MetaPromptTemplate& tpl, const std::filesystem::path& path);

}  // namespace metaprompt::prompts

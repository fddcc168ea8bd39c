#include "metaprompt/transform.hpp"

namespace metaprompt::prompts {

namespace {

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    if (from.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

PromptTransform identity() {
    return {"identity", [](const MetaPromptTemplate& tpl) { return tpl; }};
}

PromptTransform compose(const PromptTransform& f, const PromptTransform& g) {
    auto fe = f.effect;
    auto ge = g.effect;
    return {f.name + ";" + g.name,
            [fe, ge](const MetaPromptTemplate& tpl) { return ge(fe(tpl)); }};
}

PromptTransform add_hints_section(std::string hint_line) {
    return {"add-hints-section",
            [hint_line = std::move(hint_line)](const MetaPromptTemplate& tpl) {
                MetaPromptTemplate out = tpl;
                TemplateSection hints;
                hints.role = SectionRole::hints;
                hints.heading = "Hints";
                hints.style = ListStyle::bullet;
                hints.lines.push_back({hint_line, "", ""});
                out.sections.push_back(std::move(hints));
                return out;
            }};
}

PromptTransform remove_section(SectionRole role) {
    return {"remove-section(" + to_string(role) + ")",
            [role](const MetaPromptTemplate& tpl) {
                MetaPromptTemplate out = tpl;
                std::erase_if(out.sections,
                              [role](const TemplateSection& s) { return s.role == role; });
                return out;
            }};
}

PromptTransform rename_title(std::string new_title) {
    return {"rename-title",
            [new_title = std::move(new_title)](const MetaPromptTemplate& tpl) {
                MetaPromptTemplate out = tpl;
                out.title = new_title;
                return out;
            }};
}

PromptTransform set_format(RenderFormat format) {
    return {"set-format(" + to_string(format) + ")",
            [format](const MetaPromptTemplate& tpl) {
                MetaPromptTemplate out = tpl;
                out.default_format = format;
                return out;
            }};
}

PromptTransform rewrite_slot_description(std::string slot, std::string new_description) {
    return {"rewrite-slot-description(" + slot + ")",
            [slot = std::move(slot), new_description = std::move(new_description)](
                const MetaPromptTemplate& tpl) {
                auto it = tpl.slots.find(slot);
                if (it == tpl.slots.end() || it->second == new_description) return tpl;
                MetaPromptTemplate out = tpl;
                const std::string old_marker = "[" + it->second + "]";
                const std::string new_marker = "[" + new_description + "]";
                for (auto& section : out.sections) {
                    for (auto& line : section.lines) {
                        line.text = replace_all(line.text, old_marker, new_marker);
                    }
                }
                out.slots[slot] = new_description;
                return out;
            }};
}

}  // namespace metaprompt::prompts

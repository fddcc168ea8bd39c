#include "metaprompt/render.hpp"

#include <cctype>
#include <sstream>

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

std::string tag_slug(const std::string& heading) {
    std::string out;
    out.reserve(heading.size());
    for (char c : heading) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            out += '_';
        }
    }
    return out;
}

/// Applies slot bindings to one line. A line whose text contains the slot's
/// bracketed marker gets the marker replaced; a line whose text is the slot's
/// default content is replaced wholesale.
std::string bound_text(const SectionLine& line, const MetaPromptTemplate& tpl,
                       const std::map<std::string, std::string>& bindings) {
    if (line.slot.empty()) return line.text;
    auto bound = bindings.find(line.slot);
    if (bound == bindings.end()) return line.text;
    auto desc = tpl.slots.find(line.slot);
    if (desc != tpl.slots.end()) {
        const std::string marker = "[" + desc->second + "]";
        if (line.text.find(marker) != std::string::npos) {
            return replace_all(line.text, marker, bound->second);
        }
    }
    return bound->second;
}

std::string section_key(const TemplateSection& section) {
    return section.heading.empty() ? to_string(section.role) : section.heading;
}

std::string line_key(const TemplateSection& section, std::size_t index) {
    const auto& line = section.lines[index];
    if (!line.label.empty()) return line.label;
    const char* base = section.style == ListStyle::numbered ? "Step " : "Item ";
    return base + std::to_string(index + 1);
}

void append_delimiter(std::vector<std::string>& lines) {
    if (!lines.empty()) lines.emplace_back();
    lines.emplace_back(kDelimiter);
}

std::vector<std::string> render_markdown(const MetaPromptTemplate& tpl,
                                         const std::map<std::string, std::string>& bindings) {
    std::vector<std::string> out;
    if (!tpl.title.empty()) {
        out.push_back(tpl.title);
        out.emplace_back();
    }
    bool first = true;
    for (const auto& section : tpl.sections) {
        if (!first) out.emplace_back();
        first = false;
        if (!section.heading.empty()) out.push_back("**" + section.heading + "**:");
        std::size_t n = 0;
        for (const auto& line : section.lines) {
            ++n;
            std::string rendered;
            if (section.style == ListStyle::numbered) {
                rendered += std::to_string(n) + ". ";
            } else if (section.style == ListStyle::bullet) {
                rendered += "- ";
            }
            if (!line.label.empty()) rendered += "**" + line.label + "**: ";
            rendered += bound_text(line, tpl, bindings);
            out.push_back(std::move(rendered));
        }
    }
    return out;
}

std::vector<std::string> render_json(const MetaPromptTemplate& tpl,
                                     const std::map<std::string, std::string>& bindings) {
    std::vector<std::string> out;
    if (!tpl.title.empty()) {
        out.push_back(tpl.title);
        out.emplace_back();
    }
    out.emplace_back("{");
    for (std::size_t i = 0; i < tpl.sections.size(); ++i) {
        const auto& section = tpl.sections[i];
        const std::string comma = i + 1 < tpl.sections.size() ? "," : "";
        const bool scalar = section.lines.size() <= 1 &&
                            (section.lines.empty() || section.lines[0].label.empty());
        if (scalar) {
            const std::string value =
                section.lines.empty() ? "" : bound_text(section.lines[0], tpl, bindings);
            out.push_back("    \"" + section_key(section) + "\": \"" + value + "\"" + comma);
        } else {
            out.push_back("    \"" + section_key(section) + "\": {");
            for (std::size_t j = 0; j < section.lines.size(); ++j) {
                const std::string inner_comma = j + 1 < section.lines.size() ? "," : "";
                out.push_back("        \"" + line_key(section, j) + "\": \"" +
                              bound_text(section.lines[j], tpl, bindings) + "\"" + inner_comma);
            }
            out.push_back("    }" + comma);
        }
    }
    out.emplace_back("}");
    return out;
}

std::vector<std::string> render_xml(const MetaPromptTemplate& tpl,
                                    const std::map<std::string, std::string>& bindings) {
    std::vector<std::string> out;
    if (!tpl.title.empty()) {
        out.push_back(tpl.title);
        out.emplace_back();
    }
    for (const auto& section : tpl.sections) {
        const std::string tag = tag_slug(section_key(section));
        out.push_back("<" + tag + ">");
        for (const auto& line : section.lines) {
            std::string rendered;
            if (!line.label.empty()) rendered += line.label + ": ";
            rendered += bound_text(line, tpl, bindings);
            out.push_back(std::move(rendered));
        }
        out.push_back("</" + tag + ">");
    }
    return out;
}

std::string join_lines(std::vector<std::string> lines) {
    std::string text;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) text += '\n';
        text += lines[i];
    }
    return text;
}

}  // namespace

std::string render_bound(const MetaPromptTemplate& tpl, RenderFormat format,
                         const std::map<std::string, std::string>& bindings) {
    std::vector<std::string> lines;
    switch (format) {
        case RenderFormat::markdown: lines = render_markdown(tpl, bindings); break;
        case RenderFormat::json: lines = render_json(tpl, bindings); break;
        case RenderFormat::xml: lines = render_xml(tpl, bindings); break;
    }
    if (tpl.trailing_delimiter) append_delimiter(lines);
    return join_lines(std::move(lines));
}

std::string render(const MetaPromptTemplate& tpl, RenderFormat format) {
    return render_bound(tpl, format, {});
}

RenderedPrompt instantiate(const MetaPromptTemplate& tpl, const Bindings& bindings) {
    for (const auto& [slot, value] : bindings.values()) {
        if (!tpl.slots.count(slot)) throw MissingSlot(slot);
    }
    RenderedPrompt prompt;
    prompt.format = tpl.default_format;
    prompt.bindings = bindings.values();
    prompt.text = render_bound(tpl, tpl.default_format, prompt.bindings);
    return prompt;
}

RenderedPrompt instantiate(const MetaPromptTemplate& tpl, const TaskInstance& task) {
    Bindings bindings;
    bindings.bind("question", task.statement);
    return instantiate(tpl, bindings);
}

}  // namespace metaprompt::prompts

#include "metaprompt/parse.hpp"

#include <cctype>
#include <regex>

#include "metaprompt/render.hpp"

namespace metaprompt::prompts {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    lines.push_back(std::move(current));
    return lines;
}

/// Strips the trailing "----------" line (and the blank separator the
/// renderer puts before it). Returns whether the delimiter was present.
bool strip_delimiter(std::vector<std::string>& lines) {
    std::size_t end = lines.size();
    while (end > 0 && lines[end - 1].empty()) --end;
    if (end == 0 || lines[end - 1] != kDelimiter) return false;
    lines.resize(end - 1);
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return true;
}

struct KnownSlot {
    const char* description;
    const char* name;
};

// The bracketed placeholders the artifact can bind; all other bracketed text
// in the library figures is instruction for the model and stays literal.
constexpr KnownSlot kKnownSlots[] = {
    {"question to be answered", "question"},
    {"problem", "question"},
    {"input prompt", "input_prompt"},
    {"Complex document, e.g., research paper, or even including this prompt itself",
     "input_prompt"},
};

void recognize_slots(MetaPromptTemplate& tpl) {
    for (auto& section : tpl.sections) {
        for (auto& line : section.lines) {
            for (const auto& known : kKnownSlots) {
                const std::string marker = std::string("[") + known.description + "]";
                if (line.text.find(marker) != std::string::npos) {
                    line.slot = known.name;
                    tpl.slots[known.name] = known.description;
                    break;
                }
            }
        }
    }
}

bool is_heading_line(const std::string& line, std::string* heading) {
    static const std::regex kHeading(R"(^\*\*(.+)\*\*:$)");
    std::smatch m;
    if (!std::regex_match(line, m, kHeading)) return false;
    if (heading) *heading = m[1];
    return true;
}

bool has_markdown_structure(const std::vector<std::string>& lines) {
    static const std::regex kListItem(R"(^\s*(-\s+\S|\d+\.\s+\S).*)");
    static const std::regex kAtxHeading(R"(^#{1,6}\s+\S.*)");
    static const std::regex kPlaceholder(R"(.*\[[^\[\]]+\].*)");
    for (const auto& line : lines) {
        if (is_heading_line(line, nullptr)) return true;
        if (std::regex_match(line, kListItem)) return true;
        if (std::regex_match(line, kAtxHeading)) return true;
        if (std::regex_match(line, kPlaceholder)) return true;
        if (line == "\"\"\"" || line == "<syntax>") return true;
    }
    return false;
}

MetaPromptTemplate parse_markdown(const std::string& text) {
    auto lines = split_lines(text);
    if (!has_markdown_structure(lines)) {
        throw ParseError(1, "no template structure found in markdown text");
    }
    MetaPromptTemplate tpl;
    tpl.default_format = RenderFormat::markdown;
    tpl.trailing_delimiter = strip_delimiter(lines);

    TemplateSection current;
    bool open = false;
    auto flush = [&]() {
        if (open && (!current.heading.empty() || !current.lines.empty())) {
            tpl.sections.push_back(std::move(current));
        }
        current = TemplateSection{};
        open = false;
    };
    for (const auto& line : lines) {
        std::string heading;
        if (is_heading_line(line, &heading)) {
            // the renderer separates sections with one blank line
            if (open && !current.lines.empty() && current.lines.back().text.empty()) {
                current.lines.pop_back();
            }
            flush();
            current.heading = heading;
            current.role = role_from_heading(heading);
            open = true;
        } else {
            if (!open) open = true;
            current.lines.push_back({line, "", ""});
        }
    }
    flush();
    recognize_slots(tpl);
    return tpl;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// One `"key": ...` line of the canonical JSON layout. Values are single-line
// and inserted raw, so everything between the outer quotes is taken verbatim.
struct JsonLine {
    std::string key;
    std::string value;
    bool opens_object = false;
};

bool parse_json_entry(const std::string& raw, std::size_t line_no, JsonLine* out) {
    std::string entry = trim(raw);
    if (entry.empty() || entry[0] != '"') return false;
    std::size_t key_end = entry.find('"', 1);
    if (key_end == std::string::npos) throw ParseError(line_no, "unterminated key");
    out->key = entry.substr(1, key_end - 1);
    std::size_t colon = key_end + 1;
    if (colon >= entry.size() || entry[colon] != ':') {
        throw ParseError(line_no, "expected ':' after key");
    }
    std::string rest = trim(entry.substr(colon + 1));
    if (rest == "{") {
        out->opens_object = true;
        return true;
    }
    if (!rest.empty() && rest.back() == ',') rest.pop_back();
    if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"') {
        throw ParseError(line_no, "expected quoted value");
    }
    out->value = rest.substr(1, rest.size() - 2);
    out->opens_object = false;
    return true;
}

MetaPromptTemplate parse_json(const std::string& text) {
    auto lines = split_lines(text);
    MetaPromptTemplate tpl;
    tpl.default_format = RenderFormat::json;
    tpl.trailing_delimiter = strip_delimiter(lines);

    std::size_t i = 0;
    std::vector<std::string> preamble;
    while (i < lines.size() && lines[i] != "{") preamble.push_back(lines[i++]);
    if (i == lines.size()) throw ParseError(1, "no JSON object found");
    while (!preamble.empty() && preamble.back().empty()) preamble.pop_back();
    for (std::size_t p = 0; p < preamble.size(); ++p) {
        if (p) tpl.title += '\n';
        tpl.title += preamble[p];
    }
    ++i;  // consume "{"

    bool closed = false;
    while (i < lines.size()) {
        std::string entry = trim(lines[i]);
        if (entry == "}" || entry == "},") {
            closed = true;
            ++i;
            break;
        }
        JsonLine top;
        if (!parse_json_entry(lines[i], i + 1, &top)) {
            throw ParseError(i + 1, "expected \"key\": value");
        }
        TemplateSection section;
        section.heading = top.key;
        section.role = role_from_heading(top.key);
        if (top.opens_object) {
            ++i;
            bool inner_closed = false;
            while (i < lines.size()) {
                std::string inner = trim(lines[i]);
                if (inner == "}" || inner == "},") {
                    inner_closed = true;
                    ++i;
                    break;
                }
                JsonLine sub;
                if (!parse_json_entry(lines[i], i + 1, &sub) || sub.opens_object) {
                    throw ParseError(i + 1, "expected \"key\": \"value\" inside object");
                }
                section.lines.push_back({sub.value, sub.key, ""});
                ++i;
            }
            if (!inner_closed) throw ParseError(i, "object not closed");
        } else {
            if (!top.value.empty()) section.lines.push_back({top.value, "", ""});
            ++i;
        }
        tpl.sections.push_back(std::move(section));
    }
    if (!closed) throw ParseError(lines.size(), "JSON object not closed");
    for (; i < lines.size(); ++i) {
        if (!trim(lines[i]).empty()) throw ParseError(i + 1, "unexpected text after object");
    }
    recognize_slots(tpl);
    return tpl;
}

MetaPromptTemplate parse_xml(const std::string& text) {
    static const std::regex kOpenTag(R"(^<([a-z0-9_]+)>$)");
    auto lines = split_lines(text);
    MetaPromptTemplate tpl;
    tpl.default_format = RenderFormat::xml;
    tpl.trailing_delimiter = strip_delimiter(lines);

    std::size_t i = 0;
    std::vector<std::string> preamble;
    while (i < lines.size() && !std::regex_match(lines[i], kOpenTag)) {
        preamble.push_back(lines[i++]);
    }
    if (i == lines.size()) throw ParseError(1, "no xml elements found");
    while (!preamble.empty() && preamble.back().empty()) preamble.pop_back();
    for (std::size_t p = 0; p < preamble.size(); ++p) {
        if (!trim(preamble[p]).empty()) {
            if (!tpl.title.empty()) tpl.title += '\n';
            tpl.title += preamble[p];
        }
    }

    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        std::smatch m;
        if (!std::regex_match(lines[i], m, kOpenTag)) {
            throw ParseError(i + 1, "expected opening tag");
        }
        const std::string tag = m[1];
        const std::string open_line = "<" + tag + ">";
        const std::string close_line = "</" + tag + ">";
        TemplateSection section;
        section.heading = tag;
        section.role = role_from_heading(tag);
        ++i;
        int depth = 1;
        while (i < lines.size()) {
            if (lines[i] == open_line) ++depth;
            if (lines[i] == close_line && --depth == 0) break;
            section.lines.push_back({lines[i], "", ""});
            ++i;
        }
        if (depth != 0) throw ParseError(i, "element <" + tag + "> not closed");
        ++i;  // consume close tag
        tpl.sections.push_back(std::move(section));
    }
    recognize_slots(tpl);
    return tpl;
}

}  // namespace

MetaPromptTemplate parse_template(const std::string& text, RenderFormat format) {
    switch (format) {
        case RenderFormat::markdown: return parse_markdown(text);
        case RenderFormat::json: return parse_json(text);
        case RenderFormat::xml: return parse_xml(text);
    }
    throw Error("unknown render format");
}

}  // namespace metaprompt::prompts

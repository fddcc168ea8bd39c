#include "metaprompt/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include <nlohmann/json.hpp>

namespace metaprompt::eval {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return s.substr(begin, end - begin);
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    if (from.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Balanced-brace scan from the character after "\boxed{"; honors backslash
/// escapes. Returns nullopt when the box never closes.
std::optional<std::string> balanced_content(const std::string& text, std::size_t open) {
    int depth = 1;
    std::size_t i = open;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\\' && i + 1 < text.size()) {
            i += 2;
            continue;
        }
        if (c == '{') ++depth;
        if (c == '}' && --depth == 0) return text.substr(open, i - open);
        ++i;
    }
    return std::nullopt;
}

ExtractedAnswer extract_answer_phrase(const std::string& response) {
    static const std::string kPhrase = "The answer is";
    std::size_t pos = response.rfind(kPhrase);
    if (pos == std::string::npos) return {"", AnswerSource::none};
    std::size_t begin = pos + kPhrase.size();
    while (begin < response.size() && (response[begin] == ' ' || response[begin] == '\t')) ++begin;
    std::size_t end = begin;
    while (end < response.size()) {
        char c = response[end];
        if (c == '\n') break;
        if (c == '.') {
            const bool digit_before = end > begin && std::isdigit(static_cast<unsigned char>(response[end - 1]));
            const bool digit_after = end + 1 < response.size() && std::isdigit(static_cast<unsigned char>(response[end + 1]));
            if (!(digit_before && digit_after)) break;  // decimal points continue the span
        }
        ++end;
    }
    std::string answer = trim(response.substr(begin, end - begin));
    if (answer.empty()) return {"", AnswerSource::none};
    return {answer, AnswerSource::answer_phrase};
}

}  // namespace

std::string to_string(AnswerSource source) {
    switch (source) {
        case AnswerSource::boxed: return "boxed";
        case AnswerSource::answer_phrase: return "answer_phrase";
        case AnswerSource::none: return "none";
    }
    return "none";
}

ExtractedAnswer extract_answer(const std::string& response) {
    static const std::string kBox = "\\boxed{";
    std::size_t pos = response.rfind(kBox);
    if (pos != std::string::npos) {
        if (auto content = balanced_content(response, pos + kBox.size())) {
            return {*content, AnswerSource::boxed};
        }
        // unbalanced final box falls back to the answer phrase
    }
    return extract_answer_phrase(response);
}

NormalizedAnswer normalize_ex(const std::string& answer) {
    NormalizedAnswer out;
    std::string s = trim(answer);

    while (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
        s = trim(s.substr(1, s.size() - 2));
    }
    s = replace_all(s, "\\left", "");
    s = replace_all(s, "\\right", "");
    s = replace_all(s, "\\!", "");
    s = replace_all(s, "\\dfrac", "\\frac");
    s = replace_all(s, "\\tfrac", "\\frac");

    // collapse whitespace runs
    std::string collapsed;
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed += ' ';
        in_space = false;
        collapsed += c;
    }
    s = std::move(collapsed);

    // trailing periods and unit markers, to a fixpoint
    for (;;) {
        std::string before = s;
        while (!s.empty() && s.back() == '.') s.pop_back();
        s = trim(s);
        if (ends_with(s, "\\%")) {
            s = trim(s.substr(0, s.size() - 2));
            out.percent = true;
        } else if (!s.empty() && s.back() == '%') {
            s = trim(s.substr(0, s.size() - 1));
            out.percent = true;
        }
        if (ends_with(s, "^\\circ")) {
            s = trim(s.substr(0, s.size() - 6));
            out.degrees = true;
        } else if (ends_with(s, "^{\\circ}")) {
            s = trim(s.substr(0, s.size() - 8));
            out.degrees = true;
        }
        if (s == before) break;
    }

    // thousands separators in plain integers ("1,000" -> "1000")
    static const std::regex kGroupedInt(R"(^-?\d{1,3}(,\d{3})+$)");
    if (std::regex_match(s, kGroupedInt)) {
        s.erase(std::remove(s.begin(), s.end(), ','), s.end());
    }
    out.text = std::move(s);
    return out;
}

std::string normalize(const std::string& answer) { return normalize_ex(answer).text; }

std::string to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::equivalent: return "equivalent";
        case VerdictKind::not_equivalent: return "not_equivalent";
        case VerdictKind::unparseable: return "unparseable";
    }
    return "not_equivalent";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::string_match: return "string";
        case Method::symbolic: return "symbolic";
        case Method::numeric: return "numeric";
    }
    return "string";
}

namespace {

enum class NumericCompare { equal, different, undecidable };

NumericCompare numeric_compare(const ExprPtr& a, const ExprPtr& b);

NumericCompare scalar_compare(const ExprPtr& a, const ExprPtr& b) {
    // exact when both sides are plain rationals after canonicalization
    auto exact_of = [](const ExprPtr& e) -> std::optional<std::pair<long long, long long>> {
        switch (e->kind) {
            case NodeKind::integer: return std::make_pair(e->int_value, 1ll);
            case NodeKind::rational:
            case NodeKind::decimal: return std::make_pair(e->numerator, e->denominator);
            default: return std::nullopt;
        }
    };
    auto ea = exact_of(a);
    auto eb = exact_of(b);
    if (ea && eb) {
        return static_cast<__int128>(ea->first) * eb->second ==
                       static_cast<__int128>(eb->first) * ea->second
                   ? NumericCompare::equal
                   : NumericCompare::different;
    }
    auto da = eval_double(a);
    auto db = eval_double(b);
    if (!da || !db) return NumericCompare::undecidable;
    return std::fabs(*da - *db) <= kNumericTolerance ? NumericCompare::equal
                                                     : NumericCompare::different;
}

NumericCompare numeric_compare(const ExprPtr& a, const ExprPtr& b) {
    const bool a_compound = a->kind == NodeKind::interval || a->kind == NodeKind::tuple;
    const bool b_compound = b->kind == NodeKind::interval || b->kind == NodeKind::tuple;
    if (a_compound || b_compound) {
        if (a->kind != b->kind) return NumericCompare::different;
        if (a->kind == NodeKind::interval &&
            (a->lo_closed != b->lo_closed || a->hi_closed != b->hi_closed)) {
            return NumericCompare::different;
        }
        if (a->children.size() != b->children.size()) return NumericCompare::different;
        for (std::size_t i = 0; i < a->children.size(); ++i) {
            NumericCompare r = numeric_compare(a->children[i], b->children[i]);
            if (r != NumericCompare::equal) return r;
        }
        return NumericCompare::equal;
    }
    return scalar_compare(a, b);
}

}  // namespace

Verdict equivalent(const std::string& gold, const std::string& candidate) {
    NormalizedAnswer ng = normalize_ex(gold);
    NormalizedAnswer nc = normalize_ex(candidate);

    // unit flags must match unless the gold lacks the sign
    if ((ng.percent && !nc.percent) || (ng.degrees && !nc.degrees)) {
        return {VerdictKind::not_equivalent, std::nullopt};
    }

    if (ng.text == nc.text) {
        return {VerdictKind::equivalent, Method::string_match};
    }

    auto pg = parse_math(ng.text);
    auto pc = parse_math(nc.text);
    if (pg && pc) {
        ExprPtr cg = canonicalize(*pg);
        ExprPtr cc = canonicalize(*pc);
        if (expr_key(cg) == expr_key(cc)) {
            return {VerdictKind::equivalent, Method::symbolic};
        }
        if (closed_form_numeric(cg) && closed_form_numeric(cc)) {
            if (numeric_compare(cg, cc) == NumericCompare::equal) {
                return {VerdictKind::equivalent, Method::numeric};
            }
        }
        return {VerdictKind::not_equivalent, std::nullopt};
    }
    if (!pg && !pc) {
        return {VerdictKind::unparseable, std::nullopt};
    }
    return {VerdictKind::not_equivalent, std::nullopt};
}

double percentage(std::size_t correct, std::size_t total) {
    if (total == 0) return 0.0;
    return std::round(1000.0 * static_cast<double>(correct) / static_cast<double>(total)) / 10.0;
}

EvalReport score(const std::vector<SampleRecord>& records, const std::vector<Verdict>& verdicts) {
    if (records.size() != verdicts.size()) throw LengthMismatch(records.size(), verdicts.size());
    EvalReport report;
    report.total = records.size();

    std::size_t correct = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_type;   // correct, total
    std::map<int, std::pair<std::size_t, std::size_t>> by_level;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const bool ok = verdicts[i].is_equivalent();
        if (ok) ++correct;
        const auto& record = records[i];
        if (!record.subject.empty()) {
            auto& slot = by_type[record.subject];
            slot.first += ok ? 1 : 0;
            slot.second += 1;
        }
        if (record.level) {
            auto& slot = by_level[*record.level];
            slot.first += ok ? 1 : 0;
            slot.second += 1;
        }
        if (trim(record.response).empty()) ++report.empty_samples;
    }
    report.overall_pct = percentage(correct, report.total);
    for (const auto& [subject, counts] : by_type) {
        report.per_type[subject] = percentage(counts.first, counts.second);
    }
    for (const auto& [level, counts] : by_level) {
        report.per_level[level] = percentage(counts.first, counts.second);
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["overall_pct"] = report.overall_pct;
    j["per_type"] = ordered_json::object();
    for (const auto& [subject, pct] : report.per_type) j["per_type"][subject] = pct;
    j["per_level"] = ordered_json::object();
    for (const auto& [level, pct] : report.per_level) j["per_level"][std::to_string(level)] = pct;
    j["empty_samples"] = report.empty_samples;
    j["total"] = report.total;
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("bad report json: ") + e.what());
    }
    EvalReport report;
    report.overall_pct = j.at("overall_pct").get<double>();
    for (const auto& [subject, pct] : j.at("per_type").items()) {
        report.per_type[subject] = pct.get<double>();
    }
    for (const auto& [level, pct] : j.at("per_level").items()) {
        report.per_level[std::stoi(level)] = pct.get<double>();
    }
    report.empty_samples = j.at("empty_samples").get<std::size_t>();
    report.total = j.at("total").get<std::size_t>();
    return report;
}

}  // namespace metaprompt::eval

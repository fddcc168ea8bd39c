#include "metaprompt/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "metaprompt/game24.hpp"
#include "metaprompt/library.hpp"
#include "metaprompt/render.hpp"

namespace metaprompt::harness {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string format_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", pct);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::optional<int> parse_level(const ordered_json& j) {
    if (!j.contains("level")) return std::nullopt;
    const auto& level = j.at("level");
    if (level.is_number_integer()) {
        int value = level.get<int>();
        return value >= 1 && value <= 5 ? std::optional<int>(value) : std::nullopt;
    }
    if (level.is_string()) {
        const std::string text = level.get<std::string>();  // MATH writes "Level 3"
        for (int v = 1; v <= 5; ++v) {
            if (text == "Level " + std::to_string(v)) return v;
        }
    }
    return std::nullopt;
}

std::vector<eval::SampleRecord> load_math_dir(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw IoError("math dataset path is not a directory: " + root.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<eval::SampleRecord> records;
    records.reserve(files.size());
    for (const auto& file : files) {
        ordered_json j;
        try {
            j = ordered_json::parse(read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(file.string(), std::string("bad json: ") + e.what());
        }
        if (!j.contains("problem") || !j.contains("solution")) {
            throw MalformedRecord(file.string(), "missing problem or solution");
        }
        eval::SampleRecord record;
        record.task_id = std::filesystem::relative(file, root).generic_string();
        record.subject = j.value("type", std::string());
        record.level = parse_level(j);
        record.gold = eval::extract_answer(j.at("solution").get<std::string>()).text;
        if (record.gold.empty()) {
            throw MalformedRecord(file.string(), "solution has no boxed answer");
        }
        record.statement = j.at("problem").get<std::string>();
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<eval::SampleRecord> load_gsm8k_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open gsm8k file: " + path.string());
    std::vector<eval::SampleRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord("line " + std::to_string(line_no),
                                  std::string("bad json: ") + e.what());
        }
        if (!j.contains("question") || !j.contains("answer")) {
            throw MalformedRecord("line " + std::to_string(line_no),
                                  "missing question or answer");
        }
        const std::string answer = j.at("answer").get<std::string>();
        std::size_t marker = answer.rfind("####");
        if (marker == std::string::npos) {
            throw MalformedRecord("line " + std::to_string(line_no),
                                  "answer lacks #### gold tail");
        }
        eval::SampleRecord record;
        record.task_id = "gsm8k-" + std::to_string(line_no);
        record.gold = trim(answer.substr(marker + 4));
        if (record.gold.empty()) {
            throw MalformedRecord("line " + std::to_string(line_no), "empty gold answer");
        }
        record.statement = j.at("question").get<std::string>();
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<eval::SampleRecord> load_game24_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open puzzle file: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw MissingColumn("Puzzles");
    if (header.find("Puzzles") == std::string::npos) throw MissingColumn("Puzzles");
    std::vector<eval::SampleRecord> records;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string text = trim(line);
        if (text.empty()) continue;
        std::size_t comma = text.find(',');
        if (comma != std::string::npos) text = text.substr(0, comma);
        game24::Puzzle puzzle;
        try {
            puzzle = game24::parse_puzzle(text);
        } catch (const Error&) {
            throw MalformedRow(row, line);
        }
        eval::SampleRecord record;
        record.task_id = "game24-" + std::to_string(row);
        record.subject = "Game of 24";
        record.gold = "24";
        record.statement = puzzle.raw;
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::math: return "math";
        case DatasetKind::gsm8k: return "gsm8k";
        case DatasetKind::game24: return "game24";
    }
    return "math";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
    if (name == "math") return DatasetKind::math;
    if (name == "gsm8k") return DatasetKind::gsm8k;
    if (name == "game24") return DatasetKind::game24;
    throw Error("unknown dataset kind: " + name);
}

std::string to_string(SystemPreset preset) {
    return preset == SystemPreset::none ? "null" : "blank2";
}

SystemPreset system_preset_from_string(const std::string& name) {
    if (name == "null" || name == "none") return SystemPreset::none;
    if (name == "blank2" || name == "two-blank-lines") return SystemPreset::two_blank_lines;
    throw Error("unknown system preset: " + name);
}

std::string default_template_id(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::math: return "math-markdown";
        case DatasetKind::gsm8k: return "math-json";
        case DatasetKind::game24: return "math-markdown";
    }
    return "math-markdown";
}

std::vector<eval::SampleRecord> load_dataset(DatasetKind kind,
                                             const std::filesystem::path& path) {
    switch (kind) {
        case DatasetKind::math: return load_math_dir(path);
        case DatasetKind::gsm8k: return load_gsm8k_jsonl(path);
        case DatasetKind::game24: return load_game24_csv(path);
    }
    throw Error("unknown dataset kind");
}

llm::CompletionRequest build_request(const RunConfig& config,
                                     const prompts::MetaPromptTemplate& tpl,
                                     const eval::SampleRecord& record) {
    prompts::TaskInstance task;
    task.id = record.task_id;
    task.statement = record.statement;
    task.subject = record.subject;
    task.level = record.level;
    task.gold_answer = record.gold;
    prompts::RenderedPrompt prompt = prompts::instantiate(tpl, task);

    llm::CompletionRequest request;
    request.model = config.model;
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    request.stop = config.stop;
    if (config.system_preset == SystemPreset::two_blank_lines) {
        request.messages.push_back({llm::Role::system, "\n\n"});
    }
    request.messages.push_back({llm::Role::user, prompt.text});
    return request;
}

std::string transcript_to_json(const TranscriptRecord& record) {
    ordered_json j;
    j["task_id"] = record.task_id;
    j["prompt_text"] = record.prompt_text;
    j["response_text"] = record.response_text;
    j["extracted"] = {{"text", record.extracted.text},
                      {"source", eval::to_string(record.extracted.source)}};
    ordered_json verdict;
    verdict["variant"] = eval::to_string(record.verdict.kind);
    if (record.verdict.method) verdict["method"] = eval::to_string(*record.verdict.method);
    j["verdict"] = std::move(verdict);
    j["subject"] = record.subject;
    if (record.level) {
        j["level"] = *record.level;
    } else {
        j["level"] = nullptr;
    }
    j["finish_reason"] = llm::to_string(record.finish_reason);
    return j.dump();
}

TranscriptRecord transcript_from_json(const std::string& line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("bad transcript line: ") + e.what());
    }
    TranscriptRecord record;
    record.task_id = j.at("task_id").get<std::string>();
    record.prompt_text = j.at("prompt_text").get<std::string>();
    record.response_text = j.at("response_text").get<std::string>();
    record.extracted.text = j.at("extracted").at("text").get<std::string>();
    const std::string source = j.at("extracted").at("source").get<std::string>();
    record.extracted.source = source == "boxed"           ? eval::AnswerSource::boxed
                              : source == "answer_phrase" ? eval::AnswerSource::answer_phrase
                                                          : eval::AnswerSource::none;
    const std::string variant = j.at("verdict").at("variant").get<std::string>();
    record.verdict.kind = variant == "equivalent"     ? eval::VerdictKind::equivalent
                          : variant == "unparseable"  ? eval::VerdictKind::unparseable
                                                      : eval::VerdictKind::not_equivalent;
    if (j.at("verdict").contains("method")) {
        const std::string method = j.at("verdict").at("method").get<std::string>();
        record.verdict.method = method == "string"     ? eval::Method::string_match
                                : method == "symbolic" ? eval::Method::symbolic
                                                       : eval::Method::numeric;
    }
    record.subject = j.at("subject").get<std::string>();
    if (j.contains("level") && !j.at("level").is_null()) {
        record.level = j.at("level").get<int>();
    }
    record.finish_reason = llm::finish_reason_from_string(
        j.value("finish_reason", std::string("stop")));
    return record;
}

std::vector<TranscriptRecord> load_transcripts(const std::filesystem::path& path) {
    std::vector<TranscriptRecord> records;
    std::ifstream in(path);
    if (!in) return records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        records.push_back(transcript_from_json(line));
    }
    return records;
}

RunResult run(const RunConfig& config) {
    auto records = load_dataset(config.dataset_kind, config.dataset_path);
    if (!config.task_ids.empty()) {
        std::set<std::string> wanted(config.task_ids.begin(), config.task_ids.end());
        std::erase_if(records, [&](const eval::SampleRecord& r) {
            return !wanted.count(r.task_id);
        });
    }
    if (config.limit && *config.limit < records.size()) {
        records.resize(*config.limit);
    }
    const std::string template_id =
        config.template_id.empty() ? default_template_id(config.dataset_kind)
                                   : config.template_id;
    const prompts::MetaPromptTemplate tpl = prompts::builtin(template_id);

    std::filesystem::create_directories(config.out_dir);
    const auto transcripts_path = config.out_dir / "transcripts.jsonl";

    // resume: completed task ids are skipped, their stored verdicts reused
    std::vector<TranscriptRecord> existing = load_transcripts(transcripts_path);
    std::set<std::string> done;
    for (const auto& t : existing) done.insert(t.task_id);

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!done.count(records[i].task_id)) todo.push_back(i);
    }

    std::vector<llm::CompletionRequest> requests;
    requests.reserve(todo.size());
    for (std::size_t i : todo) requests.push_back(build_request(config, tpl, records[i]));

    RunResult result;
    result.attempted = todo.size();
    std::vector<TranscriptRecord> fresh;
    if (!todo.empty()) {
        auto backend = llm::make_backend(config.backend);
        auto outcomes = llm::complete_batch(*backend, requests, config.max_in_flight);
        std::ofstream out(transcripts_path, std::ios::app | std::ios::binary);
        if (!out) throw IoError("cannot append transcripts: " + transcripts_path.string());
        for (std::size_t k = 0; k < todo.size(); ++k) {
            const auto& record = records[todo[k]];
            TranscriptRecord transcript;
            transcript.task_id = record.task_id;
            transcript.prompt_text = requests[k].messages.back().content;
            transcript.subject = record.subject;
            transcript.level = record.level;
            if (outcomes[k].ok()) {
                transcript.response_text = outcomes[k].response->text;
                transcript.finish_reason = outcomes[k].response->finish_reason;
            } else {
                transcript.finish_reason = llm::FinishReason::error;
                ++result.backend_failures;
            }
            transcript.extracted = eval::extract_answer(transcript.response_text);
            transcript.verdict = eval::equivalent(record.gold, transcript.extracted.text);
            out << transcript_to_json(transcript) << "\n";
            fresh.push_back(std::move(transcript));
        }
    }

    // score over everything persisted for this dataset slice
    std::map<std::string, const TranscriptRecord*> by_id;
    for (const auto& t : existing) by_id[t.task_id] = &t;
    for (const auto& t : fresh) by_id[t.task_id] = &t;

    std::vector<eval::SampleRecord> scored;
    std::vector<eval::Verdict> verdicts;
    for (const auto& record : records) {
        auto it = by_id.find(record.task_id);
        if (it == by_id.end()) continue;
        eval::SampleRecord sample = record;
        sample.response = it->second->response_text;
        scored.push_back(std::move(sample));
        verdicts.push_back(it->second->verdict);
    }
    result.report = eval::score(scored, verdicts);

    RunMeta meta;
    meta.model = config.model;
    meta.dataset = to_string(config.dataset_kind);
    {
        std::ofstream report_json(config.out_dir / "report.json", std::ios::binary);
        report_json << eval::report_to_json(result.report);
        std::ofstream report_md(config.out_dir / "report.md", std::ios::binary);
        report_md << report_markdown(result.report, meta);
    }
    return result;
}

std::string report_markdown(const eval::EvalReport& report, const RunMeta& meta) {
    std::string out;
    out += "| Model | Eval Method | Dataset | Score(%) |\n";
    out += "| --- | --- | --- | --- |\n";
    out += "| " + meta.model + " | " + meta.eval_method + " | " + meta.dataset + " | " +
           format_pct(report.overall_pct) + " |\n";
    out += "\n";
    out += "Empty samples: " + std::to_string(report.empty_samples) + "\n";
    if (!report.per_type.empty()) {
        out += "Type scores: {";
        bool first = true;
        for (const auto& [subject, pct] : report.per_type) {
            if (!first) out += ", ";
            first = false;
            out += "'" + subject + "': " + format_pct(pct);
        }
        out += "}\n";
    }
    if (!report.per_level.empty()) {
        out += "Level scores: {";
        bool first = true;
        for (const auto& [level, pct] : report.per_level) {
            if (!first) out += ", ";
            first = false;
            out += std::to_string(level) + ": " + format_pct(pct);
        }
        out += "}\n";
    }
    return out;
}

}  // namespace metaprompt::harness

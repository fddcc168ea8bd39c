#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "metaprompt/game24.hpp"
#include "metaprompt/harness.hpp"
#include "metaprompt/library.hpp"
#include "metaprompt/parse.hpp"
#include "metaprompt/render.hpp"

namespace {

using metaprompt::Error;
namespace eval = metaprompt::eval;
namespace game24 = metaprompt::game24;
namespace harness = metaprompt::harness;
namespace llm = metaprompt::llm;
namespace prompts = metaprompt::prompts;

void apply_config_file(const std::string& path, harness::RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("model")) config.model = j["model"].get<std::string>();
    if (j.contains("temperature")) config.temperature = j["temperature"].get<double>();
    if (j.contains("max_tokens")) config.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("stop")) config.stop = j["stop"].get<std::vector<std::string>>();
    if (j.contains("max_in_flight")) config.max_in_flight = j["max_in_flight"].get<std::size_t>();
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        if (b.contains("kind")) {
            config.backend.kind = llm::backend_kind_from_string(b["kind"].get<std::string>());
        }
        if (b.contains("base_url")) config.backend.base_url = b["base_url"].get<std::string>();
        if (b.contains("api_key")) config.backend.api_key = b["api_key"].get<std::string>();
        if (b.contains("script_path")) config.backend.script_path = b["script_path"].get<std::string>();
        if (b.contains("record_path")) config.backend.record_path = b["record_path"].get<std::string>();
        if (b.contains("timeout_seconds")) config.backend.timeout_seconds = b["timeout_seconds"].get<int>();
    }
}

int cmd_run(harness::RunConfig& config) {
    harness::RunResult result = harness::run(config);
    harness::RunMeta meta;
    meta.model = config.model;
    meta.dataset = harness::to_string(config.dataset_kind);
    std::cout << harness::report_markdown(result.report, meta);
    std::cout << "\nTranscripts: " << (config.out_dir / "transcripts.jsonl").string() << "\n";
    if (result.backend_failures > 0) {
        std::cerr << result.backend_failures << " sample(s) failed at the backend\n";
        return 2;
    }
    return 0;
}

int cmd_solve24(const std::string& in_path, const std::string& out_path, std::size_t jobs) {
    game24::SolveReport report = game24::batch(in_path, out_path, jobs);
    std::printf("total: %zu\nsolved: %zu\nsolve_rate_pct: %.1f\noracle_solvable: %zu\nelapsed: %.3fs\n",
                report.total, report.solved, report.solve_rate_pct,
                report.oracle_solvable_count, report.elapsed_seconds);
    return 0;
}

int cmd_judge(const std::string& gold, const std::string& candidate) {
    eval::Verdict verdict = eval::equivalent(gold, candidate);
    nlohmann::ordered_json j;
    j["variant"] = eval::to_string(verdict.kind);
    if (verdict.method) j["method"] = eval::to_string(*verdict.method);
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_render(const std::string& id, const std::string& format) {
    prompts::MetaPromptTemplate tpl = prompts::builtin(id);
    prompts::RenderFormat f =
        format.empty() ? tpl.default_format : prompts::format_from_string(format);
    std::cout << prompts::render(tpl, f) << "\n";
    return 0;
}

int cmd_score(const std::string& transcripts_path) {
    auto transcripts = harness::load_transcripts(transcripts_path);
    std::vector<eval::SampleRecord> records;
    std::vector<eval::Verdict> verdicts;
    for (const auto& t : transcripts) {
        eval::SampleRecord record;
        record.task_id = t.task_id;
        record.subject = t.subject;
        record.level = t.level;
        record.gold = "-";  // stored verdicts are reused; gold is not re-checked
        record.response = t.response_text;
        records.push_back(std::move(record));
        verdicts.push_back(t.verdict);
    }
    eval::EvalReport report = eval::score(records, verdicts);
    harness::RunMeta meta;
    meta.model = "-";
    meta.dataset = "-";
    std::cout << harness::report_markdown(report, meta);
    return 0;
}

int cmd_export_templates(const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path root(out_dir);
    fs::create_directories(root / "templates");
    fs::create_directories(root / "golden");
    for (const auto& id : prompts::builtin_ids()) {
        prompts::MetaPromptTemplate tpl = prompts::builtin(id);
        prompts::save_template_file(tpl, root / "templates" / (id + ".json"));
        const char* ext = tpl.default_format == prompts::RenderFormat::markdown ? ".md"
                          : tpl.default_format == prompts::RenderFormat::json  ? ".json"
                                                                               : ".xml";
        std::ofstream golden(root / "golden" / (id + ext), std::ios::binary);
        golden << prompts::render(tpl, tpl.default_format);
    }
    std::cout << "wrote " << prompts::builtin_ids().size() << " templates to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-prompting toolkit: structured prompt templates, benchmark harness, "
                 "math answer judge and Game-of-24 solver"};
    app.require_subcommand(1);

    // run
    harness::RunConfig config;
    std::string dataset = "math";
    std::string backend_kind = "scripted";
    std::string system_preset = "null";
    std::string out_dir = "out";
    std::string config_path;
    std::string data_path;
    std::string script_path, record_path, base_url;
    std::size_t limit = 0;
    auto* run_cmd = app.add_subcommand("run", "Run a benchmark dataset through a backend");
    run_cmd->add_option("--dataset", dataset, "math|gsm8k|game24")->required();
    run_cmd->add_option("--data", data_path, "dataset path")->required();
    run_cmd->add_option("--template", config.template_id, "template id (default per dataset)");
    run_cmd->add_option("--backend", backend_kind, "http|scripted|recording");
    run_cmd->add_option("--script", script_path, "scripted backend script file");
    run_cmd->add_option("--record", record_path, "recording backend output script");
    run_cmd->add_option("--base-url", base_url, "http backend base URL");
    run_cmd->add_option("--system", system_preset, "null|blank2");
    run_cmd->add_option("--stop", config.stop, "stop sequences");
    run_cmd->add_option("--jobs", config.max_in_flight, "max in-flight requests");
    run_cmd->add_option("--limit", limit, "only the first N samples");
    run_cmd->add_option("--ids", config.task_ids, "only these task ids (minival-style subsets)");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--model", config.model, "model id");
    run_cmd->add_option("--temperature", config.temperature, "sampling temperature");
    run_cmd->add_option("--max-tokens", config.max_tokens, "generation budget");
    run_cmd->add_option("--config", config_path, "JSON config file (flags override)");

    std::string in_csv, out_csv;
    std::size_t jobs = 0;
    auto* solve_cmd = app.add_subcommand("solve24", "Solve Game-of-24 puzzles from a CSV");
    solve_cmd->add_option("--in", in_csv, "input CSV with a Puzzles column")->required();
    solve_cmd->add_option("--out", out_csv, "output CSV")->required();
    solve_cmd->add_option("--jobs", jobs, "worker threads (default: hardware)");

    std::string gold, candidate;
    auto* judge_cmd = app.add_subcommand("judge", "Judge answer equivalence");
    judge_cmd->add_option("--gold", gold, "gold answer")->required();
    judge_cmd->add_option("--candidate", candidate, "candidate answer")->required();

    std::string template_id, format;
    auto* render_cmd = app.add_subcommand("render", "Render a builtin template");
    render_cmd->add_option("--template", template_id, "template id")->required();
    render_cmd->add_option("--format", format, "markdown|json|xml (default: native)");

    std::string transcripts_path;
    auto* score_cmd = app.add_subcommand("score", "Re-score a transcripts file");
    score_cmd->add_option("--transcripts", transcripts_path, "transcripts.jsonl")->required();

    std::string export_dir = "data";
    auto* export_cmd =
        app.add_subcommand("export-templates", "Write template manifests and golden renders");
    export_cmd->add_option("--out", export_dir, "output root (templates/, golden/)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (!config_path.empty()) apply_config_file(config_path, config);
            config.dataset_kind = harness::dataset_kind_from_string(dataset);
            config.dataset_path = data_path;
            config.backend.kind = llm::backend_kind_from_string(backend_kind);
            if (!script_path.empty()) config.backend.script_path = script_path;
            if (!record_path.empty()) config.backend.record_path = record_path;
            if (!base_url.empty()) config.backend.base_url = base_url;
            config.system_preset = harness::system_preset_from_string(system_preset);
            config.out_dir = out_dir;
            if (limit > 0) config.limit = limit;
            return cmd_run(config);
        }
        if (solve_cmd->parsed()) return cmd_solve24(in_csv, out_csv, jobs);
        if (judge_cmd->parsed()) return cmd_judge(gold, candidate);
        if (render_cmd->parsed()) return cmd_render(template_id, format);
        if (score_cmd->parsed()) return cmd_score(transcripts_path);
        if (export_cmd->parsed()) return cmd_export_templates(export_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

// Acceptance suite: runs every primary criterion at its stated tolerance and
// prints one pass/fail line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "metaprompt/evaluator.hpp"
#include "metaprompt/game24.hpp"
#include "metaprompt/harness.hpp"
#include "metaprompt/library.hpp"
#include "metaprompt/mppt.hpp"
#include "metaprompt/parse.hpp"
#include "metaprompt/render.hpp"
#include "metaprompt/transform.hpp"

namespace fs = std::filesystem;
using namespace metaprompt;

namespace {

const fs::path kDataDir = METAPROMPT_DATA_DIR;

struct Checker {
    int failures = 0;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("missing file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() /
                   ("metaprompt-acceptance-" + std::to_string(::getpid()) + "-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<game24::Puzzle> all_multisets_1_to_13() {
    std::vector<game24::Puzzle> puzzles;
    for (int a = 1; a <= 13; ++a) {
        for (int b = a; b <= 13; ++b) {
            for (int c = b; c <= 13; ++c) {
                for (int d = c; d <= 13; ++d) {
                    game24::Puzzle puzzle;
                    puzzle.numbers = {a, b, c, d};
                    puzzle.raw = std::to_string(a) + " " + std::to_string(b) + " " +
                                 std::to_string(c) + " " + std::to_string(d);
                    puzzles.push_back(std::move(puzzle));
                }
            }
        }
    }
    return puzzles;
}

// ---------------------------------------------------------------------------

void game24_oracle_equivalence(Checker& check) {
    auto puzzles = all_multisets_1_to_13();
    check.require(puzzles.size() == 1820, "expected 1820 multisets");

    std::vector<char> solver_says(puzzles.size());
    const auto start_single = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < puzzles.size(); ++i) {
        auto trees = game24::solve(puzzles[i], game24::SolveMode::first);
        solver_says[i] = trees.empty() ? 0 : 1;
        for (const auto& tree : trees) {
            auto value = game24::eval_expr(tree);
            check.require(value.has_value() &&
                              *value == game24::Rational::from_int(game24::kTarget),
                          "emitted solution does not evaluate to 24 for " + puzzles[i].raw);
        }
    }
    const double single_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_single).count();

    for (std::size_t i = 0; i < puzzles.size(); ++i) {
        if ((solver_says[i] != 0) != game24::oracle_solvable(puzzles[i])) {
            check.require(false, "solver/oracle disagree on " + puzzles[i].raw);
        }
    }
    check.require(single_seconds < 60.0,
                  "single-threaded sweep took " + std::to_string(single_seconds) + "s");

    // the same sweep fanned over 8 workers
    const auto start_parallel = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    std::atomic<int> mismatches{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= puzzles.size()) return;
            bool solvable = !game24::solve(puzzles[i], game24::SolveMode::first).empty();
            if (solvable != (solver_says[i] != 0)) mismatches.fetch_add(1);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    const double parallel_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_parallel).count();
    check.require(mismatches.load() == 0, "parallel sweep disagreed with serial sweep");
    check.require(parallel_seconds < 15.0,
                  "8-worker sweep took " + std::to_string(parallel_seconds) + "s");

    const std::size_t solvable_count =
        static_cast<std::size_t>(std::count(solver_says.begin(), solver_says.end(), 1));
    check.require(solvable_count == 1362,
                  "expected 1362 solvable multisets, got " + std::to_string(solvable_count));
}

void paper_solve_rate(Checker& check) {
    const fs::path csv_in = kDataDir / "game24" / "puzzles_1362.csv";
    const fs::path out = fresh_dir("solve24") / "solutions.csv";
    game24::SolveReport report = game24::batch(csv_in, out, 8);
    check.require(report.total == 1362, "benchmark list must hold 1362 puzzles");
    check.require(report.solve_rate_pct == 100.0, "solve rate must be exactly 100.0");
    check.require(report.solved == report.total, "every puzzle must be solved");
    const double mean_seconds =
        report.total ? report.elapsed_seconds / static_cast<double>(report.total) : 1e9;
    check.require(mean_seconds <= 0.08,
                  "mean per-puzzle time " + std::to_string(mean_seconds) + "s exceeds 0.08s");
}

void evaluator_fixture_suite(Checker& check) {
    std::ifstream in(kDataDir / "fixtures" / "eval_pairs.jsonl");
    check.require(bool(in), "missing eval_pairs.jsonl");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        auto j = nlohmann::json::parse(line);
        const std::string gold = j.at("gold");
        const std::string candidate = j.at("candidate");
        const std::string expected = j.at("expected");
        eval::Verdict verdict = eval::equivalent(gold, candidate);
        check.require(eval::to_string(verdict.kind) == expected,
                      "verdict mismatch for gold=" + gold + " candidate=" + candidate +
                          " (got " + eval::to_string(verdict.kind) + ")");
        check.require(eval::equivalent(gold, gold).is_equivalent(),
                      "equivalence not reflexive for " + gold);
        check.require(eval::equivalent(candidate, candidate).is_equivalent(),
                      "equivalence not reflexive for " + candidate);
        auto ng = eval::normalize_ex(gold);
        auto nc = eval::normalize_ex(candidate);
        if (ng.percent == nc.percent && ng.degrees == nc.degrees) {
            check.require(eval::equivalent(candidate, gold).is_equivalent() ==
                              verdict.is_equivalent(),
                          "equivalence not symmetric for " + gold + " / " + candidate);
        }
    }
    check.require(rows >= 30, "fixture must hold at least 30 triples");

    std::mt19937 rng(4242);
    static const char pool[] = "0123456789abxyz+-*/^{}()[]$\\%., \t";
    for (int i = 0; i < 1000; ++i) {
        std::string s;
        std::size_t length = rng() % 48;
        for (std::size_t k = 0; k < length; ++k) s += pool[rng() % (sizeof(pool) - 1)];
        if (eval::normalize(eval::normalize(s)) != eval::normalize(s)) {
            check.require(false, "normalize not idempotent on: " + s);
            break;
        }
    }
}

void template_goldens(Checker& check) {
    struct Golden {
        const char* id;
        const char* file;
    };
    const Golden goldens[] = {
        {"math-markdown", "math-markdown.md"}, {"math-json", "math-json.json"},
        {"quadratic", "quadratic.json"},       {"system-generic", "system-generic.md"},
        {"mp-cr-markdown", "mp-cr-markdown.md"}, {"mp-cr-xml", "mp-cr-xml.xml"},
    };
    for (const auto& golden : goldens) {
        prompts::MetaPromptTemplate tpl = prompts::builtin(golden.id);
        const std::string rendered = prompts::render(tpl, tpl.default_format);
        const std::string expected = slurp(kDataDir / "golden" / golden.file);
        check.require(rendered == expected,
                      std::string("golden mismatch for ") + golden.id);
    }
}

void functor_law_suite(Checker& check) {
    using namespace prompts;
    constexpr RenderFormat kFormats[] = {RenderFormat::markdown, RenderFormat::json,
                                         RenderFormat::xml};
    auto renders_equal = [&](const MetaPromptTemplate& a, const MetaPromptTemplate& b) {
        for (auto format : kFormats) {
            if (render(a, format) != render(b, format)) return false;
        }
        return true;
    };
    std::mt19937 rng(123456);
    auto random_transform = [&]() -> PromptTransform {
        switch (rng() % 5) {
            case 0: return add_hints_section("Hint " + std::to_string(rng() % 7));
            case 1: {
                const SectionRole roles[] = {SectionRole::hints, SectionRole::final_solution,
                                             SectionRole::solution_structure};
                return remove_section(roles[rng() % 3]);
            }
            case 2: return rename_title("Title " + std::to_string(rng() % 7));
            case 3: return set_format(kFormats[rng() % 3]);
            default: return rewrite_slot_description("question", "desc " + std::to_string(rng() % 7));
        }
    };

    // identity law once per builtin and format
    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        check.require(renders_equal(identity().effect(tpl), tpl), "identity law failed on " + id);
    }

    int law_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        PromptTransform f = random_transform();
        PromptTransform g = random_transform();
        PromptTransform h = random_transform();
        for (const auto& id : builtin_ids()) {
            MetaPromptTemplate tpl = builtin(id);
            if (!renders_equal(compose(f, g).effect(tpl), g.effect(f.effect(tpl)))) ++law_failures;
            if (!renders_equal(compose(compose(f, g), h).effect(tpl),
                               compose(f, compose(g, h)).effect(tpl))) {
                ++law_failures;
            }
            if (!renders_equal(compose(identity(), f).effect(tpl), f.effect(tpl))) ++law_failures;
            if (!renders_equal(compose(f, identity()).effect(tpl), f.effect(tpl))) ++law_failures;
        }
    }
    check.require(law_failures == 0,
                  std::to_string(law_failures) + " functor-law violations over 1000 triples");

    for (const auto& id : builtin_ids()) {
        MetaPromptTemplate tpl = builtin(id);
        for (auto format : kFormats) {
            const std::string text = render(tpl, format);
            MetaPromptTemplate reparsed = parse_template(text, format);
            check.require(render(reparsed, format) == text,
                          "parse-render round trip failed on " + id);
        }
    }
}

// 20 samples, 13 correct, with hand-computed per-type / per-level marginals.
struct ReplayPlan {
    std::string subject;
    int level;
    bool correct;
};

const std::vector<ReplayPlan>& replay_plan() {
    static const std::vector<ReplayPlan> kPlan = {
        {"Algebra", 1, true},  {"Algebra", 1, true},  {"Algebra", 2, true},
        {"Algebra", 2, false}, {"Algebra", 3, true},  {"Algebra", 3, false},
        {"Algebra", 4, true},  {"Algebra", 5, true},  {"Geometry", 1, true},
        {"Geometry", 2, true}, {"Geometry", 3, false}, {"Geometry", 4, true},
        {"Geometry", 4, true}, {"Geometry", 5, false}, {"Number Theory", 1, true},
        {"Number Theory", 2, true}, {"Number Theory", 3, true}, {"Number Theory", 4, false},
        {"Number Theory", 5, false}, {"Number Theory", 5, false},
    };
    return kPlan;
}

fs::path write_replay_dataset(const fs::path& dir) {
    fs::path dataset = dir / "dataset";
    fs::create_directories(dataset);
    const auto& plan = replay_plan();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%02zu.json", i);
        nlohmann::ordered_json j;
        char tag[32];
        std::snprintf(tag, sizeof(tag), "%02zu", i);
        j["problem"] = "Sample problem " + std::string(tag) + ": compute the value.";
        j["level"] = "Level " + std::to_string(plan[i].level);
        j["type"] = plan[i].subject;
        j["solution"] = "The value is $\\boxed{" + std::to_string(i + 1) + "}$.";
        std::ofstream out(dataset / name);
        out << j.dump(2) << "\n";
    }
    return dataset;
}

std::string replay_response(std::size_t index, bool correct) {
    const std::string answer = correct ? std::to_string(index + 1) : "999999";
    return "Let's think step by step.\nThe answer is $\\boxed{" + answer + "}$.";
}

bool report_matches_plan(const eval::EvalReport& report, Checker& check,
                         const std::string& where) {
    bool ok = true;
    auto expect = [&](bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            check.require(false, where + ": " + what);
        }
    };
    expect(report.total == 20, "total must be 20");
    expect(report.overall_pct == 65.0, "overall must be exactly 65.0");
    expect(report.empty_samples == 0, "no empty samples expected");
    expect(report.per_type.at("Algebra") == 75.0, "Algebra must be 75.0");
    expect(std::abs(report.per_type.at("Geometry") - 66.7) < 1e-9, "Geometry must be 66.7");
    expect(report.per_type.at("Number Theory") == 50.0, "Number Theory must be 50.0");
    expect(report.per_level.at(1) == 100.0, "level 1 must be 100.0");
    expect(report.per_level.at(2) == 75.0, "level 2 must be 75.0");
    expect(report.per_level.at(3) == 50.0, "level 3 must be 50.0");
    expect(report.per_level.at(4) == 75.0, "level 4 must be 75.0");
    expect(report.per_level.at(5) == 25.0, "level 5 must be 25.0");
    return ok;
}

void replay_harness_determinism(Checker& check) {
    fs::path root = fresh_dir("replay");
    fs::path dataset = write_replay_dataset(root);

    harness::RunConfig base;
    base.dataset_kind = harness::DatasetKind::math;
    base.dataset_path = dataset;
    base.max_in_flight = 4;
    base.model = "replay-model";

    auto records = harness::load_dataset(base.dataset_kind, base.dataset_path);
    check.require(records.size() == 20, "fixture must load 20 records");
    auto tpl = prompts::builtin(harness::default_template_id(base.dataset_kind));

    // scripted run with 13 known-correct transcripts
    fs::path script = root / "script.jsonl";
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto request = harness::build_request(base, tpl, records[i]);
        llm::append_script_entry(script, {llm::fingerprint(request),
                                          replay_response(i, replay_plan()[i].correct),
                                          llm::FinishReason::stop});
    }
    harness::RunConfig scripted = base;
    scripted.backend.kind = llm::BackendKind::scripted;
    scripted.backend.script_path = script.string();
    scripted.out_dir = root / "scripted-out";
    harness::RunResult scripted_result = harness::run(scripted);
    report_matches_plan(scripted_result.report, check, "scripted run");

    // recording -> replay closure through a local chat-completions server
    httplib::Server server;
    server.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        const std::string prompt = body.at("messages").back().at("content");
        std::string text = "I cannot find the problem.";
        for (std::size_t i = 0; i < replay_plan().size(); ++i) {
            char tag[32];
            std::snprintf(tag, sizeof(tag), "%02zu", i);
            if (prompt.find("Sample problem " + std::string(tag) + ":") != std::string::npos) {
                text = replay_response(i, replay_plan()[i].correct);
                break;
            }
        }
        nlohmann::json reply = {
            {"choices",
             {{{"message", {{"role", "assistant"}, {"content", text}}},
               {"finish_reason", "stop"}}}},
        };
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    harness::RunConfig recording = base;
    recording.backend.kind = llm::BackendKind::recording;
    recording.backend.base_url = "http://127.0.0.1:" + std::to_string(port);
    recording.backend.record_path = (root / "recorded.jsonl").string();
    recording.out_dir = root / "recorded-out";
    harness::RunResult recorded_result = harness::run(recording);
    server.stop();
    server_thread.join();
    report_matches_plan(recorded_result.report, check, "recording run");

    harness::RunConfig replay = base;
    replay.backend.kind = llm::BackendKind::scripted;
    replay.backend.script_path = recording.backend.record_path;
    replay.out_dir = root / "replayed-out";
    harness::RunResult replayed_result = harness::run(replay);
    report_matches_plan(replayed_result.report, check, "replayed run");

    check.require(slurp(recording.out_dir / "report.json") ==
                      slurp(replay.out_dir / "report.json"),
                  "replayed report.json differs from recorded run");
    check.require(slurp(recording.out_dir / "transcripts.jsonl") ==
                      slurp(replay.out_dir / "transcripts.jsonl"),
                  "replayed transcripts differ from recorded run");
    check.require(slurp(scripted.out_dir / "report.json") ==
                      slurp(replay.out_dir / "report.json"),
                  "scripted and replayed reports differ");
}

/// Replays a fixed response list; used for the pipeline criterion.
class SequenceBackend : public llm::Backend {
public:
    explicit SequenceBackend(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    llm::CompletionResponse complete(const llm::CompletionRequest& request) override {
        llm::validate(request);
        if (next_ >= responses_.size()) throw Error("sequence backend exhausted");
        llm::CompletionResponse response;
        response.text = responses_[next_++];
        return response;
    }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

void recursive_pipeline(Checker& check) {
    const std::string proposal =
        prompts::render(prompts::builtin("math-json"), prompts::RenderFormat::json);
    prompts::TaskInstance task;
    task.id = "t";
    task.statement = "What is 2+2?";

    for (int depth = 1; depth <= mppt::kMaxRecursionDepth; ++depth) {
        std::vector<std::string> responses(depth, proposal);
        responses.push_back("The answer is $\\boxed{4}$.");
        SequenceBackend backend(responses);
        auto meta_meta =
            mppt::wrap_prompting_task(mppt::PromptingTaskKind::revise_for_reasoning, "Solve it");
        mppt::PipelineTrace trace = mppt::recursive_solve(backend, meta_meta, task, depth);
        check.require(trace.stages.size() == static_cast<std::size_t>(depth) + 1,
                      "depth " + std::to_string(depth) + " trace has " +
                          std::to_string(trace.stages.size()) + " stages");
        check.require(trace.stages.back().role == mppt::StageRole::executor,
                      "last stage must be the executor");
        check.require(trace.final_output.find("\\boxed{4}") != std::string::npos,
                      "executor output missing");
    }

    SequenceBackend garbage({"garbage {{{"});
    auto meta_meta =
        mppt::wrap_prompting_task(mppt::PromptingTaskKind::revise_for_reasoning, "Solve it");
    bool aborted = false;
    try {
        mppt::recursive_solve(garbage, meta_meta, task, 1);
    } catch (const mppt::ProposalUnparseable& e) {
        aborted = true;
        check.require(e.partial_trace().stages.size() == 1,
                      "partial trace must hold the failed proposer stage");
        check.require(!e.partial_trace().stages[0].parsed.has_value(),
                      "failed stage must record no parse");
    }
    check.require(aborted, "unparseable proposal must abort the pipeline");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Checker&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"game24-oracle-equivalence", game24_oracle_equivalence},
        {"paper-solve-rate-1362", paper_solve_rate},
        {"evaluator-fixture-suite", evaluator_fixture_suite},
        {"template-goldens", template_goldens},
        {"functor-law-suite", functor_law_suite},
        {"replay-harness-determinism", replay_harness_determinism},
        {"recursive-pipeline", recursive_pipeline},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Checker check;
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        if (check.failures == 0) {
            std::printf("[PASS] %s\n", criterion.name);
        } else {
            ++failed;
            std::printf("[FAIL] %s — %s\n", criterion.name, check.detail.c_str());
        }
    }
    if (failed) {
        std::printf("%d of %zu acceptance criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/errors.hpp"

namespace metaprompt::llm {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& name);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    std::string model = "qwen-72b-base";
    double temperature = 0.0;
    int max_tokens = 2048;
    std::vector<std::string> stop;

    friend bool operator==(const CompletionRequest&, const CompletionRequest&) = default;
};

/// Throws Error when messages are empty, temperature is not finite, or a
/// non-system message has empty content.
void validate(const CompletionRequest& request);

enum class FinishReason { stop, length, error };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& name);

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct CompletionResponse {
    std::string text;  // post stop-sequence truncation
    FinishReason finish_reason = FinishReason::stop;
    std::optional<TokenUsage> usage;
};

enum class BackendKind { http, scripted, recording };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& name);

struct BackendConfig {
    BackendKind kind = BackendKind::scripted;
    std::string base_url;     // http, recording
    std::string api_key;      // http, recording; falls back to env
    std::string script_path;  // scripted
    std::string record_path;  // recording
    int timeout_seconds = 120;
};

/// Stable identity of a request for record/replay: a hash of the canonical
/// serialization of messages, model, stop and temperature. max_tokens is
/// excluded so recorded scripts survive generation-length tuning.
std::string fingerprint(const CompletionRequest& request);

/// Cuts text at the first occurrence of any stop string. Idempotent.
std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop);

class Backend {
public:
    virtual ~Backend() = default;
    /// Thread-safe. Throws BackendError / UnknownFingerprint / Timeout.
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);
std::unique_ptr<Backend> make_scripted_backend(const std::filesystem::path& script_path);
std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::filesystem::path& record_path);

CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request);

struct CompletionOutcome {
    std::size_t index = 0;
    std::optional<CompletionResponse> response;  // set on success
    std::string error;                           // set on per-item failure
    bool ok() const { return response.has_value(); }
};

/// Runs all requests with at most max_in_flight outstanding at once. Results
/// come back in input order; per-item errors are carried in the outcomes and
/// never abort the batch.
std::vector<CompletionOutcome> complete_batch(Backend& backend,
                                              const std::vector<CompletionRequest>& requests,
                                              std::size_t max_in_flight);
std::vector<CompletionOutcome> complete_batch(const BackendConfig& config,
                                              const std::vector<CompletionRequest>& requests,
                                              std::size_t max_in_flight);

// Script files are JSONL: {"fingerprint": ..., "response_text": ..., "finish_reason": ...}
struct ScriptEntry {
    std::string fingerprint;
    std::string response_text;
    FinishReason finish_reason = FinishReason::stop;
};

void append_script_entry(const std::filesystem::path& path, const ScriptEntry& entry);
std::map<std::string, ScriptEntry> load_script(const std::filesystem::path& path);

/// API key / base URL resolution: explicit config wins, then METAPROMPT_API_KEY
/// / METAPROMPT_BASE_URL, then OPENAI_API_KEY / OPENAI_BASE_URL.
std::string resolve_api_key(const BackendConfig& config);
std::string resolve_base_url(const BackendConfig& config);

}  // namespace metaprompt::llm

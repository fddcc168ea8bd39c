#include "metaprompt/client.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace metaprompt::llm {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

std::string env_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value ? value : "";
}

}  // namespace

std::string to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw Error("unknown chat role: " + name);
}

std::string to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from_string(const std::string& name) {
    if (name == "stop") return FinishReason::stop;
    if (name == "length") return FinishReason::length;
    return FinishReason::error;
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::http: return "http";
        case BackendKind::scripted: return "scripted";
        case BackendKind::recording: return "recording";
    }
    return "scripted";
}

BackendKind backend_kind_from_string(const std::string& name) {
    if (name == "http") return BackendKind::http;
    if (name == "scripted") return BackendKind::scripted;
    if (name == "recording") return BackendKind::recording;
    throw Error("unknown backend kind: " + name);
}

void validate(const CompletionRequest& request) {
    if (request.messages.empty()) throw Error("completion request has no messages");
    if (!std::isfinite(request.temperature)) throw Error("temperature must be finite");
    if (request.temperature < 0) throw Error("temperature must be >= 0");
    for (const auto& message : request.messages) {
        if (message.role != Role::system && message.content.empty()) {
            throw Error("non-system message with empty content");
        }
    }
}

std::string fingerprint(const CompletionRequest& request) {
    ordered_json j;
    j["messages"] = ordered_json::array();
    for (const auto& message : request.messages) {
        ordered_json jm;
        jm["content"] = message.content;
        jm["role"] = to_string(message.role);
        j["messages"].push_back(std::move(jm));
    }
    j["model"] = request.model;
    j["stop"] = request.stop;
    j["temperature"] = format_temperature(request.temperature);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop) {
    std::size_t cut = std::string::npos;
    for (const auto& s : stop) {
        if (s.empty()) continue;
        std::size_t pos = text.find(s);
        if (pos != std::string::npos && pos < cut) cut = pos;
    }
    if (cut != std::string::npos) text.resize(cut);
    return text;
}

void append_script_entry(const std::filesystem::path& path, const ScriptEntry& entry) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open script file for append: " + path.string());
    ordered_json j;
    j["fingerprint"] = entry.fingerprint;
    j["response_text"] = entry.response_text;
    j["finish_reason"] = to_string(entry.finish_reason);
    out << j.dump() << "\n";
}

std::map<std::string, ScriptEntry> load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open script file: " + path.string());
    std::map<std::string, ScriptEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("bad script line: ") + e.what());
        }
        ScriptEntry entry;
        entry.fingerprint = j.at("fingerprint").get<std::string>();
        entry.response_text = j.at("response_text").get<std::string>();
        entry.finish_reason =
            finish_reason_from_string(j.value("finish_reason", std::string("stop")));
        entries[entry.fingerprint] = std::move(entry);
    }
    return entries;
}

std::string resolve_api_key(const BackendConfig& config) {
    if (!config.api_key.empty()) return config.api_key;
    std::string key = env_or_empty("METAPROMPT_API_KEY");
    if (key.empty()) key = env_or_empty("OPENAI_API_KEY");
    return key;
}

std::string resolve_base_url(const BackendConfig& config) {
    if (!config.base_url.empty()) return config.base_url;
    std::string url = env_or_empty("METAPROMPT_BASE_URL");
    if (url.empty()) url = env_or_empty("OPENAI_BASE_URL");
    return url;
}

namespace {

class HttpBackend : public Backend {
public:
    explicit HttpBackend(const BackendConfig& config)
        : api_key_(resolve_api_key(config)), timeout_seconds_(config.timeout_seconds) {
        std::string url = resolve_base_url(config);
        if (url.empty()) throw Error("http backend requires a base URL");
        // split scheme://host[:port] from an optional path prefix
        std::size_t scheme = url.find("://");
        std::size_t path = scheme == std::string::npos ? url.find('/')
                                                       : url.find('/', scheme + 3);
        if (path == std::string::npos) {
            origin_ = url;
        } else {
            origin_ = url.substr(0, path);
            path_prefix_ = url.substr(path);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    CompletionResponse complete(const CompletionRequest& request) override {
        validate(request);
        ordered_json body;
        body["model"] = request.model;
        body["messages"] = ordered_json::array();
        for (const auto& message : request.messages) {
            ordered_json jm;
            jm["role"] = to_string(message.role);
            jm["content"] = message.content;
            body["messages"].push_back(std::move(jm));
        }
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        if (!request.stop.empty()) body["stop"] = request.stop;

        httplib::Client client(origin_);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto result = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                                  "application/json");
        if (!result) {
            auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
                throw Timeout(httplib::to_string(err));
            }
            throw BackendError(0, httplib::to_string(err));
        }
        if (result->status != 200) throw BackendError(result->status, result->body);

        ordered_json j;
        try {
            j = ordered_json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(result->status, std::string("bad response body: ") + e.what());
        }
        CompletionResponse response;
        try {
            const auto& choice = j.at("choices").at(0);
            response.text = choice.at("message").at("content").get<std::string>();
            response.finish_reason =
                finish_reason_from_string(choice.value("finish_reason", std::string("stop")));
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(result->status, std::string("unexpected response shape: ") + e.what());
        }
        if (j.contains("usage")) {
            TokenUsage usage;
            usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            usage.completion_tokens = j["usage"].value("completion_tokens", 0);
            response.usage = usage;
        }
        // client-side safety net; servers do not always honor stop sequences
        std::string truncated = truncate_at_stop(response.text, request.stop);
        if (truncated.size() != response.text.size()) {
            response.text = std::move(truncated);
            response.finish_reason = FinishReason::stop;
        }
        return response;
    }

private:
    std::string origin_;
    std::string path_prefix_;
    std::string api_key_;
    int timeout_seconds_;
};

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(const std::filesystem::path& path)
        : entries_(load_script(path)) {}

    CompletionResponse complete(const CompletionRequest& request) override {
        validate(request);
        const std::string fp = fingerprint(request);
        auto it = entries_.find(fp);
        if (it == entries_.end()) throw UnknownFingerprint(fp);
        CompletionResponse response;
        response.text = truncate_at_stop(it->second.response_text, request.stop);
        response.finish_reason = it->second.finish_reason;
        return response;
    }

private:
    const std::map<std::string, ScriptEntry> entries_;  // read-only after load
};

class RecordingBackend : public Backend {
public:
    RecordingBackend(std::unique_ptr<Backend> inner, std::filesystem::path record_path)
        : inner_(std::move(inner)), record_path_(std::move(record_path)) {}

    CompletionResponse complete(const CompletionRequest& request) override {
        CompletionResponse response = inner_->complete(request);
        ScriptEntry entry{fingerprint(request), response.text, response.finish_reason};
        std::lock_guard<std::mutex> lock(write_mutex_);
        append_script_entry(record_path_, entry);
        return response;
    }

private:
    std::unique_ptr<Backend> inner_;
    std::filesystem::path record_path_;
    std::mutex write_mutex_;
};

}  // namespace

std::unique_ptr<Backend> make_scripted_backend(const std::filesystem::path& script_path) {
    return std::make_unique<ScriptedBackend>(script_path);
}

std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::filesystem::path& record_path) {
    return std::make_unique<RecordingBackend>(std::move(inner), record_path);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
        case BackendKind::http: return std::make_unique<HttpBackend>(config);
        case BackendKind::scripted: {
            if (config.script_path.empty()) throw Error("scripted backend requires script_path");
            return make_scripted_backend(config.script_path);
        }
        case BackendKind::recording: {
            if (config.record_path.empty()) throw Error("recording backend requires record_path");
            return make_recording_backend(std::make_unique<HttpBackend>(config),
                                          config.record_path);
        }
    }
    throw Error("unknown backend kind");
}

CompletionResponse complete(const BackendConfig& config, const CompletionRequest& request) {
    return make_backend(config)->complete(request);
}

std::vector<CompletionOutcome> complete_batch(Backend& backend,
                                              const std::vector<CompletionRequest>& requests,
                                              std::size_t max_in_flight) {
    if (max_in_flight < 1) throw Error("max_in_flight must be >= 1");
    std::vector<CompletionOutcome> outcomes(requests.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            outcomes[i].index = i;
            try {
                outcomes[i].response = backend.complete(requests[i]);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };
    const std::size_t workers = std::min(max_in_flight, requests.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

std::vector<CompletionOutcome> complete_batch(const BackendConfig& config,
                                              const std::vector<CompletionRequest>& requests,
                                              std::size_t max_in_flight) {
    auto backend = make_backend(config);
    return complete_batch(*backend, requests, max_in_flight);
}

}  // namespace metaprompt::llm

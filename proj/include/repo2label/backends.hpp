#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "repo2label/util/concurrency.hpp"

namespace repo2label {

struct ChatMessage {
    std::string role; // "system" | "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// One stateless chat-completion request. Each call re-sends full context;
/// backends never retain conversation state.
struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<long> seed = 0;

    bool operator==(const CompletionRequest&) const = default;
};

/// Canonical JSON encoding of a request (stable key order); the SHA-256 of
/// these bytes keys replay transcripts. The model is transcript metadata,
/// not part of the key, so recordings replay under any backend label.
std::string canonical_request_json(const CompletionRequest& request);
std::string request_hash(const CompletionRequest& request);

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    virtual std::string complete(const CompletionRequest& request) = 0;

    virtual std::string name() const = 0;
    virtual std::string model() const = 0;
};

// ---- live HTTP chat-completion client ----------------------------------

struct HttpBackendConfig {
    std::string base_url;             // e.g. https://api.openai.com
    std::string model;                // e.g. gpt-4o
    std::string api_key;              // from REPO2LABEL_LLM_KEY
    std::string completions_path = "/v1/chat/completions";
    int max_retries = 3;              // bounded retries with exponential backoff
    double initial_backoff_seconds = 0.5;
    double requests_per_second = 1.0; // token bucket rate
    double burst = 4.0;
    int timeout_seconds = 120;
};

/// Talks the common chat-completion wire shape: messages array in, choices
/// array out. Retries 429/5xx/transport errors with exponential backoff and
/// raises BackendUnavailable once retries are exhausted.
class HttpChatBackend : public CompletionBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config);

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "live"; }
    std::string model() const override { return config_.model; }

private:
    HttpBackendConfig config_;
    concurrency::TokenBucket limiter_;
};

// ---- record / replay ---------------------------------------------------

/// Serves replies from content-addressed transcripts: one JSON file per
/// request hash holding the request and an ordered reply list. Repeats of an
/// identical request consume successive replies (the last position is not
/// recycled; exhaustion is an error). Missing transcripts raise
/// BackendUnavailable.
class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::string transcript_dir, std::string model_label = "replay");

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "replay"; }
    std::string model() const override { return model_label_; }

private:
    std::string dir_;
    std::string model_label_;
    std::mutex mu_;
    std::unordered_map<std::string, std::size_t> cursors_;
};

/// Wraps another backend and appends every (request, reply) pair to the
/// transcript directory, in the format ReplayBackend reads.
class RecordingBackend : public CompletionBackend {
public:
    RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::string transcript_dir);

    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return inner_->name(); }
    std::string model() const override { return inner_->model(); }

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::string dir_;
    std::mutex mu_;
};

/// Offline heuristic backend for smoke tests: regex patterns over the file
/// payload (model-name tokens, "watermark", "encrypt", ...) rendered in the
/// reply grammar. No network, deterministic.
class StubBackend : public CompletionBackend {
public:
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "stub"; }
    std::string model() const override { return "rule-based"; }
};

} // namespace repo2label

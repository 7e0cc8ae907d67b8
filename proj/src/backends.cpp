#include "repo2label/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "repo2label/errors.hpp"
#include "repo2label/label_schema.hpp"
#include "repo2label/util/hash.hpp"
#include "repo2label/util/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace repo2label {

std::string canonical_request_json(const CompletionRequest& request) {
    json j;
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    j["messages"] = std::move(messages);
    j["temperature"] = request.temperature;
    j["seed"] = request.seed ? json(*request.seed) : json(nullptr);
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    return j.dump();
}

std::string request_hash(const CompletionRequest& request) {
    return hash::sha256_hex(canonical_request_json(request));
}

// ---- live HTTP chat-completion client ----------------------------------

HttpChatBackend::HttpChatBackend(HttpBackendConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second, config_.burst) {}

namespace {

std::optional<int> parse_retry_after(const httplib::Response& res) {
    if (!res.has_header("Retry-After")) return std::nullopt;
    try {
        return std::stoi(res.get_header_value("Retry-After"));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

} // namespace

std::string HttpChatBackend::complete(const CompletionRequest& request) {
    json body;
    body["model"] = config_.model;
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double backoff =
                config_.initial_backoff_seconds * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        }
        limiter_.acquire();

        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};

        auto res = client.Post(config_.completions_path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json reply;
            try {
                reply = json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw BackendUnavailable("completion response is not JSON: " +
                                         std::string(e.what()));
            }
            if (!reply.contains("choices") || !reply["choices"].is_array() ||
                reply["choices"].empty()) {
                throw BackendUnavailable("completion response has no choices: " +
                                         body_excerpt(res->body));
            }
            const auto& message = reply["choices"][0]["message"];
            if (!message.contains("content") || !message["content"].is_string()) {
                throw BackendUnavailable("completion choice has no message content: " +
                                         body_excerpt(res->body));
            }
            return message["content"].get<std::string>();
        }
        if (res->status == 401 || res->status == 403) {
            throw BackendUnavailable("completion endpoint rejected credentials (HTTP " +
                                     std::to_string(res->status) +
                                     "); check REPO2LABEL_LLM_KEY");
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            if (auto retry_after = parse_retry_after(*res)) {
                std::this_thread::sleep_for(std::chrono::seconds(*retry_after));
            }
            continue;
        }
        throw BackendUnavailable("completion endpoint returned HTTP " +
                                 std::to_string(res->status) + ": " + body_excerpt(res->body));
    }
    throw BackendUnavailable("completion endpoint unreachable after " +
                             std::to_string(config_.max_retries + 1) +
                             " attempts; last error: " + last_error);
}

// ---- record / replay ---------------------------------------------------

namespace {

fs::path transcript_path(const std::string& dir, const std::string& hash) {
    return fs::path(dir) / (hash + ".json");
}

} // namespace

ReplayBackend::ReplayBackend(std::string transcript_dir, std::string model_label)
    : dir_(std::move(transcript_dir)), model_label_(std::move(model_label)) {}

std::string ReplayBackend::complete(const CompletionRequest& request) {
    const std::string hash = request_hash(request);
    const fs::path path = transcript_path(dir_, hash);

    std::lock_guard<std::mutex> lock(mu_);
    std::ifstream in(path);
    if (!in) {
        throw BackendUnavailable("no replay transcript for request " + hash.substr(0, 12) +
                                 "... under " + dir_);
    }
    json transcript;
    try {
        in >> transcript;
    } catch (const json::parse_error& e) {
        throw BackendUnavailable("replay transcript " + path.string() +
                                 " is not valid JSON: " + std::string(e.what()));
    }
    if (!transcript.contains("replies") || !transcript["replies"].is_array()) {
        throw BackendUnavailable("replay transcript " + path.string() + " has no replies array");
    }
    const auto& replies = transcript["replies"];
    const std::size_t index = cursors_[hash]++;
    if (index >= replies.size()) {
        throw BackendUnavailable("replay transcript for request " + hash.substr(0, 12) +
                                 "... exhausted after " + std::to_string(replies.size()) +
                                 " replies");
    }
    if (!replies[index].is_string()) {
        throw BackendUnavailable("replay transcript " + path.string() + " reply " +
                                 std::to_string(index) + " is not a string");
    }
    return replies[index].get<std::string>();
}

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner,
                                   std::string transcript_dir)
    : inner_(std::move(inner)), dir_(std::move(transcript_dir)) {}

std::string RecordingBackend::complete(const CompletionRequest& request) {
    const std::string reply = inner_->complete(request);
    const std::string hash = request_hash(request);
    const fs::path path = transcript_path(dir_, hash);

    std::lock_guard<std::mutex> lock(mu_);
    fs::create_directories(dir_);
    json transcript;
    {
        std::ifstream in(path);
        if (in) {
            try {
                in >> transcript;
            } catch (const json::parse_error&) {
                transcript = json();
            }
        }
    }
    if (!transcript.is_object() || !transcript.contains("replies")) {
        transcript = json{{"request", json::parse(canonical_request_json(request))},
                          {"model", inner_->model()},
                          {"replies", json::array()}};
    }
    transcript["replies"].push_back(reply);
    std::ofstream out(path, std::ios::trunc);
    out << transcript.dump(2) << "\n";
    if (!out) {
        throw BackendUnavailable("cannot write replay transcript " + path.string());
    }
    return reply;
}

// ---- offline heuristic stub --------------------------------------------

namespace {

struct Hit {
    std::string value;     // rendered VALUE: payload
    std::string reference; // the line the evidence sits on
};

/// The full line of `text` containing byte `pos`.
std::string line_at(const std::string& text, std::size_t pos) {
    std::size_t begin = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    begin = (begin == std::string::npos) ? 0 : begin + 1;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::optional<Hit> first_match(const std::string& payload, const std::regex& pattern) {
    std::smatch m;
    if (!std::regex_search(payload, m, pattern)) return std::nullopt;
    return Hit{m.str(), line_at(payload, static_cast<std::size_t>(m.position()))};
}

/// Distinct matches (case-insensitive dedup) joined with "; ", referenced
/// by the line of the first one.
std::optional<Hit> all_matches(const std::string& payload, const std::regex& pattern) {
    std::vector<std::string> values;
    std::vector<std::string> seen;
    std::optional<std::string> reference;
    auto begin = std::sregex_iterator(payload.begin(), payload.end(), pattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::string value = it->str();
        const std::string key = text::to_lower_ascii(value);
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        values.push_back(value);
        if (!reference) reference = line_at(payload, static_cast<std::size_t>(it->position()));
    }
    if (values.empty()) return std::nullopt;
    return Hit{text::join(values, "; "), *reference};
}

const std::regex& pattern(const char* expr) {
    // The stub's pattern set is fixed, so a per-expression static cache is safe.
    static std::mutex mu;
    static std::unordered_map<std::string, std::unique_ptr<std::regex>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[expr];
    if (!slot) {
        slot = std::make_unique<std::regex>(expr, std::regex::ECMAScript | std::regex::icase);
    }
    return *slot;
}

std::optional<Hit> detect(LabelField field, const std::string& payload) {
    switch (field) {
    case LabelField::BaseModel:
        return all_matches(payload,
                           pattern("(gpt-4o|gpt-4-turbo|gpt-4|gpt-3\\.5-turbo|"
                                   "text-davinci-00[23]|text-embedding-ada-002|"
                                   "claude-[A-Za-z0-9.\\-]+|llama[-_ ]?[23][A-Za-z0-9.\\-]*|"
                                   "gemini-[A-Za-z0-9.\\-]+|stable[- ]?diffusion[A-Za-z0-9]*)"));
    case LabelField::ToolModality:
        return all_matches(
            payload,
            pattern("(text-to-text|text-to-image|image-to-text|text-to-speech|speech-to-text|"
                    "text to image|image to text)"));
    case LabelField::ToolFunctionality: {
        static const std::pair<const char*, const char*> kCapabilities[] = {
            {"(chatbot|chat bot|conversational assistant)", "Chatbot"},
            {"(image generation|generates? images?)", "Image Generation"},
            {"summariz", "Summarization"},
            {"translat", "Translation"},
            {"(code (generation|completion)|coding assistant)", "Code Generation"},
            {"(question answering|answers? questions?)", "Question Answering"},
        };
        std::vector<std::string> values;
        std::optional<std::string> reference;
        for (const auto& [expr, name] : kCapabilities) {
            if (auto hit = first_match(payload, pattern(expr))) {
                values.push_back(name);
                if (!reference) reference = hit->reference;
            }
        }
        if (values.empty()) return std::nullopt;
        return Hit{text::join(values, "; "), *reference};
    }
    case LabelField::WorkingDetails:
        return first_match(
            payload,
            pattern("https?://[^\\s)\"']*(docs|documentation|wiki|readthedocs)[^\\s)\"']*"));
    case LabelField::ControllerContact:
        return first_match(payload,
                           pattern("[A-Za-z0-9._%+\\-]+@[A-Za-z0-9.\\-]+\\.[A-Za-z]{2,}"));
    case LabelField::TargetUsers:
        return first_match(payload, pattern("(researchers|developers|students|educators|"
                                            "data scientists|general public)"));
    case LabelField::DataRetention:
        return first_match(payload, pattern("(retention|retained for|stored for [0-9]|"
                                            "deleted? after|expires? after)"));
    case LabelField::RightToAccess:
        return first_match(payload, pattern("(right to access|access request|"
                                            "export (your|my|their) data|download a copy)"));
    case LabelField::RightToBeForgotten:
        return first_match(payload,
                           pattern("(right to be forgotten|right to erasure|deleteConversation|"
                                   "delete (your|my|their) (data|account|conversations?|"
                                   "history))"));
    case LabelField::RightToLodgeComplaints:
        return first_match(payload, pattern("(lodge a complaint|complaints?|\"Flag\" button|"
                                            "report (abuse|an issue)|moderator)"));
    case LabelField::AIGeneratedWatermarking:
        return first_match(payload, pattern("watermark"));
    case LabelField::PromptGuardrail:
        return first_match(payload,
                           pattern("(guardrail|safety_checker|safety_setting|content filter|"
                                   "moderation|input/output filter|llama ?guard)"));
    case LabelField::RiskNotification:
        return first_match(payload,
                           pattern("(disclaimer|caution is advised|at your own risk|"
                                   "may (produce|generate) (inaccurate|offensive|harmful)|"
                                   "not guaranteed to be free)"));
    case LabelField::DataEncryption:
        return first_match(payload, pattern("(encrypt|decrypt|fernet|\\bAES\\b|cipher)"));
    case LabelField::ProtectionOfMinors:
        return first_match(payload, pattern("(\\bminors?\\b|\\bchild(ren)?\\b|under 1[38]|"
                                            "age verification|parental)"));
    }
    return std::nullopt;
}

} // namespace

std::string StubBackend::complete(const CompletionRequest& request) {
    // Recover the unit's field list from the @terminology lines of the
    // system message and the payload from the last user message.
    std::string payload;
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role != "user") continue;
        const std::size_t marker = it->content.rfind("File Content:\n");
        payload = (marker == std::string::npos)
                      ? it->content
                      : it->content.substr(marker + std::string("File Content:\n").size());
        break;
    }

    std::vector<LabelField> fields;
    if (!request.messages.empty() && request.messages.front().role == "system") {
        bool in_terminology = false;
        for (const auto& line : text::split_lines(request.messages.front().content)) {
            const auto trimmed = text::trim(line);
            if (trimmed == "@terminology") {
                in_terminology = true;
                continue;
            }
            if (in_terminology && !trimmed.empty() && trimmed.front() == '@') break;
            if (!in_terminology || trimmed.size() < 2 || trimmed.substr(0, 2) != "- ") continue;
            const std::size_t colon = trimmed.find(": ");
            if (colon == std::string_view::npos) continue;
            if (auto field = parse_field(trimmed.substr(2, colon - 2))) fields.push_back(*field);
        }
    }
    if (fields.empty()) {
        for (const auto& spec : field_catalog()) fields.push_back(spec.field);
    }

    std::ostringstream os;
    bool first = true;
    for (LabelField field : fields) {
        if (!first) os << "\n";
        first = false;
        const auto hit = detect(field, payload);
        os << "FIELD: " << display_name(field) << "\n";
        if (!hit) {
            os << "VALUE: N/A\nREFERENCE: N/A\n";
            continue;
        }
        if (value_kind_of(field) == ValueKind::Binary) {
            os << "VALUE: Yes\n";
        } else {
            os << "VALUE: " << hit->value << "\n";
        }
        os << "REFERENCE: " << hit->reference << "\n";
    }
    return os.str();
}

} // namespace repo2label

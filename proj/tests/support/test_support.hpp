#pragma once

#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "repo2label/backends.hpp"

namespace r2l_test {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// One scripted exchange: when every `contains` token appears in the request
/// (all message contents concatenated), the next queued reply is served.
/// Rules are tried in order; exhausted rules are skipped.
struct ScriptRule {
    std::vector<std::string> contains;
    std::deque<std::string> replies;
};

/// Deterministic backend for tests: serves scripted replies, and an all-N/A
/// reply in the unit's grammar when no rule matches.
class ScriptedBackend : public repo2label::CompletionBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules, std::string model_label = "scripted");

    std::string complete(const repo2label::CompletionRequest& request) override;
    std::string name() const override { return "scripted"; }
    std::string model() const override { return model_; }

private:
    std::vector<ScriptRule> rules_;
    std::string model_;
    std::mutex mu_;
};

/// All-N/A reply for whatever unit the request's system message describes.
std::string default_na_reply(const repo2label::CompletionRequest& request);

} // namespace r2l_test

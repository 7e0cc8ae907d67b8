#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repo2label/backends.hpp"
#include "repo2label/merge.hpp"
#include "repo2label/render.hpp"
#include "repo2label/repo_ingest.hpp"

namespace repo2label {

struct BackendChoice {
    enum class Kind { Live, Replay, Stub };
    Kind kind = Kind::Stub;
    HttpBackendConfig live;
    std::string replay_dir;
    /// When set, every (request, reply) is recorded here, whatever the
    /// inner backend.
    std::optional<std::string> record_dir;
};

struct RunConfig {
    RepoSource source = RepoSource::local(".");
    BackendChoice backend;
    PromptOptions prompt;
    bool verification_enabled = true;
    ReflectOptions reflect;
    FilterPolicy filter = FilterPolicy::defaults();
    FetchOptions fetch;
    std::optional<std::string> auth_token; // from REPO2LABEL_VCS_TOKEN
    int parallelism = 4;

    std::string output_dir = ".";
    bool write_json = true;
    bool write_html = true;
    bool write_markdown = true;

    /// Overrides the label timestamp. Without it, replay and stub runs use
    /// the epoch (keeps reruns byte-identical) and live runs use the clock.
    std::optional<std::string> timestamp;
};

struct SkippedUnit {
    std::string file_path;
    std::string unit; // section id
    std::string reason;
};

struct RunResult {
    RepositoryLabel label;
    std::vector<VerifiedSheet> sheets; // canonical order: (file, section)
    std::vector<SkippedUnit> skipped;
    nlohmann::ordered_json manifest;
};

/// Construct the configured backend. Throws ConfigError for an unusable
/// choice (live without an API key, replay without a transcript dir).
std::unique_ptr<CompletionBackend> make_backend(const BackendChoice& choice);

/// Full pipeline: ingest, extract per (file, section) on a worker pool,
/// verify (unless disabled), merge, build the manifest. Backend failures
/// skip the affected (file, section) unit and are listed in the manifest;
/// the run continues.
RunResult run_generate(const RunConfig& config, CompletionBackend& backend);

/// Write the selected renderings plus manifest.json into
/// config.output_dir; returns the paths written.
std::vector<std::string> write_outputs(const RunResult& result, const RunConfig& config);

/// "1970-01-01T00:00:00Z"-style UTC timestamp for the current clock.
std::string format_utc_now();

} // namespace repo2label

#include "repo2label/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include "repo2label/errors.hpp"
#include "repo2label/util/concurrency.hpp"
#include "repo2label/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace repo2label {

std::unique_ptr<CompletionBackend> make_backend(const BackendChoice& choice) {
    std::unique_ptr<CompletionBackend> backend;
    switch (choice.kind) {
    case BackendChoice::Kind::Live:
        if (choice.live.api_key.empty()) {
            throw ConfigError(
                "config: live backend requires an API key; set REPO2LABEL_LLM_KEY or --api-key");
        }
        if (choice.live.base_url.empty()) {
            throw ConfigError("config: live backend requires --base-url");
        }
        backend = std::make_unique<HttpChatBackend>(choice.live);
        break;
    case BackendChoice::Kind::Replay:
        if (choice.replay_dir.empty() || !fs::is_directory(choice.replay_dir)) {
            throw ConfigError("config: replay backend requires an existing transcript dir, got '" +
                              choice.replay_dir + "'");
        }
        backend = std::make_unique<ReplayBackend>(choice.replay_dir);
        break;
    case BackendChoice::Kind::Stub:
        backend = std::make_unique<StubBackend>();
        break;
    }
    if (choice.record_dir) {
        backend = std::make_unique<RecordingBackend>(
            std::shared_ptr<CompletionBackend>(std::move(backend)), *choice.record_dir);
    }
    return backend;
}

std::string format_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

namespace {

constexpr const char* kEpochTimestamp = "1970-01-01T00:00:00Z";

std::string resolve_timestamp(const RunConfig& config) {
    if (config.timestamp) return *config.timestamp;
    if (config.backend.kind == BackendChoice::Kind::Live) return format_utc_now();
    return kEpochTimestamp;
}

struct FieldStats {
    long attempts = 0;
    long reflections = 0;
    long verified_first_try = 0;
    long verified_after_reflection = 0;
    long demoted_na = 0;
    long unverified = 0;
};

ordered_json build_manifest(const RunConfig& config, const CompletionBackend& backend,
                            const LabelMetadata& metadata,
                            const std::vector<VerifiedSheet>& sheets,
                            const std::vector<SkippedUnit>& skipped) {
    std::map<LabelField, FieldStats> stats;
    for (const auto& sheet : sheets) {
        for (const auto& field : sheet.fields) {
            auto& s = stats[field.field];
            s.attempts += field.attempts;
            s.reflections += field.reflections;
            switch (field.status) {
            case VerifyStatus::VerifiedFirstTry: ++s.verified_first_try; break;
            case VerifyStatus::VerifiedAfterReflection: ++s.verified_after_reflection; break;
            case VerifyStatus::DemotedNA: ++s.demoted_na; break;
            case VerifyStatus::Unverified: ++s.unverified; break;
            }
        }
    }

    ordered_json manifest;
    manifest["schema_version"] = std::string(kSchemaVersion);
    manifest["tool_version"] = std::string(kToolVersion);
    manifest["generated_at"] = metadata.generated_at;
    manifest["repository"] = {{"locator", metadata.repository},
                              {"commit", metadata.commit ? ordered_json(*metadata.commit)
                                                         : ordered_json(nullptr)}};
    manifest["run"] = {{"backend", backend.name()},
                       {"model", backend.model()},
                       {"mode", metadata.mode},
                       {"verification", config.verification_enabled},
                       {"max_reflections", config.reflect.max_reflections},
                       {"prompt_template", std::string(prompt_template_version())},
                       {"prompt_template_hash", prompt_template_hash()},
                       {"parallelism", config.parallelism}};
    manifest["files"] = {{"analyzed", metadata.files_analyzed},
                         {"skipped", metadata.files_skipped}};

    ordered_json skipped_json = ordered_json::array();
    for (const auto& unit : skipped) {
        skipped_json.push_back(
            {{"file", unit.file_path}, {"unit", unit.unit}, {"reason", unit.reason}});
    }
    manifest["skipped_units"] = std::move(skipped_json);

    ordered_json fields = ordered_json::array();
    for (const auto& spec : field_catalog()) {
        const FieldStats s = stats.count(spec.field) ? stats[spec.field] : FieldStats{};
        fields.push_back({{"id", std::string(field_id(spec.field))},
                          {"attempts", s.attempts},
                          {"reflections", s.reflections},
                          {"verified_first_try", s.verified_first_try},
                          {"verified_after_reflection", s.verified_after_reflection},
                          {"demoted_na", s.demoted_na},
                          {"unverified", s.unverified}});
    }
    manifest["fields"] = std::move(fields);
    return manifest;
}

} // namespace

RunResult run_generate(const RunConfig& config, CompletionBackend& backend) {
    const RepoTree tree = fetch_repository(config.source, config.auth_token, config.fetch);
    const std::vector<FileRecord> files = filter_files(tree, config.filter);

    struct Task {
        std::size_t file_index;
        LabelSection section;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < files.size(); ++i) {
        for (LabelSection section : kSectionsInOrder) tasks.push_back({i, section});
    }

    const auto outcomes = concurrency::parallel_map(
        static_cast<std::size_t>(std::max(config.parallelism, 1)), tasks.size(),
        [&](std::size_t t) -> VerifiedSheet {
            const auto& file = files[tasks[t].file_index];
            const UnitDefinition unit = unit_for_section(tasks[t].section);
            const UnitExtraction extraction = extract_unit(unit, file, backend, config.prompt);
            if (!config.verification_enabled) return accept_unverified(extraction);
            return verify_sheet(extraction, file, unit, backend, config.prompt, config.reflect);
        });

    RunResult result;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (outcomes[t].ok()) {
            result.sheets.push_back(*outcomes[t].value);
        } else {
            result.skipped.push_back(SkippedUnit{files[tasks[t].file_index].path,
                                                 std::string(section_id(tasks[t].section)),
                                                 outcomes[t].error});
        }
    }
    std::sort(result.sheets.begin(), result.sheets.end(), [](const auto& a, const auto& b) {
        if (a.file_path != b.file_path) return a.file_path < b.file_path;
        return static_cast<int>(a.section) < static_cast<int>(b.section);
    });
    std::sort(result.skipped.begin(), result.skipped.end(), [](const auto& a, const auto& b) {
        if (a.file_path != b.file_path) return a.file_path < b.file_path;
        return a.unit < b.unit;
    });

    std::vector<std::string> skipped_files;
    for (const auto& unit : result.skipped) skipped_files.push_back(unit.file_path);
    std::sort(skipped_files.begin(), skipped_files.end());
    skipped_files.erase(std::unique(skipped_files.begin(), skipped_files.end()),
                        skipped_files.end());

    LabelMetadata metadata;
    metadata.repository = config.source.locator;
    metadata.commit = tree.commit;
    metadata.generated_at = resolve_timestamp(config);
    metadata.backend = backend.name();
    metadata.model = backend.model();
    metadata.mode = std::string(to_string(config.prompt.mode));
    metadata.verification = config.verification_enabled;
    metadata.prompt_template = std::string(prompt_template_version());
    metadata.prompt_template_hash = prompt_template_hash();
    metadata.files_analyzed = static_cast<int>(files.size());
    metadata.files_skipped = static_cast<int>(skipped_files.size());

    result.label = assemble_repository_label(result.sheets, metadata);
    result.manifest = build_manifest(config, backend, metadata, result.sheets, result.skipped);
    return result;
}

std::vector<std::string> write_outputs(const RunResult& result, const RunConfig& config) {
    fs::create_directories(config.output_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const fs::path path = fs::path(config.output_dir) / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error("pipeline: cannot write output file: " + path.string());
        written.push_back(path.string());
    };
    if (config.write_json) emit("label.json", render_machine(result.label));
    if (config.write_html) emit("label.html", render_html(result.label));
    if (config.write_markdown) emit("label.md", render_markdown(result.label));
    emit("manifest.json", result.manifest.dump(2) + "\n");
    return written;
}

} // namespace repo2label

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "repo2label/errors.hpp"
#include "repo2label/eval.hpp"
#include "repo2label/pipeline.hpp"
#include "repo2label/util/csv.hpp"
#include "repo2label/util/text.hpp"
#include "repo2label/version.hpp"

namespace fs = std::filesystem;
using namespace repo2label;

namespace {

// Options shared by `generate` and `evaluate` (which can generate
// predictions on the fly). Optional members stay empty unless the flag was
// passed, so the precedence chain flags > env > config file > defaults can
// be resolved afterwards.
struct RunOpts {
    std::string source;
    bool force_remote = false;
    bool force_local = false;

    std::optional<std::string> config_file;
    std::optional<std::string> backend;       // stub | replay | live
    std::optional<std::string> model;
    std::optional<std::string> base_url;
    std::optional<std::string> api_key;
    std::optional<std::string> replay_dir;
    std::optional<std::string> record_dir;
    std::optional<std::string> mode;          // zero-shot | few-shot
    std::optional<std::string> shots_file;
    bool no_verify = false;
    std::optional<int> max_reflections;
    std::optional<int> parallelism;
    std::optional<std::string> output_dir;
    std::optional<std::string> formats;       // comma list: json,html,md
    std::optional<std::string> timestamp;
    std::optional<std::string> repo_id;
    std::optional<std::string> api_base_url;
    std::optional<std::string> vcs_token;
    std::optional<std::uint64_t> max_file_bytes;
};

void add_run_options(CLI::App* cmd, RunOpts& opts, bool source_required) {
    auto* source =
        cmd->add_option("source", opts.source,
                        "Repository to analyze: a local directory, a tar/tar.gz/zip archive, "
                        "or a remote owner/name[@ref] coordinate");
    if (source_required) source->required();
    cmd->add_flag("--remote", opts.force_remote, "Treat the source as a remote coordinate");
    cmd->add_flag("--local", opts.force_local, "Treat the source as a local path");
    cmd->add_option("--config", opts.config_file, "JSON config file (lowest precedence)");
    cmd->add_option("--backend", opts.backend, "Completion backend: stub, replay or live");
    cmd->add_option("--model", opts.model, "Model name for the live backend");
    cmd->add_option("--base-url", opts.base_url, "Chat-completions base URL for the live backend");
    cmd->add_option("--api-key", opts.api_key,
                    "API key for the live backend (default: $REPO2LABEL_LLM_KEY)");
    cmd->add_option("--replay-dir", opts.replay_dir, "Transcript dir for the replay backend");
    cmd->add_option("--record-dir", opts.record_dir,
                    "Record every request/reply into this transcript dir");
    cmd->add_option("--mode", opts.mode, "Prompting mode: zero-shot or few-shot");
    cmd->add_option("--shots", opts.shots_file, "Shots JSON file for few-shot mode");
    cmd->add_flag("--no-verify", opts.no_verify, "Skip reference verification");
    cmd->add_option("--max-reflections", opts.max_reflections,
                    "Reflection rounds before demoting a bad reference to N/A");
    cmd->add_option("--parallelism", opts.parallelism, "Concurrent extraction units");
    cmd->add_option("--out", opts.output_dir, "Output directory");
    cmd->add_option("--formats", opts.formats, "Comma list of outputs: json,html,md");
    cmd->add_option("--timestamp", opts.timestamp, "Override the generated_at timestamp");
    cmd->add_option("--repo-id", opts.repo_id,
                    "Repository id used in predictions.csv (default: source basename)");
    cmd->add_option("--api-base-url", opts.api_base_url, "REST API base URL for remote sources");
    cmd->add_option("--vcs-token", opts.vcs_token,
                    "Auth token for remote sources (default: $REPO2LABEL_VCS_TOKEN)");
    cmd->add_option("--max-file-bytes", opts.max_file_bytes,
                    "Per-file size cap; larger files are excluded");
}

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (!value || !*value) return std::nullopt;
    return std::string(value);
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config: " + path + " must be a JSON object");
    return doc;
}

template <typename T>
void overlay(std::optional<T>& slot, const nlohmann::json& doc, const char* key) {
    if (slot) return; // a flag already claimed this setting
    auto it = doc.find(key);
    if (it == doc.end()) return;
    try {
        slot = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config: key '") + key + "' has the wrong type");
    }
}

std::string default_repo_id(const RepoSource& source) {
    if (source.kind == RepoSource::Kind::RemoteRepo) return source.name();
    fs::path path(source.locator);
    std::string name = path.filename().string();
    if (name.empty()) name = path.parent_path().filename().string();
    for (const auto& suffix : {".tar.gz", ".tgz", ".tar", ".zip"}) {
        if (name.size() > std::string(suffix).size() && name.ends_with(suffix)) {
            name.resize(name.size() - std::string(suffix).size());
            break;
        }
    }
    return name.empty() ? source.locator : name;
}

bool looks_like_remote_coordinate(const std::string& locator) {
    const std::size_t slash = locator.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 >= locator.size()) return false;
    if (locator.find('/', slash + 1) != std::string::npos) return false;
    return locator.find("..") == std::string::npos;
}

struct ResolvedRun {
    RunConfig config;
    std::string repo_id;
};

ResolvedRun resolve_run(RunOpts opts) {
    // Precedence: flags (already in opts) > env vars > config file > defaults.
    if (!opts.api_key) opts.api_key = env_value("REPO2LABEL_LLM_KEY");
    if (!opts.vcs_token) opts.vcs_token = env_value("REPO2LABEL_VCS_TOKEN");

    if (opts.config_file) {
        const nlohmann::json doc = load_config_file(*opts.config_file);
        overlay(opts.backend, doc, "backend");
        overlay(opts.model, doc, "model");
        overlay(opts.base_url, doc, "base_url");
        overlay(opts.api_key, doc, "api_key");
        overlay(opts.replay_dir, doc, "replay_dir");
        overlay(opts.record_dir, doc, "record_dir");
        overlay(opts.mode, doc, "mode");
        overlay(opts.shots_file, doc, "shots");
        overlay(opts.max_reflections, doc, "max_reflections");
        overlay(opts.parallelism, doc, "parallelism");
        overlay(opts.output_dir, doc, "output_dir");
        overlay(opts.formats, doc, "formats");
        overlay(opts.timestamp, doc, "timestamp");
        overlay(opts.repo_id, doc, "repo_id");
        overlay(opts.api_base_url, doc, "api_base_url");
        overlay(opts.vcs_token, doc, "vcs_token");
        overlay(opts.max_file_bytes, doc, "max_file_bytes");
        if (!opts.no_verify && doc.contains("verify") && doc["verify"].is_boolean()) {
            opts.no_verify = !doc["verify"].get<bool>();
        }
    }

    ResolvedRun resolved;
    RunConfig& config = resolved.config;

    if (opts.force_remote && opts.force_local) {
        throw ConfigError("config: --remote and --local are mutually exclusive");
    }
    const bool remote = opts.force_remote ||
                        (!opts.force_local && !fs::exists(opts.source) &&
                         looks_like_remote_coordinate(opts.source));
    config.source = remote ? RepoSource::remote(opts.source) : RepoSource::local(opts.source);

    const std::string backend_name = opts.backend.value_or("stub");
    if (backend_name == "stub") {
        config.backend.kind = BackendChoice::Kind::Stub;
    } else if (backend_name == "replay") {
        config.backend.kind = BackendChoice::Kind::Replay;
        config.backend.replay_dir = opts.replay_dir.value_or("");
    } else if (backend_name == "live") {
        config.backend.kind = BackendChoice::Kind::Live;
        config.backend.live.base_url = opts.base_url.value_or("");
        config.backend.live.model = opts.model.value_or("gpt-4o");
        config.backend.live.api_key = opts.api_key.value_or("");
    } else {
        throw ConfigError("config: unknown backend '" + backend_name +
                          "' (expected stub, replay or live)");
    }
    config.backend.record_dir = opts.record_dir;

    const std::string mode = opts.mode.value_or("zero-shot");
    if (mode == "zero-shot") {
        config.prompt.mode = Mode::ZeroShot;
    } else if (mode == "few-shot") {
        config.prompt.mode = Mode::FewShot;
        if (!opts.shots_file) {
            throw ConfigError("config: few-shot mode requires --shots");
        }
        config.prompt.shots = load_shots(*opts.shots_file);
    } else {
        throw ConfigError("config: unknown mode '" + mode +
                          "' (expected zero-shot or few-shot)");
    }

    config.verification_enabled = !opts.no_verify;
    if (opts.max_reflections) {
        if (*opts.max_reflections < 0) throw ConfigError("config: --max-reflections must be >= 0");
        config.reflect.max_reflections = *opts.max_reflections;
    }
    if (opts.parallelism) {
        if (*opts.parallelism < 1) throw ConfigError("config: --parallelism must be >= 1");
        config.parallelism = *opts.parallelism;
    }
    if (opts.max_file_bytes) config.filter.max_file_bytes = *opts.max_file_bytes;
    if (opts.api_base_url) config.fetch.api_base_url = *opts.api_base_url;
    config.auth_token = opts.vcs_token;
    config.output_dir = opts.output_dir.value_or(".");
    config.timestamp = opts.timestamp;

    if (opts.formats) {
        config.write_json = config.write_html = config.write_markdown = false;
        for (const auto& raw : text::split(*opts.formats, ",")) {
            const auto format = text::trim(raw);
            if (format == "json") {
                config.write_json = true;
            } else if (format == "html") {
                config.write_html = true;
            } else if (format == "md" || format == "markdown") {
                config.write_markdown = true;
            } else if (!format.empty()) {
                throw ConfigError("config: unknown format '" + std::string(format) + "'");
            }
        }
    }

    resolved.repo_id = opts.repo_id.value_or(default_repo_id(config.source));
    return resolved;
}

std::string gold_value_cell(const FieldValue& value) {
    if (value.is_na()) return "N/A";
    if (value.is_binary()) return value.yes() ? "Yes" : "No";
    return text::join(value.texts(), ";");
}

std::string predictions_csv(const std::string& repo_id, const std::vector<VerifiedSheet>& sheets) {
    std::ostringstream os;
    os << "repo,file_path,field,value\n";
    for (const auto& file : sheets_to_predictions(repo_id, sheets)) {
        std::size_t index = 0;
        for (const auto& spec : field_catalog()) {
            os << csv::write_row({file.repo, file.file_path, std::string(field_id(spec.field)),
                                  gold_value_cell(file.values[index])});
            ++index;
        }
    }
    return os.str();
}

PredictionSet predictions_from_annotations(const AnnotationSet& set) {
    std::map<std::pair<std::string, std::string>, PredictionFile> by_file;
    for (const auto& record : set.records) {
        auto [it, inserted] = by_file.try_emplace({record.repo, record.file_path});
        if (inserted) {
            it->second.repo = record.repo;
            it->second.file_path = record.file_path;
        }
        std::size_t index = 0;
        for (const auto& spec : field_catalog()) {
            if (spec.field == record.field) break;
            ++index;
        }
        it->second.values[index] = record.value;
    }
    PredictionSet predictions;
    for (auto& [key, file] : by_file) predictions.push_back(std::move(file));
    return predictions;
}

int cmd_generate(const RunOpts& opts) {
    const ResolvedRun resolved = resolve_run(opts);
    const auto backend = make_backend(resolved.config.backend);
    const RunResult result = run_generate(resolved.config, *backend);

    auto written = write_outputs(result, resolved.config);
    {
        const fs::path path = fs::path(resolved.config.output_dir) / "predictions.csv";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << predictions_csv(resolved.repo_id, result.sheets);
        if (!out) throw Error("pipeline: cannot write output file: " + path.string());
        written.push_back(path.string());
    }

    for (const auto& unit : result.skipped) {
        std::cerr << "warning: skipped " << unit.file_path << " [" << unit.unit
                  << "]: " << unit.reason << "\n";
    }
    std::cout << "analyzed " << result.label.metadata.files_analyzed << " files ("
              << result.label.metadata.files_skipped << " with skipped units)\n";
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_evaluate(const RunOpts& opts, const std::string& annotations_path,
                 const std::optional<std::string>& predictions_path,
                 const std::optional<std::string>& baseline_path, bool macro,
                 const std::optional<std::string>& metrics_out) {
    const AnnotationSet gold = load_annotations(annotations_path);

    PredictionSet predictions;
    if (predictions_path) {
        predictions = predictions_from_annotations(load_annotations(*predictions_path));
    } else {
        if (opts.source.empty()) {
            throw ConfigError("config: evaluate needs --predictions or a source to generate from");
        }
        const ResolvedRun resolved = resolve_run(opts);
        const auto backend = make_backend(resolved.config.backend);
        const RunResult result = run_generate(resolved.config, *backend);
        predictions = sheets_to_predictions(resolved.repo_id, result.sheets);
    }

    const ScoreOptions score_options{macro};
    const Metrics metrics = score(predictions, gold, score_options);
    std::cout << metrics_text(metrics);

    if (baseline_path) {
        const PredictionSet baseline =
            predictions_from_annotations(load_annotations(*baseline_path));
        const Metrics baseline_metrics = score(baseline, gold, score_options);
        std::cout << "\nbaseline -> current\n" << compare_runs(baseline_metrics, metrics).text();
    }
    if (metrics_out) {
        std::ofstream out(*metrics_out, std::ios::binary | std::ios::trunc);
        out << metrics_json(metrics);
        if (!out) throw Error("eval: cannot write metrics file: " + *metrics_out);
        std::cout << "wrote " << *metrics_out << "\n";
    }
    return 0;
}

std::string citation_text(const RegulationCitation& citation) {
    return std::string(display_name(citation.regulation)) + " (" + citation.region + ") " +
           text::join(citation.articles, " & ");
}

int cmd_catalog(const std::optional<std::string>& field_name) {
    if (field_name) {
        const auto field = parse_field(*field_name);
        if (!field) {
            std::cerr << "catalog: unknown field '" << *field_name << "'\n";
            return 1;
        }
        const FieldSpec& spec = spec_for(*field);
        std::cout << spec.display_name << " ["
                  << (spec.value_kind == ValueKind::Binary ? "Yes/No" : "free text") << ", "
                  << display_name(spec.section) << "]\n"
                  << "  " << spec.explanation << "\n";
        if (*field == LabelField::ControllerContact) {
            std::cout << "  * " << kControllerContactNote << "\n";
        }
        std::cout << "  Example: " << spec.example_answer << "\n"
                  << "  " << spec.provenance.size() << " regulation citations:\n";
        for (const auto& citation : spec.provenance) {
            std::cout << "    - " << citation_text(citation) << "\n";
        }
        return 0;
    }

    for (LabelSection section : kSectionsInOrder) {
        std::cout << display_name(section) << "\n";
        for (LabelField field : fields_of_section(section)) {
            const FieldSpec& spec = spec_for(field);
            std::cout << "  " << spec.display_name << " ["
                      << (spec.value_kind == ValueKind::Binary ? "Yes/No" : "free text") << ", "
                      << spec.provenance.size() << " citations]\n"
                      << "    " << spec.explanation << "\n";
        }
    }
    std::cout << "* " << kControllerContactNote << "\n";
    return 0;
}

int cmd_catalog_export(const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json doc;
        doc["schema_version"] = std::string(kSchemaVersion);
        nlohmann::ordered_json fields = nlohmann::ordered_json::array();
        for (const auto& spec : field_catalog()) {
            nlohmann::ordered_json citations = nlohmann::ordered_json::array();
            for (const auto& citation : spec.provenance) {
                citations.push_back({{"regulation", std::string(display_name(citation.regulation))},
                                     {"region", citation.region},
                                     {"articles", citation.articles}});
            }
            fields.push_back(
                {{"id", std::string(field_id(spec.field))},
                 {"name", spec.display_name},
                 {"section", std::string(section_id(spec.section))},
                 {"kind", spec.value_kind == ValueKind::Binary ? "binary" : "free_text"},
                 {"explanation", spec.explanation},
                 {"example", spec.example_answer},
                 {"citations", std::move(citations)}});
        }
        doc["fields"] = std::move(fields);
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    if (format == "csv") {
        std::cout << "field,regulation,region,articles\n";
        for (const auto& spec : field_catalog()) {
            for (const auto& citation : spec.provenance) {
                std::cout << csv::write_row({std::string(field_id(spec.field)),
                                             std::string(display_name(citation.regulation)),
                                             citation.region,
                                             text::join(citation.articles, " & ")});
            }
        }
        return 0;
    }
    std::cerr << "catalog: unknown export format '" << format << "' (expected json or csv)\n";
    return 1;
}

int cmd_verify_label(const std::string& label_path, const RunOpts& opts) {
    std::ifstream in(label_path, std::ios::binary);
    if (!in) {
        std::cerr << "verify-label: cannot open label file: " << label_path << "\n";
        return 1;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const RepositoryLabel label = parse_machine(buffer.str());

    const ResolvedRun resolved = resolve_run(opts);
    const RepoTree tree =
        fetch_repository(resolved.config.source, resolved.config.auth_token, resolved.config.fetch);
    std::map<std::string, std::string> contents;
    for (const auto& file : filter_files(tree, resolved.config.filter)) {
        contents[file.path] = file.content;
    }

    std::size_t checked = 0;
    std::size_t failures = 0;
    for (const auto& section : label.sections) {
        for (const auto& field : section.fields) {
            for (const auto& triple : field.evidence) {
                ++checked;
                const auto it = contents.find(triple.file_path);
                if (it == contents.end()) {
                    ++failures;
                    std::cerr << "FAIL " << display_name(field.field) << ": file not found: "
                              << triple.file_path << "\n";
                    continue;
                }
                if (!verify_reference(triple.reference, it->second)) {
                    ++failures;
                    std::cerr << "FAIL " << display_name(field.field) << ": " << triple.file_path
                              << ": reference not present in file content\n";
                }
            }
        }
    }
    if (failures > 0) {
        std::cerr << failures << " of " << checked << " evidence references failed to verify\n";
        return 1;
    }
    std::cout << "verified " << checked << " evidence references\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"repo2label: regulation-driven privacy nutrition labels for GAI code "
                 "repositories"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunOpts generate_opts;
    auto* generate = app.add_subcommand("generate", "Generate a privacy label for a repository");
    add_run_options(generate, generate_opts, true);

    RunOpts evaluate_opts;
    std::string annotations_path;
    std::optional<std::string> predictions_path;
    std::optional<std::string> baseline_path;
    std::optional<std::string> metrics_out;
    bool macro = false;
    auto* evaluate =
        app.add_subcommand("evaluate", "Score predictions against gold annotations");
    add_run_options(evaluate, evaluate_opts, false);
    evaluate->add_option("--annotations", annotations_path, "Gold annotation CSV")->required();
    evaluate->add_option("--predictions", predictions_path,
                         "Prediction CSV (same format); omit to generate from the source");
    evaluate->add_option("--baseline", baseline_path,
                         "Baseline prediction CSV to diff against (e.g. a --no-verify run)");
    evaluate->add_flag("--macro", macro, "Macro-average per-field metrics instead of micro");
    evaluate->add_option("--metrics-out", metrics_out, "Write metrics JSON to this path");

    std::optional<std::string> catalog_field;
    auto* catalog = app.add_subcommand("catalog", "Print the label schema");
    catalog->add_option("--field", catalog_field, "Show one field with its regulation citations");
    std::string export_format = "json";
    auto* catalog_export =
        catalog->add_subcommand("export", "Emit the schema machine-readably");
    catalog_export->add_option("--format", export_format, "json or csv");

    RunOpts verify_opts;
    std::string label_path;
    auto* verify_label =
        app.add_subcommand("verify-label", "Re-verify every evidence reference of a label");
    verify_label->add_option("--label", label_path, "Machine-readable label JSON")->required();
    add_run_options(verify_label, verify_opts, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(generate_opts);
        if (*evaluate) {
            return cmd_evaluate(evaluate_opts, annotations_path, predictions_path, baseline_path,
                                macro, metrics_out);
        }
        if (*catalog) {
            if (*catalog_export) return cmd_catalog_export(export_format);
            return cmd_catalog(catalog_field);
        }
        if (*verify_label) return cmd_verify_label(label_path, verify_opts);
    } catch (const Error& e) {
        std::cerr << "repo2label: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "repo2label: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

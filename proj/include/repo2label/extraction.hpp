#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "repo2label/backends.hpp"
#include "repo2label/field_value.hpp"
#include "repo2label/label_schema.hpp"
#include "repo2label/repo_ingest.hpp"

namespace repo2label {

enum class Mode {
    ZeroShot,
    FewShot,
};

std::string_view to_string(Mode mode);

struct ShotPair {
    std::string input;  // example file content
    std::string output; // example reply in the output grammar
};

/// Section-scoped in-context examples, loaded from a shots file.
struct ShotConfig {
    std::vector<ShotPair> shots_for(LabelSection section) const;
    std::array<std::vector<ShotPair>, kSectionCount> per_section;
};

/// The structured prompt: task description (@persona, @terminology,
/// @instruction with command/rules/formats), optional examples, then the
/// file payload as input.
struct PromptDocument {
    std::string persona;
    std::vector<std::pair<std::string, std::string>> terminology; // (field name, explanation)
    std::string command;
    std::array<std::string, 5> rules;
    std::string input_format;
    std::string output_format;
    std::string file_payload;
    std::vector<ShotPair> shots;

    /// Full document text; deterministic for identical inputs.
    std::string render_text() const;

    /// Chat-shaped view: task description as the system message, shots as
    /// user/assistant pairs, the payload as the final user message.
    std::vector<ChatMessage> to_messages() const;
};

struct ExtractionEntry {
    LabelField field;
    FieldValue value;
    std::optional<std::string> reference; // verbatim excerpt; present iff value non-N/A
};

struct UnitExtraction {
    std::string file_path;
    LabelSection section;
    std::vector<ExtractionEntry> entries; // unit order, one entry per unit field
    std::string diagnostic;               // non-empty when a parse fallback fired
};

struct ParseError {
    std::size_t offset = 0;
    std::string reason;
};

using ParseResult = std::variant<UnitExtraction, ParseError>;

struct PromptOptions {
    Mode mode = Mode::ZeroShot;
    ShotConfig shots;
    std::size_t chunk_chars = 24000;
    std::size_t chunk_overlap = 500;
};

/// Prompt template version + hash of the assembled template text, recorded
/// in run manifests.
std::string_view prompt_template_version();
std::string prompt_template_hash();

/// Build the prompt for one unit over one file payload. Pure function of
/// (unit, payload, mode, shots). Throws PayloadTooLarge when the payload
/// exceeds the chunk window; callers chunk via extract_unit.
PromptDocument build_prompt(const UnitDefinition& unit, const FileRecord& file,
                            const PromptOptions& options);

/// Split content into chunk windows of options.chunk_chars with
/// options.chunk_overlap overlap. A single window for short content.
std::vector<std::string> chunk_content(const std::string& content, const PromptOptions& options);

/// Parse a backend reply against the unit's reply grammar:
///   FIELD: <display name> / VALUE: <...> / REFERENCE: <...> blocks,
/// one blank line apart. Chatter before the first block and after the last
/// block is ignored. Unknown field names are rejected; missing fields
/// default to N/A; out-of-order fields are normalized to unit order.
ParseResult parse_reply(std::string_view reply, const UnitDefinition& unit,
                        const std::string& file_path);

/// End-to-end unit extraction: build prompt (chunked if needed), call the
/// backend, parse; one format-reminder retry per chunk, then an all-N/A
/// fallback with a diagnostic. Per-chunk results merge by the value join
/// (Yes over No over N/A; free-text union).
UnitExtraction extract_unit(const UnitDefinition& unit, const FileRecord& file,
                            CompletionBackend& backend, const PromptOptions& options);

/// The value join used for chunk and repository merging.
FieldValue join_values(const FieldValue& a, const FieldValue& b);

/// Load in-context examples from a JSON file keyed by section id, e.g.
/// {"basic_info": [{"input": "...", "output": "..."}], ...}. Throws
/// ConfigError on malformed input.
ShotConfig load_shots(const std::string& path);

} // namespace repo2label

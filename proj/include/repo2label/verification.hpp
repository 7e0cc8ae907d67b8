#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repo2label/extraction.hpp"

namespace repo2label {

/// Whitespace normalization applied to both sides before containment:
/// CRLF -> LF, runs of spaces/tabs -> one space, each line trimmed,
/// leading/trailing blank lines stripped. Fixed rules; soundness of the
/// final label is re-checkable with the same function.
std::string normalize_for_match(std::string_view text);

/// True iff the normalized reference occurs contiguously in the normalized
/// file content. Existence check only; does not judge whether the excerpt
/// supports the claim.
bool verify_reference(std::string_view reference, std::string_view file_content);

enum class VerifyStatus {
    VerifiedFirstTry,
    VerifiedAfterReflection,
    DemotedNA,
    /// Verification was disabled for this run; the value is carried through
    /// unchecked.
    Unverified,
};

std::string_view to_string(VerifyStatus status);

struct VerifiedField {
    LabelField field;
    FieldValue value;
    std::optional<std::string> reference;
    VerifyStatus status = VerifyStatus::VerifiedFirstTry;
    int reflections = 0; // reflection rounds consumed (0..max_reflections)
    int attempts = 0;    // references seen: 1 + reflections
};

struct VerifiedSheet {
    std::string file_path;
    LabelSection section;
    std::vector<VerifiedField> fields;
};

struct ReflectOptions {
    /// Reflection rounds after the initial failure; one more bad reference
    /// than this demotes the field to N/A.
    int max_reflections = 3;
};

/// The corrective instruction sent on every reflection round.
std::string_view reflection_instruction();

/// Check one extracted entry; on a bad reference, re-prompt with the
/// reflection instruction targeting only this field, up to
/// options.max_reflections rounds, then demote to N/A. N/A entries pass
/// through untouched. Verification never raises a value: a reflection
/// round may repair the reference or lower a binary value, never lift it.
VerifiedField verify_and_reflect(const ExtractionEntry& entry, const FileRecord& file,
                                 const UnitDefinition& unit, CompletionBackend& backend,
                                 const PromptOptions& prompt_options,
                                 const ReflectOptions& options);

/// Verify every entry of a unit extraction.
VerifiedSheet verify_sheet(const UnitExtraction& extraction, const FileRecord& file,
                           const UnitDefinition& unit, CompletionBackend& backend,
                           const PromptOptions& prompt_options, const ReflectOptions& options);

/// The bypass used by verification-disabled runs: entries become
/// Unverified fields, values and references carried as-is.
VerifiedSheet accept_unverified(const UnitExtraction& extraction);

} // namespace repo2label

#include "repo2label/verification.hpp"

#include <sstream>

#include "repo2label/util/text.hpp"

namespace repo2label {

std::string normalize_for_match(std::string_view input) {
    std::vector<std::string> lines;
    for (const auto& raw : text::split_lines(input)) {
        std::string line = text::collapse_spaces_tabs(raw);
        lines.push_back(std::string(text::trim(line)));
    }
    std::size_t begin = 0;
    std::size_t end = lines.size();
    while (begin < end && lines[begin].empty()) ++begin;
    while (end > begin && lines[end - 1].empty()) --end;
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out += '\n';
        out += lines[i];
    }
    return out;
}

bool verify_reference(std::string_view reference, std::string_view file_content) {
    const std::string needle = normalize_for_match(reference);
    if (needle.empty()) return false;
    return normalize_for_match(file_content).find(needle) != std::string::npos;
}

std::string_view to_string(VerifyStatus status) {
    switch (status) {
    case VerifyStatus::VerifiedFirstTry: return "verified_first_try";
    case VerifyStatus::VerifiedAfterReflection: return "verified_after_reflection";
    case VerifyStatus::DemotedNA: return "demoted_na";
    case VerifyStatus::Unverified: return "unverified";
    }
    return "unverified";
}

std::string_view reflection_instruction() {
    return "You previously extracted a label with an incorrect reference that does not exist "
           "in the file content. Please ensure that the reference provided this time is "
           "present in the file content.";
}

namespace {

/// The reflection round re-sends the original prompt (first chunk window
/// for oversized files) plus the corrective instruction scoped to one field.
CompletionRequest reflection_request(const UnitDefinition& unit, const FileRecord& file,
                                     const PromptOptions& prompt_options, LabelField field) {
    FileRecord window = file;
    window.content = chunk_content(file.content, prompt_options).front();
    const PromptDocument doc = build_prompt(unit, window, prompt_options);

    CompletionRequest request;
    request.messages = doc.to_messages();
    std::ostringstream instruction;
    instruction << reflection_instruction() << "\nRegenerate the label for the field \""
                << display_name(field) << "\" only, in the same output format.";
    request.messages.push_back({"user", instruction.str()});
    return request;
}

const ExtractionEntry* entry_for(const UnitExtraction& extraction, LabelField field) {
    for (const auto& entry : extraction.entries) {
        if (entry.field == field) return &entry;
    }
    return nullptr;
}

} // namespace

VerifiedField verify_and_reflect(const ExtractionEntry& entry, const FileRecord& file,
                                 const UnitDefinition& unit, CompletionBackend& backend,
                                 const PromptOptions& prompt_options,
                                 const ReflectOptions& options) {
    VerifiedField out;
    out.field = entry.field;
    out.value = entry.value;
    out.reference = entry.reference;
    out.reflections = 0;
    out.attempts = 1;

    // N/A carries no reference and passes through.
    if (entry.value.is_na()) {
        out.reference.reset();
        out.status = VerifyStatus::VerifiedFirstTry;
        return out;
    }
    if (entry.reference && verify_reference(*entry.reference, file.content)) {
        out.status = VerifyStatus::VerifiedFirstTry;
        return out;
    }

    // Each round re-asks for this field alone; a parse failure or a
    // model-returned N/A counts as a failed attempt like a bad reference.
    const CompletionRequest request = reflection_request(unit, file, prompt_options, entry.field);
    for (int round = 1; round <= options.max_reflections; ++round) {
        const std::string reply = backend.complete(request);
        out.reflections = round;
        out.attempts = 1 + round;

        const ParseResult parsed = parse_reply(reply, unit, file.path);
        if (std::holds_alternative<ParseError>(parsed)) continue;
        const auto* candidate = entry_for(std::get<UnitExtraction>(parsed), entry.field);
        if (!candidate || candidate->value.is_na() || !candidate->reference) continue;
        if (verify_reference(*candidate->reference, file.content)) {
            // A reflection round repairs the reference and may lower a
            // binary value, but never raises one; a claim that failed
            // verification must not come back stronger than it started.
            out.value = candidate->value;
            if (entry.value.is_binary() && candidate->value.is_binary() &&
                candidate->value.binary_rank() > entry.value.binary_rank()) {
                out.value = entry.value;
            }
            out.reference = candidate->reference;
            out.status = VerifyStatus::VerifiedAfterReflection;
            return out;
        }
    }

    out.value = FieldValue::not_applicable();
    out.reference.reset();
    out.status = VerifyStatus::DemotedNA;
    out.reflections = options.max_reflections;
    out.attempts = 1 + options.max_reflections;
    return out;
}

VerifiedSheet verify_sheet(const UnitExtraction& extraction, const FileRecord& file,
                           const UnitDefinition& unit, CompletionBackend& backend,
                           const PromptOptions& prompt_options, const ReflectOptions& options) {
    VerifiedSheet sheet;
    sheet.file_path = extraction.file_path;
    sheet.section = extraction.section;
    for (const auto& entry : extraction.entries) {
        sheet.fields.push_back(
            verify_and_reflect(entry, file, unit, backend, prompt_options, options));
    }
    return sheet;
}

VerifiedSheet accept_unverified(const UnitExtraction& extraction) {
    VerifiedSheet sheet;
    sheet.file_path = extraction.file_path;
    sheet.section = extraction.section;
    for (const auto& entry : extraction.entries) {
        VerifiedField field;
        field.field = entry.field;
        field.value = entry.value;
        field.reference = entry.value.is_na() ? std::nullopt : entry.reference;
        field.status = VerifyStatus::Unverified;
        field.reflections = 0;
        field.attempts = 1;
        sheet.fields.push_back(std::move(field));
    }
    return sheet;
}

} // namespace repo2label

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repo2label/verification.hpp"
#include "repo2label/version.hpp"

namespace repo2label {

/// One piece of supporting evidence: which file, which extracted value,
/// which verbatim excerpt.
struct EvidenceTriple {
    std::string file_path;
    std::string value;
    std::string reference;

    bool operator==(const EvidenceTriple&) const = default;
};

/// A label field merged across every analyzed file. Binary fields collapse
/// to Yes/No at the repository level (nothing found anywhere means No);
/// free-text fields hold the deduplicated union, possibly empty.
struct MergedField {
    LabelField field;
    FieldValue value;
    std::vector<EvidenceTriple> evidence;

    bool operator==(const MergedField&) const = default;
};

struct SectionLabel {
    LabelSection section;
    std::vector<MergedField> fields;

    bool operator==(const SectionLabel&) const = default;
};

struct LabelMetadata {
    std::string repository;
    std::optional<std::string> commit;
    std::string generated_at; // ISO-8601 UTC
    /// Version of the tool that produced the label; documents parsed back
    /// in keep the version they were generated with.
    std::string tool_version{kToolVersion};
    std::string backend;
    std::string model;
    std::string mode = "zero-shot";
    bool verification = true;
    std::string prompt_template;
    std::string prompt_template_hash;
    int files_analyzed = 0;
    int files_skipped = 0;

    bool operator==(const LabelMetadata&) const = default;
};

struct RepositoryLabel {
    LabelMetadata metadata;
    std::vector<SectionLabel> sections; // always the four sections, in order

    bool operator==(const RepositoryLabel&) const = default;
};

/// Merge one field's verified entries across files. Input pairs are
/// (file path, verified field); any input order yields the same result.
MergedField merge_field(LabelField field,
                        std::vector<std::pair<std::string, VerifiedField>> entries);

/// Assemble the repository label from all verified sheets. Sheet order does
/// not matter; the result is canonical (sections in order, evidence sorted
/// by file path then extraction order).
RepositoryLabel assemble_repository_label(std::vector<VerifiedSheet> sheets,
                                          LabelMetadata metadata);

} // namespace repo2label

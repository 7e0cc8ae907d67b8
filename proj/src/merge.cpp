#include "repo2label/merge.hpp"

#include <algorithm>

#include "repo2label/util/text.hpp"

namespace repo2label {

MergedField merge_field(LabelField field,
                        std::vector<std::pair<std::string, VerifiedField>> entries) {
    // Canonical input order: file path first, then the order entries were
    // produced within a file. stable_sort keeps the latter.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    MergedField merged;
    merged.field = field;

    bool any_yes = false;
    std::vector<std::string> texts;
    std::vector<std::string> seen_keys;

    // Seeing the same file's entry twice must not double its evidence;
    // exact-duplicate triples collapse so the merge is idempotent.
    auto add_evidence = [&merged](EvidenceTriple triple) {
        if (std::find(merged.evidence.begin(), merged.evidence.end(), triple) ==
            merged.evidence.end()) {
            merged.evidence.push_back(std::move(triple));
        }
    };

    for (const auto& [file_path, verified] : entries) {
        if (verified.value.is_na()) continue;
        if (verified.value.is_binary()) {
            any_yes = any_yes || verified.value.yes();
            if (verified.reference) {
                add_evidence(EvidenceTriple{file_path, verified.value.yes() ? "Yes" : "No",
                                            *verified.reference});
            }
            continue;
        }
        for (const auto& value : verified.value.texts()) {
            const std::string key = text::to_lower_ascii(value);
            if (std::find(seen_keys.begin(), seen_keys.end(), key) == seen_keys.end()) {
                seen_keys.push_back(key);
                texts.push_back(value);
            }
            if (verified.reference) {
                add_evidence(EvidenceTriple{file_path, value, *verified.reference});
            }
        }
    }

    if (value_kind_of(field) == ValueKind::Binary) {
        // Repository-level collapse: a field nothing vouched for is No.
        merged.value = FieldValue::yes_no(any_yes);
    } else {
        merged.value = FieldValue::text(std::move(texts));
    }
    return merged;
}

RepositoryLabel assemble_repository_label(std::vector<VerifiedSheet> sheets,
                                          LabelMetadata metadata) {
    std::stable_sort(sheets.begin(), sheets.end(), [](const auto& a, const auto& b) {
        if (a.file_path != b.file_path) return a.file_path < b.file_path;
        return static_cast<int>(a.section) < static_cast<int>(b.section);
    });

    RepositoryLabel label;
    label.metadata = std::move(metadata);
    for (LabelSection section : kSectionsInOrder) {
        SectionLabel section_label;
        section_label.section = section;
        for (LabelField field : fields_of_section(section)) {
            std::vector<std::pair<std::string, VerifiedField>> entries;
            for (const auto& sheet : sheets) {
                if (sheet.section != section) continue;
                for (const auto& verified : sheet.fields) {
                    if (verified.field == field) entries.emplace_back(sheet.file_path, verified);
                }
            }
            section_label.fields.push_back(merge_field(field, std::move(entries)));
        }
        label.sections.push_back(std::move(section_label));
    }
    return label;
}

} // namespace repo2label

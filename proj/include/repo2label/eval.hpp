#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "repo2label/verification.hpp"

namespace repo2label {

// ---- ground truth ------------------------------------------------------

struct AnnotationRecord {
    std::string repo;
    std::string file_path;
    LabelField field;
    FieldValue value;
};

/// Per-file, per-field gold labels. Loaded from CSV with the header
/// `repo,file_path,field,value`; every annotated file must carry all 15
/// fields.
struct AnnotationSet {
    std::vector<AnnotationRecord> records;

    /// (repo, file_path) keys present, sorted and unique.
    std::vector<std::pair<std::string, std::string>> files() const;
};

AnnotationSet load_annotations(const std::string& path);
AnnotationSet parse_annotations(std::string_view content, const std::string& origin);

/// Gold value syntax shared by annotations and tests: Binary fields take
/// Yes/No/N/A; free-text fields take a ';'-separated list, with an empty
/// cell or N/A meaning absent.
FieldValue parse_gold_value(LabelField field, std::string_view raw);

// ---- predictions -------------------------------------------------------

/// One scored file: all 15 field values (catalog order), N/A where a unit
/// produced nothing.
struct PredictionFile {
    std::string repo;
    std::string file_path;
    std::array<FieldValue, kFieldCount> values;
};

using PredictionSet = std::vector<PredictionFile>;

/// Regroup per-(file, section) verified sheets into per-file predictions.
PredictionSet sheets_to_predictions(const std::string& repo,
                                    const std::vector<VerifiedSheet>& sheets);

// ---- metrics -----------------------------------------------------------

struct Counts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

PRF prf_from_counts(const Counts& counts);

struct Metrics {
    std::array<Counts, kFieldCount> field_counts;
    std::array<Counts, kSectionCount> section_counts;
    Counts overall_counts;
    std::array<PRF, kSectionCount> per_section;
    PRF overall;
    bool macro = false; // averaging mode the PRF values were computed under
};

struct ScoreOptions {
    /// false: micro-average over (file, field) pairs; true: average the
    /// per-field metrics.
    bool macro = false;
};

/// Score predictions against gold. Binary positive class is Yes; free-text
/// positive means present, and a true positive additionally needs a
/// non-empty normalized value-set intersection. Throws KeyMismatch when the
/// (repo, file) keys differ.
Metrics score(const PredictionSet& predictions, const AnnotationSet& gold,
              const ScoreOptions& options = {});

/// Normalization applied to free-text values before intersection:
/// lowercase, trim, collapse internal whitespace.
std::string normalize_eval_value(std::string_view value);

// ---- run comparison ----------------------------------------------------

struct DeltaRow {
    std::string scope;  // section display name or "Overall"
    std::string metric; // "Precision" | "Recall" | "F1"
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;                // b - a
    std::optional<double> pct_change;  // (b - a) / a * 100, absent when a == 0
};

struct DeltaReport {
    std::vector<DeltaRow> rows;

    /// Fixed-width text table (settings x sections rows).
    std::string text() const;
};

/// Cell-by-cell comparison of two runs, e.g. verification off vs. on.
/// Throws EvalError when the runs used different averaging modes.
DeltaReport compare_runs(const Metrics& a, const Metrics& b);

/// Structured metrics document for machine consumption.
std::string metrics_json(const Metrics& metrics);

/// Table-shaped text rendering of one run's metrics.
std::string metrics_text(const Metrics& metrics);

} // namespace repo2label

#include "repo2label/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "repo2label/errors.hpp"
#include "repo2label/util/csv.hpp"
#include "repo2label/util/text.hpp"

using ordered_json = nlohmann::ordered_json;

namespace repo2label {

std::vector<std::pair<std::string, std::string>> AnnotationSet::files() const {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& record : records) keys.emplace(record.repo, record.file_path);
    return {keys.begin(), keys.end()};
}

FieldValue parse_gold_value(LabelField field, std::string_view raw) {
    const auto trimmed = text::trim(raw);
    if (trimmed.empty() || text::iequals(trimmed, "n/a")) return FieldValue::not_applicable();
    if (value_kind_of(field) == ValueKind::Binary) {
        if (text::iequals(trimmed, "yes")) return FieldValue::yes_no(true);
        if (text::iequals(trimmed, "no")) return FieldValue::yes_no(false);
        throw EvalError("eval: field '" + std::string(display_name(field)) +
                        "' expects Yes, No or N/A, got '" + std::string(trimmed) + "'");
    }
    std::vector<std::string> values;
    for (const auto& part : text::split(trimmed, ";")) {
        std::string v(text::trim(part));
        if (!v.empty()) values.push_back(std::move(v));
    }
    if (values.empty()) return FieldValue::not_applicable();
    return FieldValue::text(std::move(values));
}

AnnotationSet parse_annotations(std::string_view content, const std::string& origin) {
    const auto rows = csv::parse(content);
    if (rows.empty()) throw FormatError("eval: " + origin + ": empty annotation file", 1);

    const std::vector<std::string> expected_header{"repo", "file_path", "field", "value"};
    if (rows.front().size() != expected_header.size()) {
        throw FormatError("eval: " + origin + ": header must be repo,file_path,field,value", 1);
    }
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
        if (!text::iequals(text::trim(rows.front()[i]), expected_header[i])) {
            throw FormatError("eval: " + origin + ": header must be repo,file_path,field,value",
                              1);
        }
    }

    AnnotationSet set;
    std::set<std::tuple<std::string, std::string, LabelField>> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t row_number = r + 1;
        if (row.size() == 1 && text::trim(row[0]).empty()) continue;
        if (row.size() != 4) {
            throw FormatError("eval: " + origin + ": expected 4 columns, got " +
                                  std::to_string(row.size()),
                              row_number);
        }
        AnnotationRecord record;
        record.repo = std::string(text::trim(row[0]));
        record.file_path = std::string(text::trim(row[1]));
        if (record.repo.empty() || record.file_path.empty()) {
            throw FormatError("eval: " + origin + ": repo and file_path must be non-empty",
                              row_number);
        }
        const auto field = parse_field(text::trim(row[2]));
        if (!field) {
            throw UnknownField("eval: " + origin + ": unknown field '" +
                               std::string(text::trim(row[2])) + "' at row " +
                               std::to_string(row_number));
        }
        record.field = *field;
        try {
            record.value = parse_gold_value(*field, row[3]);
        } catch (const EvalError& e) {
            throw FormatError(std::string(e.what()) + " at row " + std::to_string(row_number),
                              row_number);
        }
        if (!seen.insert({record.repo, record.file_path, record.field}).second) {
            throw DuplicateKey("eval: " + origin + ": duplicate annotation for (" + record.repo +
                               ", " + record.file_path + ", " +
                               std::string(display_name(record.field)) + ") at row " +
                               std::to_string(row_number));
        }
        set.records.push_back(std::move(record));
    }

    // Completeness: every annotated file carries all 15 fields.
    std::map<std::pair<std::string, std::string>, std::set<LabelField>> per_file;
    for (const auto& record : set.records) {
        per_file[{record.repo, record.file_path}].insert(record.field);
    }
    for (const auto& [key, fields] : per_file) {
        if (fields.size() == kFieldCount) continue;
        for (const auto& spec : field_catalog()) {
            if (!fields.count(spec.field)) {
                throw EvalError("eval: " + origin + ": file (" + key.first + ", " + key.second +
                                ") is missing field '" + spec.display_name + "'");
            }
        }
    }
    return set;
}

AnnotationSet load_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EvalError("eval: cannot open annotation file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_annotations(buffer.str(), path);
}

PredictionSet sheets_to_predictions(const std::string& repo,
                                    const std::vector<VerifiedSheet>& sheets) {
    std::map<std::string, PredictionFile> by_file;
    for (const auto& sheet : sheets) {
        auto [it, inserted] = by_file.try_emplace(sheet.file_path);
        if (inserted) {
            it->second.repo = repo;
            it->second.file_path = sheet.file_path;
        }
        for (const auto& verified : sheet.fields) {
            std::size_t index = 0;
            for (const auto& spec : field_catalog()) {
                if (spec.field == verified.field) break;
                ++index;
            }
            it->second.values[index] = verified.value;
        }
    }
    PredictionSet predictions;
    for (auto& [path, file] : by_file) predictions.push_back(std::move(file));
    return predictions;
}

std::string normalize_eval_value(std::string_view value) {
    return text::collapse_ws(text::to_lower_ascii(value));
}

PRF prf_from_counts(const Counts& counts) {
    PRF out;
    const double tp = static_cast<double>(counts.tp);
    if (counts.tp + counts.fp > 0) out.precision = tp / static_cast<double>(counts.tp + counts.fp);
    if (counts.tp + counts.fn > 0) out.recall = tp / static_cast<double>(counts.tp + counts.fn);
    if (out.precision + out.recall > 0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

namespace {

std::size_t field_index(LabelField field) {
    std::size_t index = 0;
    for (const auto& spec : field_catalog()) {
        if (spec.field == field) return index;
        ++index;
    }
    return 0;
}

void score_pair(LabelField field, const FieldValue& pred, const FieldValue& gold, Counts& counts) {
    if (value_kind_of(field) == ValueKind::Binary) {
        // Positive class is Yes; a gold N/A counts as not-positive.
        const bool pred_yes = pred.is_binary() && pred.yes();
        const bool gold_yes = gold.is_binary() && gold.yes();
        if (pred_yes && gold_yes) {
            ++counts.tp;
        } else if (pred_yes) {
            ++counts.fp;
        } else if (gold_yes) {
            ++counts.fn;
        }
        return;
    }
    const bool pred_present = pred.is_text() && !pred.texts().empty();
    const bool gold_present = gold.is_text() && !gold.texts().empty();
    if (pred_present && gold_present) {
        std::set<std::string> gold_values;
        for (const auto& v : gold.texts()) gold_values.insert(normalize_eval_value(v));
        const bool intersects =
            std::any_of(pred.texts().begin(), pred.texts().end(), [&](const std::string& v) {
                return gold_values.count(normalize_eval_value(v)) > 0;
            });
        if (intersects) {
            ++counts.tp;
        } else {
            // Present on both sides but naming different things: wrong
            // extraction and missed gold at once.
            ++counts.fp;
            ++counts.fn;
        }
        return;
    }
    if (pred_present) ++counts.fp;
    if (gold_present) ++counts.fn;
}

PRF average_fields(const Metrics& metrics, const std::vector<LabelField>& fields) {
    PRF sum;
    for (LabelField field : fields) {
        const PRF prf = prf_from_counts(metrics.field_counts[field_index(field)]);
        sum.precision += prf.precision;
        sum.recall += prf.recall;
        sum.f1 += prf.f1;
    }
    const double n = static_cast<double>(fields.size());
    return PRF{sum.precision / n, sum.recall / n, sum.f1 / n};
}

} // namespace

Metrics score(const PredictionSet& predictions, const AnnotationSet& gold,
              const ScoreOptions& options) {
    std::map<std::pair<std::string, std::string>, std::array<FieldValue, kFieldCount>> gold_files;
    for (const auto& record : gold.records) {
        gold_files[{record.repo, record.file_path}][field_index(record.field)] = record.value;
    }

    std::set<std::pair<std::string, std::string>> pred_keys;
    for (const auto& file : predictions) pred_keys.emplace(file.repo, file.file_path);

    std::vector<std::string> missing;
    std::vector<std::string> extra;
    for (const auto& [key, values] : gold_files) {
        if (!pred_keys.count(key)) missing.push_back(key.first + ":" + key.second);
    }
    for (const auto& key : pred_keys) {
        if (!gold_files.count(key)) extra.push_back(key.first + ":" + key.second);
    }
    if (!missing.empty() || !extra.empty()) {
        std::string message = "eval: prediction and gold files disagree;";
        if (!missing.empty()) message += " not predicted: " + text::join(missing, ", ") + ";";
        if (!extra.empty()) message += " not annotated: " + text::join(extra, ", ") + ";";
        message.pop_back();
        throw KeyMismatch(message);
    }
    if (predictions.size() != gold_files.size()) {
        throw KeyMismatch("eval: duplicate prediction files present");
    }

    Metrics metrics;
    metrics.macro = options.macro;
    for (const auto& file : predictions) {
        const auto& gold_values = gold_files.at({file.repo, file.file_path});
        std::size_t index = 0;
        for (const auto& spec : field_catalog()) {
            score_pair(spec.field, file.values[index], gold_values[index],
                       metrics.field_counts[index]);
            ++index;
        }
    }

    std::size_t index = 0;
    for (const auto& spec : field_catalog()) {
        auto& section = metrics.section_counts[static_cast<std::size_t>(spec.section)];
        section.tp += metrics.field_counts[index].tp;
        section.fp += metrics.field_counts[index].fp;
        section.fn += metrics.field_counts[index].fn;
        ++index;
    }
    for (const auto& counts : metrics.section_counts) {
        metrics.overall_counts.tp += counts.tp;
        metrics.overall_counts.fp += counts.fp;
        metrics.overall_counts.fn += counts.fn;
    }

    if (options.macro) {
        for (LabelSection section : kSectionsInOrder) {
            metrics.per_section[static_cast<std::size_t>(section)] =
                average_fields(metrics, fields_of_section(section));
        }
        std::vector<LabelField> all;
        for (const auto& spec : field_catalog()) all.push_back(spec.field);
        metrics.overall = average_fields(metrics, all);
    } else {
        for (LabelSection section : kSectionsInOrder) {
            metrics.per_section[static_cast<std::size_t>(section)] =
                prf_from_counts(metrics.section_counts[static_cast<std::size_t>(section)]);
        }
        metrics.overall = prf_from_counts(metrics.overall_counts);
    }
    return metrics;
}

// ---- reports -----------------------------------------------------------

namespace {

struct Scope {
    std::string name;
    PRF a;
    PRF b;
};

std::string format_double(double value, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << value;
    return os.str();
}

} // namespace

DeltaReport compare_runs(const Metrics& a, const Metrics& b) {
    if (a.macro != b.macro) {
        throw EvalError("eval: cannot compare runs scored under different averaging modes");
    }
    std::vector<Scope> scopes;
    for (LabelSection section : kSectionsInOrder) {
        scopes.push_back(Scope{std::string(display_name(section)),
                               a.per_section[static_cast<std::size_t>(section)],
                               b.per_section[static_cast<std::size_t>(section)]});
    }
    scopes.push_back(Scope{"Overall", a.overall, b.overall});

    DeltaReport report;
    for (const auto& scope : scopes) {
        const std::array<std::tuple<const char*, double, double>, 3> cells{
            std::tuple<const char*, double, double>{"Precision", scope.a.precision,
                                                    scope.b.precision},
            std::tuple<const char*, double, double>{"Recall", scope.a.recall, scope.b.recall},
            std::tuple<const char*, double, double>{"F1", scope.a.f1, scope.b.f1},
        };
        for (const auto& [metric, va, vb] : cells) {
            DeltaRow row;
            row.scope = scope.name;
            row.metric = metric;
            row.a = va;
            row.b = vb;
            row.delta = vb - va;
            if (va != 0.0) row.pct_change = (vb - va) / va * 100.0;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::string DeltaReport::text() const {
    std::ostringstream os;
    os << std::left << std::setw(17) << "Scope" << std::setw(11) << "Metric" << std::right
       << std::setw(9) << "A" << std::setw(9) << "B" << std::setw(10) << "Delta" << std::setw(10)
       << "Change" << "\n";
    os << std::string(66, '-') << "\n";
    for (const auto& row : rows) {
        os << std::left << std::setw(17) << row.scope << std::setw(11) << row.metric << std::right
           << std::setw(9) << format_double(row.a, 4) << std::setw(9) << format_double(row.b, 4);
        std::string delta = format_double(row.delta, 4);
        if (row.delta >= 0) delta = "+" + delta;
        os << std::setw(10) << delta;
        if (row.pct_change) {
            std::string pct = format_double(*row.pct_change, 2) + "%";
            if (*row.pct_change >= 0) pct = "+" + pct;
            os << std::setw(10) << pct;
        } else {
            os << std::setw(10) << "n/a";
        }
        os << "\n";
    }
    return os.str();
}

std::string metrics_json(const Metrics& metrics) {
    auto block = [](const PRF& prf, const Counts& counts) {
        return ordered_json{{"precision", prf.precision}, {"recall", prf.recall},
                            {"f1", prf.f1},              {"tp", counts.tp},
                            {"fp", counts.fp},           {"fn", counts.fn}};
    };
    ordered_json doc;
    doc["averaging"] = metrics.macro ? "macro" : "micro";
    ordered_json sections = ordered_json::array();
    for (LabelSection section : kSectionsInOrder) {
        const auto index = static_cast<std::size_t>(section);
        ordered_json sj = block(metrics.per_section[index], metrics.section_counts[index]);
        sj["id"] = std::string(section_id(section));
        sj["name"] = std::string(display_name(section));
        sections.push_back(std::move(sj));
    }
    doc["sections"] = std::move(sections);
    doc["overall"] = block(metrics.overall, metrics.overall_counts);
    return doc.dump(2) + "\n";
}

std::string metrics_text(const Metrics& metrics) {
    std::ostringstream os;
    os << std::left << std::setw(17) << "Section" << std::right << std::setw(6) << "TP"
       << std::setw(6) << "FP" << std::setw(6) << "FN" << std::setw(11) << "Prec."
       << std::setw(9) << "Rec." << std::setw(9) << "F1" << "\n";
    os << std::string(64, '-') << "\n";
    auto line = [&](const std::string& name, const Counts& counts, const PRF& prf) {
        os << std::left << std::setw(17) << name << std::right << std::setw(6) << counts.tp
           << std::setw(6) << counts.fp << std::setw(6) << counts.fn << std::setw(11)
           << format_double(prf.precision, 4) << std::setw(9) << format_double(prf.recall, 4)
           << std::setw(9) << format_double(prf.f1, 4) << "\n";
    };
    for (LabelSection section : kSectionsInOrder) {
        const auto index = static_cast<std::size_t>(section);
        line(std::string(display_name(section)), metrics.section_counts[index],
             metrics.per_section[index]);
    }
    line("Overall", metrics.overall_counts, metrics.overall);
    os << "(" << (metrics.macro ? "macro" : "micro") << "-averaged)\n";
    return os.str();
}

} // namespace repo2label

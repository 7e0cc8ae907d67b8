#include "repo2label/render.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "repo2label/errors.hpp"
#include "repo2label/util/text.hpp"
#include "repo2label/version.hpp"

using ordered_json = nlohmann::ordered_json;

namespace repo2label {

namespace {

ordered_json value_to_json(const FieldValue& value) {
    if (value.is_na()) return nullptr;
    if (value.is_binary()) return value.yes() ? "Yes" : "No";
    return ordered_json(value.texts());
}

FieldValue value_from_json(const ordered_json& j, const std::string& where) {
    if (j.is_null()) return FieldValue::not_applicable();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "Yes") return FieldValue::yes_no(true);
        if (s == "No") return FieldValue::yes_no(false);
        throw LabelParseError("label: " + where + ": binary value must be Yes or No, got '" + s +
                              "'");
    }
    if (j.is_array()) {
        std::vector<std::string> texts;
        for (const auto& item : j) {
            if (!item.is_string()) {
                throw LabelParseError("label: " + where + ": free-text values must be strings");
            }
            texts.push_back(item.get<std::string>());
        }
        return FieldValue::text(std::move(texts));
    }
    throw LabelParseError("label: " + where + ": unsupported value type");
}

const ordered_json& require(const ordered_json& parent, const char* key,
                            const std::string& where) {
    auto it = parent.find(key);
    if (it == parent.end()) {
        throw LabelParseError("label: " + where + ": missing key '" + key + "'");
    }
    return *it;
}

std::string require_string(const ordered_json& parent, const char* key,
                           const std::string& where) {
    const auto& j = require(parent, key, where);
    if (!j.is_string()) {
        throw LabelParseError("label: " + where + ": key '" + key + "' must be a string");
    }
    return j.get<std::string>();
}

} // namespace

std::string render_machine(const RepositoryLabel& label) {
    const auto& meta = label.metadata;
    ordered_json doc;
    doc["schema_version"] = std::string(kSchemaVersion);
    doc["tool_version"] = meta.tool_version;
    doc["generated_at"] = meta.generated_at;
    doc["repository"] = {{"locator", meta.repository},
                         {"commit", meta.commit ? ordered_json(*meta.commit) : nullptr}};
    doc["run"] = {{"backend", meta.backend},
                  {"model", meta.model},
                  {"mode", meta.mode},
                  {"verification", meta.verification},
                  {"prompt_template", meta.prompt_template},
                  {"prompt_template_hash", meta.prompt_template_hash},
                  {"files_analyzed", meta.files_analyzed},
                  {"files_skipped", meta.files_skipped}};

    ordered_json sections = ordered_json::array();
    for (const auto& section : label.sections) {
        ordered_json fields = ordered_json::array();
        for (const auto& field : section.fields) {
            ordered_json evidence = ordered_json::array();
            for (const auto& triple : field.evidence) {
                evidence.push_back({{"file", triple.file_path},
                                    {"value", triple.value},
                                    {"reference", triple.reference}});
            }
            fields.push_back(
                {{"id", std::string(field_id(field.field))},
                 {"name", std::string(display_name(field.field))},
                 {"kind",
                  value_kind_of(field.field) == ValueKind::Binary ? "binary" : "free_text"},
                 {"value", value_to_json(field.value)},
                 {"evidence_count", field.evidence.size()},
                 {"evidence", std::move(evidence)}});
        }
        sections.push_back({{"id", std::string(section_id(section.section))},
                            {"name", std::string(display_name(section.section))},
                            {"fields", std::move(fields)}});
    }
    doc["sections"] = std::move(sections);
    return doc.dump(2) + "\n";
}

RepositoryLabel parse_machine(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const ordered_json::parse_error& e) {
        throw LabelParseError("label: document is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw LabelParseError("label: document root must be an object");

    const std::string schema = require_string(doc, "schema_version", "root");
    if (schema != kSchemaVersion) {
        throw LabelParseError("label: unsupported schema_version '" + schema + "', expected '" +
                              std::string(kSchemaVersion) + "'");
    }

    RepositoryLabel label;
    auto& meta = label.metadata;
    meta.tool_version = require_string(doc, "tool_version", "root");
    meta.generated_at = require_string(doc, "generated_at", "root");

    const auto& repo = require(doc, "repository", "root");
    meta.repository = require_string(repo, "locator", "repository");
    const auto& commit = require(repo, "commit", "repository");
    if (!commit.is_null()) meta.commit = commit.get<std::string>();

    const auto& run = require(doc, "run", "root");
    meta.backend = require_string(run, "backend", "run");
    meta.model = require_string(run, "model", "run");
    meta.mode = require_string(run, "mode", "run");
    meta.verification = require(run, "verification", "run").get<bool>();
    meta.prompt_template = require_string(run, "prompt_template", "run");
    meta.prompt_template_hash = require_string(run, "prompt_template_hash", "run");
    meta.files_analyzed = require(run, "files_analyzed", "run").get<int>();
    meta.files_skipped = require(run, "files_skipped", "run").get<int>();

    const auto& sections = require(doc, "sections", "root");
    if (!sections.is_array() || sections.size() != kSectionCount) {
        throw LabelParseError("label: expected " + std::to_string(kSectionCount) + " sections");
    }
    for (std::size_t s = 0; s < sections.size(); ++s) {
        const auto& sj = sections[s];
        const std::string sid = require_string(sj, "id", "section");
        const auto section = parse_section(sid);
        if (!section || *section != kSectionsInOrder[s]) {
            throw LabelParseError("label: unexpected section '" + sid + "' at position " +
                                  std::to_string(s));
        }
        SectionLabel section_label;
        section_label.section = *section;

        const auto& fields = require(sj, "fields", "section " + sid);
        const auto expected = fields_of_section(*section);
        if (!fields.is_array() || fields.size() != expected.size()) {
            throw LabelParseError("label: section '" + sid + "' must list its " +
                                  std::to_string(expected.size()) + " fields");
        }
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const auto& fj = fields[f];
            const std::string fid = require_string(fj, "id", "field");
            const auto field = parse_field(fid);
            if (!field || *field != expected[f]) {
                throw LabelParseError("label: unexpected field '" + fid + "' in section '" +
                                      sid + "'");
            }
            MergedField merged;
            merged.field = *field;
            merged.value = value_from_json(require(fj, "value", fid), fid);
            if (value_kind_of(*field) == ValueKind::Binary && merged.value.is_text()) {
                throw LabelParseError("label: field '" + fid + "' must carry a binary value");
            }
            if (value_kind_of(*field) == ValueKind::FreeText && merged.value.is_binary()) {
                throw LabelParseError("label: field '" + fid + "' must carry free-text values");
            }

            const auto& evidence = require(fj, "evidence", fid);
            if (!evidence.is_array()) {
                throw LabelParseError("label: field '" + fid + "' evidence must be an array");
            }
            for (const auto& ej : evidence) {
                merged.evidence.push_back(EvidenceTriple{require_string(ej, "file", fid),
                                                         require_string(ej, "value", fid),
                                                         require_string(ej, "reference", fid)});
            }
            const auto& count = require(fj, "evidence_count", fid);
            if (!count.is_number_unsigned() ||
                count.get<std::size_t>() != merged.evidence.size()) {
                throw LabelParseError("label: field '" + fid +
                                      "' evidence_count disagrees with evidence list");
            }
            section_label.fields.push_back(std::move(merged));
        }
        label.sections.push_back(std::move(section_label));
    }
    return label;
}

std::string html_escape(std::string_view input) {
    std::string out;
    out.reserve(input.size());
    for (char c : input) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&#39;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string display_value(const FieldValue& value) {
    if (value.is_na()) return "N/A";
    if (value.is_binary()) return value.yes() ? "Yes" : "No";
    if (value.texts().empty()) return "\xE2\x80\x94"; // em dash: nothing extracted
    return text::join(value.texts(), "; ");
}

namespace {

std::string citation_line(LabelField field) {
    std::vector<std::string> parts;
    for (const auto& citation : provenance_for(field)) {
        parts.push_back(std::string(display_name(citation.regulation)) + " " +
                        text::join(citation.articles, " & "));
    }
    return text::join(parts, " | ");
}

constexpr std::string_view kHtmlStyle =
    "body{font-family:system-ui,sans-serif;margin:2rem auto;max-width:60rem;"
    "color:#1c2330;background:#f5f6f8}"
    "header{margin-bottom:1.5rem}h1{margin:0 0 .25rem 0;font-size:1.5rem}"
    ".meta{color:#5a6374;font-size:.85rem}"
    "section{background:#fff;border:1px solid #d8dce3;border-radius:8px;"
    "padding:1rem 1.25rem;margin-bottom:1rem}"
    "h2{margin:0 0 .75rem 0;font-size:1.1rem;border-bottom:1px solid #e4e7ec;"
    "padding-bottom:.5rem}"
    "table{width:100%;border-collapse:collapse}"
    "td,th{text-align:left;vertical-align:top;padding:.5rem .6rem;"
    "border-top:1px solid #eef0f4}"
    "th{width:14rem;font-weight:600}"
    ".value{font-weight:600}.value.no{color:#8a5a00}.value.yes{color:#0a7a3d}"
    ".citations{color:#77808f;font-size:.75rem;margin-top:.15rem}"
    "details{margin-top:.35rem}summary{cursor:pointer;color:#2458c5;font-size:.85rem}"
    "ul.evidence{margin:.5rem 0 0 0;padding-left:1.1rem}"
    "ul.evidence li{margin-bottom:.5rem;font-size:.85rem}"
    ".file{color:#5a6374;font-family:ui-monospace,monospace;font-size:.8rem}"
    "pre{background:#f0f2f6;border-radius:4px;padding:.4rem .6rem;margin:.25rem 0 0 0;"
    "white-space:pre-wrap;word-break:break-word;font-size:.8rem}"
    ".more{color:#77808f;font-size:.8rem}";

} // namespace

std::string render_html(const RepositoryLabel& label) {
    const auto& meta = label.metadata;
    std::ostringstream os;
    os << "<!doctype html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>Privacy Label: " << html_escape(meta.repository) << "</title>\n"
       << "<style>" << kHtmlStyle << "</style>\n</head>\n<body>\n";

    os << "<header>\n<h1>Privacy Label: " << html_escape(meta.repository) << "</h1>\n"
       << "<div class=\"meta\">";
    if (meta.commit) os << "commit " << html_escape(*meta.commit) << " &middot; ";
    os << "generated " << html_escape(meta.generated_at) << " &middot; " << html_escape(meta.model)
       << " (" << html_escape(meta.backend) << ", " << html_escape(meta.mode) << ") &middot; "
       << (meta.verification ? "references verified" : "references not verified")
       << "</div>\n</header>\n";

    for (const auto& section : label.sections) {
        os << "<section>\n<h2>" << html_escape(display_name(section.section)) << "</h2>\n"
           << "<table>\n";
        for (const auto& field : section.fields) {
            os << "<tr><th>" << html_escape(display_name(field.field))
               << "<div class=\"citations\">" << html_escape(citation_line(field.field))
               << "</div></th>\n<td>";
            std::string css = "value";
            if (field.value.is_binary()) css += field.value.yes() ? " yes" : " no";
            os << "<div class=\"" << css << "\">";
            if (field.value.is_text() && field.value.texts().empty()) {
                os << "&#8212;";
            } else {
                os << html_escape(display_value(field.value));
            }
            os << "</div>";
            if (!field.evidence.empty()) {
                os << "\n<details><summary>" << field.evidence.size()
                   << (field.evidence.size() == 1 ? " reference" : " references")
                   << "</summary>\n<ul class=\"evidence\">\n";
                const std::size_t shown = std::min(field.evidence.size(), kHtmlEvidenceCap);
                for (std::size_t i = 0; i < shown; ++i) {
                    const auto& triple = field.evidence[i];
                    os << "<li><span class=\"file\">" << html_escape(triple.file_path)
                       << "</span> &rarr; " << html_escape(triple.value) << "<pre>"
                       << html_escape(triple.reference) << "</pre></li>\n";
                }
                os << "</ul>\n";
                if (field.evidence.size() > kHtmlEvidenceCap) {
                    os << "<p class=\"more\">" << (field.evidence.size() - kHtmlEvidenceCap)
                       << " more in machine output.</p>\n";
                }
                os << "</details>";
            }
            os << "</td></tr>\n";
        }
        os << "</table>\n</section>\n";
    }
    os << "</body>\n</html>\n";
    return os.str();
}

namespace {

std::string markdown_escape(std::string_view input) {
    std::string out;
    for (char c : input) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

} // namespace

std::string render_markdown(const RepositoryLabel& label) {
    const auto& meta = label.metadata;
    std::ostringstream os;
    os << "# Privacy Label: " << meta.repository << "\n\n";
    if (meta.commit) os << "- Commit: `" << *meta.commit << "`\n";
    os << "- Generated: " << meta.generated_at << "\n"
       << "- Model: " << meta.model << " (" << meta.backend << ", " << meta.mode << ")\n"
       << "- References: " << (meta.verification ? "verified" : "not verified") << "\n";

    for (const auto& section : label.sections) {
        os << "\n## " << display_name(section.section) << "\n\n"
           << "| Field | Value | Evidence |\n|---|---|---|\n";
        for (const auto& field : section.fields) {
            os << "| " << display_name(field.field) << " | "
               << markdown_escape(display_value(field.value)) << " | " << field.evidence.size()
               << (field.evidence.size() == 1 ? " reference" : " references") << " |\n";
        }
    }
    return os.str();
}

} // namespace repo2label

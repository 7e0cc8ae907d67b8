#include "repo2label/util/csv.hpp"

#include "repo2label/errors.hpp"

namespace repo2label::csv {

std::vector<std::vector<std::string>> parse(std::string_view content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;

    // Row numbers are logical records, so a quoted field spanning physical
    // lines still counts as one row.
    auto current_row = [&] { return rows.size() + 1; };

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_was_quoted) {
                throw FormatError("csv: unexpected quote inside unquoted field (row " +
                                      std::to_string(current_row()) + ")",
                                  current_row());
            }
            in_quotes = true;
            field_was_quoted = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            if (field_was_quoted) {
                throw FormatError("csv: characters after closing quote (row " +
                                      std::to_string(current_row()) + ")",
                                  current_row());
            }
            field += c;
        }
    }
    if (in_quotes) {
        throw FormatError(
            "csv: unterminated quoted field (row " + std::to_string(current_row()) + ")",
            current_row());
    }
    if (!field.empty() || field_was_quoted || !row.empty()) end_row();
    return rows;
}

std::string quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string write_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += quote(fields[i]);
    }
    out += '\n';
    return out;
}

} // namespace repo2label::csv

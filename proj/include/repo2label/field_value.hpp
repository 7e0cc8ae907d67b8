#pragma once

#include <cassert>
#include <string>
#include <vector>

namespace repo2label {

/// Value of a single label field. Three states:
///  - NotApplicable: nothing found / demoted ("N/A" is first-class);
///  - Binary: Yes or No;
///  - Text: free-text values (deduplicated list; may be empty only after a
///    repository-level merge, where an empty union renders as absent).
class FieldValue {
public:
    enum class Kind { NotApplicable, Binary, Text };

    FieldValue() = default;

    static FieldValue not_applicable() { return FieldValue(); }

    static FieldValue yes_no(bool yes) {
        FieldValue v;
        v.kind_ = Kind::Binary;
        v.yes_ = yes;
        return v;
    }

    static FieldValue text(std::vector<std::string> values) {
        FieldValue v;
        v.kind_ = Kind::Text;
        v.texts_ = std::move(values);
        return v;
    }

    Kind kind() const { return kind_; }
    bool is_na() const { return kind_ == Kind::NotApplicable; }
    bool is_binary() const { return kind_ == Kind::Binary; }
    bool is_text() const { return kind_ == Kind::Text; }

    bool yes() const {
        assert(kind_ == Kind::Binary);
        return yes_;
    }

    const std::vector<std::string>& texts() const {
        assert(kind_ == Kind::Text);
        return texts_;
    }

    /// Join rank for the merge lattice: N/A < No < Yes.
    int binary_rank() const {
        if (kind_ == Kind::NotApplicable) return 0;
        return yes_ ? 2 : 1;
    }

    bool operator==(const FieldValue&) const = default;

private:
    Kind kind_ = Kind::NotApplicable;
    bool yes_ = false;
    std::vector<std::string> texts_;
};

} // namespace repo2label

#include "repo2label/label_schema.hpp"

#include <algorithm>
#include <stdexcept>

#include "repo2label/util/text.hpp"

namespace repo2label {

namespace {

// ---- static field table ------------------------------------------------
//
// One citation row = (regulation, article references joined by " & ").
// The splitting into individual article strings happens once at catalog
// construction; the strings themselves are kept verbatim, prefixes included.

struct CitationRow {
    Regulation regulation;
    std::string_view articles_joined;
};

struct FieldRow {
    LabelField field;
    LabelSection section;
    ValueKind kind;
    std::string_view display;
    std::string_view id;
    std::string_view explanation;
    std::string_view example;
    const CitationRow* provenance;
    std::size_t provenance_count;
};

constexpr CitationRow kBaseModelProv[] = {
    {Regulation::MeasGAI, "Art.7"},
    {Regulation::ReqGAI, "Art.6.(a) & Art.6.(c).1 & Art.6.(c).2"},
    {Regulation::MAIFGAI, "Art.3.(b)"},
};

// Tool Modality and Tool Functionality are an elaboration of a single
// "Tool Type" requirement; both carry its provenance.
constexpr CitationRow kToolTypeProv[] = {
    {Regulation::MeasGAI, "Art.10"},
    {Regulation::ReqGAI, "Art.6.(c).1"},
    {Regulation::PrinGAI, "Art.4"},
    {Regulation::MAIFGAI, "Art.3.(f)"},
};

constexpr CitationRow kWorkingDetailsProv[] = {
    {Regulation::PrinGAI, "Art.5"},
    {Regulation::MAIFGAI, "Art.3.(d) & Art.3.(g)"},
};

constexpr CitationRow kControllerContactProv[] = {
    {Regulation::GDPR, "Art.13.1.(a)"},
    {Regulation::PIPL, "Art.17.(1) & Art.52"},
};

constexpr CitationRow kTargetUsersProv[] = {
    {Regulation::MeasGAI, "Art.10"},
    {Regulation::ReqGAI, "Art.6.(c).1"},
};

constexpr CitationRow kDataRetentionProv[] = {
    {Regulation::GDPR, "Art.13.2.(a) & Art.14.2.(a)"},
    {Regulation::CCPA, "\xC2\xA7"
                       "1798.100.a.(3)"},
    {Regulation::PIPL, "Art.17.(2) & Art.19"},
    {Regulation::MeasGAI, "Art.11"},
    {Regulation::PrinGAI, "Art.7"},
};

constexpr CitationRow kRightToAccessProv[] = {
    {Regulation::GDPR, "Art.13.2.(b) & 14.2.(c)"},
    {Regulation::CCPA, "\xC2\xA7"
                       "1798.110"},
    {Regulation::PIPL, "Art.45"},
    {Regulation::PrinGAI, "Art.6"},
};

constexpr CitationRow kRightToBeForgottenProv[] = {
    {Regulation::GDPR, "Art.13.2.(c) & 14.2.(d)"},
    {Regulation::CCPA, "\xC2\xA7"
                       "1798.120"},
    {Regulation::PIPL, "Art.15"},
    {Regulation::ReqGAI, "Art.7.(c)"},
};

constexpr CitationRow kRightToLodgeComplaintsProv[] = {
    {Regulation::GDPR, "Art.13.2.(d) & 14.2.(e) & Art.13.2.(e)"},
    {Regulation::PIPL, "Art.50"},
    {Regulation::MeasGAI, "Art.15 & Art.18"},
    {Regulation::ReqGAI, "Art.5.2.(b).3 & Art.7.(e)"},
};

constexpr CitationRow kWatermarkingProv[] = {
    {Regulation::MeasGAI, "Art.12"},
    {Regulation::ReqGAI, "Art.7.(d)"},
    {Regulation::PrinGAI, "Art.4"},
    {Regulation::MAIFGAI, "Art.7"},
    {Regulation::AIAct, "Art. 52"},
};

constexpr CitationRow kPromptGuardrailProv[] = {
    {Regulation::ReqGAI, "Art.6.(b).1 & Art.7.(f).1 & Art.6.(b).2"},
    {Regulation::PrinGAI, "Art.8"},
    {Regulation::MAIFGAI, "Art.3.(d) & Art.3"},
};

constexpr CitationRow kRiskNotificationProv[] = {
    {Regulation::PIPL, "Art.51"},
    {Regulation::MeasGAI, "Art.14"},
    {Regulation::ReqGAI, "Art.5.2.(b).4 & Art.6.(b).2"},
    {Regulation::PrinGAI, "Art.4"},
    {Regulation::MAIFGAI, "Art.3.(e) & Art.6.(a)"},
};

constexpr CitationRow kDataEncryptionProv[] = {
    {Regulation::PIPL, "Art.51.(3)"},
    {Regulation::PrinGAI, "Art.3"},
};

constexpr CitationRow kProtectionOfMinorsProv[] = {
    {Regulation::PIPL, "Art.31"},
    {Regulation::MeasGAI, "Art.10"},
    {Regulation::ReqGAI, "Art.7.(a).3 & Art.7.(a).4"},
};

// Compiled-in tally assertions: citation counts per field.
static_assert(std::size(kBaseModelProv) == 3);
static_assert(std::size(kToolTypeProv) == 4);
static_assert(std::size(kWorkingDetailsProv) == 2);
static_assert(std::size(kControllerContactProv) == 2);
static_assert(std::size(kTargetUsersProv) == 2);
static_assert(std::size(kDataRetentionProv) == 5);
static_assert(std::size(kRightToAccessProv) == 4);
static_assert(std::size(kRightToBeForgottenProv) == 4);
static_assert(std::size(kRightToLodgeComplaintsProv) == 4);
static_assert(std::size(kWatermarkingProv) == 5);
static_assert(std::size(kPromptGuardrailProv) == 3);
static_assert(std::size(kRiskNotificationProv) == 5);
static_assert(std::size(kDataEncryptionProv) == 2);
static_assert(std::size(kProtectionOfMinorsProv) == 3);

constexpr FieldRow kFieldRows[kFieldCount] = {
    {LabelField::BaseModel, LabelSection::BasicInfo, ValueKind::FreeText, "Base Model",
     "base_model",
     "The names of foundation models that are embedded in this tool. (e.g., GPT-4, GPT-3.5, "
     "Ernie, etc)",
     "GPT-3.5/GPT-4/...", kBaseModelProv, std::size(kBaseModelProv)},
    {LabelField::ToolModality, LabelSection::BasicInfo, ValueKind::FreeText, "Tool Modality",
     "tool_modality",
     "The Modalities of information processed by the reception and response of the tool, "
     "respectively. (e.g., text-to-text, image to text)",
     "Text to Image", kToolTypeProv, std::size(kToolTypeProv)},
    {LabelField::ToolFunctionality, LabelSection::BasicInfo, ValueKind::FreeText,
     "Tool Functionality", "tool_functionality",
     "The major capabilities and services provided to users to meet their needs and solve "
     "specific problems.",
     "Image Generation", kToolTypeProv, std::size(kToolTypeProv)},
    {LabelField::WorkingDetails, LabelSection::BasicInfo, ValueKind::FreeText, "Working Details",
     "working_details",
     "Comprehensive details provided to users about this tool. (e.g., documents about how the "
     "system works, data processing process)",
     "A link to the GAI app documentation", kWorkingDetailsProv, std::size(kWorkingDetailsProv)},
    {LabelField::ControllerContact, LabelSection::BasicInfo, ValueKind::FreeText,
     "Controller Contact", "controller_contact",
     "The publicly available contact of the GAI app developers*. (e.g., an email address)",
     "abc@company.com", kControllerContactProv, std::size(kControllerContactProv)},
    {LabelField::TargetUsers, LabelSection::BasicInfo, ValueKind::FreeText, "Target Users",
     "target_users", "The intended audience or primary user base for this service.",
     "Researchers", kTargetUsersProv, std::size(kTargetUsersProv)},
    {LabelField::DataRetention, LabelSection::DataRights, ValueKind::Binary, "Data Retention",
     "data_retention", "The practice of storing data for a specific period of time.", "Yes/No",
     kDataRetentionProv, std::size(kDataRetentionProv)},
    {LabelField::RightToAccess, LabelSection::DataRights, ValueKind::Binary, "Right to Access",
     "right_to_access",
     "The right of users to request to access their collected personal information.", "Yes/No",
     kRightToAccessProv, std::size(kRightToAccessProv)},
    {LabelField::RightToBeForgotten, LabelSection::DataRights, ValueKind::Binary,
     "Right to be Forgotten", "right_to_be_forgotten",
     "The right of users to request to erasure or deletion of their personal information.",
     "Yes/No", kRightToBeForgottenProv, std::size(kRightToBeForgottenProv)},
    {LabelField::RightToLodgeComplaints, LabelSection::DataRights, ValueKind::Binary,
     "Right to Lodge Complaints", "right_to_lodge_complaints",
     "The right of users to lodge a complaint with a supervisory authority.", "Yes/No",
     kRightToLodgeComplaintsProv, std::size(kRightToLodgeComplaintsProv)},
    {LabelField::AIGeneratedWatermarking, LabelSection::RiskRelated, ValueKind::Binary,
     "AI-generated Watermarking", "ai_generated_watermarking",
     "A machine-readable and detectable mark embedded in content generated or modified by GAI "
     "systems.",
     "Yes/No", kWatermarkingProv, std::size(kWatermarkingProv)},
    {LabelField::PromptGuardrail, LabelSection::RiskRelated, ValueKind::Binary, "Prompt Guardrail",
     "prompt_guardrail",
     "Comprehensive security protocols implemented to scrutinize both user inputs and system "
     "outputs for potential malicious activities. (e.g., employing stringent input/output "
     "filtering mechanisms)",
     "Yes/No", kPromptGuardrailProv, std::size(kPromptGuardrailProv)},
    {LabelField::RiskNotification, LabelSection::RiskRelated, ValueKind::Binary,
     "Risk Notification", "risk_notification",
     "A notification that informs users of the relevant risks they may face when using GAI "
     "tools. (e.g. copyright disputes)",
     "Yes/No", kRiskNotificationProv, std::size(kRiskNotificationProv)},
    {LabelField::DataEncryption, LabelSection::AdditionalInfo, ValueKind::Binary,
     "Data Encryption", "data_encryption",
     "Data are encrypted and transferred over a secure connection.", "Yes/No",
     kDataEncryptionProv, std::size(kDataEncryptionProv)},
    {LabelField::ProtectionOfMinors, LabelSection::AdditionalInfo, ValueKind::Binary,
     "Protection of Minors", "protection_of_minors",
     "Special treatment made for the protection and convenience of children.", "Yes/No",
     kProtectionOfMinorsProv, std::size(kProtectionOfMinorsProv)},
};

// Section membership: 6 + 4 + 3 + 2 = 15.
constexpr std::size_t count_in_section(LabelSection s) {
    std::size_t n = 0;
    for (const auto& row : kFieldRows) {
        if (row.section == s) ++n;
    }
    return n;
}
static_assert(count_in_section(LabelSection::BasicInfo) == 6);
static_assert(count_in_section(LabelSection::DataRights) == 4);
static_assert(count_in_section(LabelSection::RiskRelated) == 3);
static_assert(count_in_section(LabelSection::AdditionalInfo) == 2);

// Basic Info fields are free text; everything else is binary.
constexpr bool kinds_consistent() {
    for (const auto& row : kFieldRows) {
        const bool basic = row.section == LabelSection::BasicInfo;
        if (basic != (row.kind == ValueKind::FreeText)) return false;
    }
    return true;
}
static_assert(kinds_consistent());

const FieldRow& row_for(LabelField field) {
    return kFieldRows[static_cast<std::size_t>(field)];
}

std::vector<RegulationCitation> build_citations(const FieldRow& row) {
    std::vector<RegulationCitation> out;
    out.reserve(row.provenance_count);
    for (std::size_t i = 0; i < row.provenance_count; ++i) {
        const CitationRow& c = row.provenance[i];
        RegulationCitation cit;
        cit.regulation = c.regulation;
        cit.region = std::string(region_of(c.regulation));
        for (auto& a : text::split(c.articles_joined, " & ")) {
            cit.articles.push_back(std::move(a));
        }
        out.push_back(std::move(cit));
    }
    return out;
}

std::vector<FieldSpec> build_catalog() {
    std::vector<FieldSpec> out;
    out.reserve(kFieldCount);
    for (const auto& row : kFieldRows) {
        FieldSpec spec;
        spec.field = row.field;
        spec.section = row.section;
        spec.value_kind = row.kind;
        spec.display_name = std::string(row.display);
        spec.explanation = std::string(row.explanation);
        spec.example_answer = std::string(row.example);
        spec.provenance = build_citations(row);
        out.push_back(std::move(spec));
    }
    return out;
}

} // namespace

const std::vector<FieldSpec>& field_catalog() {
    static const std::vector<FieldSpec> catalog = build_catalog();
    return catalog;
}

const FieldSpec& spec_for(LabelField field) {
    return field_catalog()[static_cast<std::size_t>(field)];
}

const std::vector<RegulationCitation>& provenance_for(LabelField field) {
    return spec_for(field).provenance;
}

UnitDefinition unit_for_section(LabelSection section) {
    UnitDefinition unit;
    unit.section = section;
    for (const auto& spec : field_catalog()) {
        if (spec.section == section) {
            unit.fields.emplace_back(spec.field, spec.explanation);
        }
    }
    return unit;
}

LabelSection section_of(LabelField field) { return row_for(field).section; }

ValueKind value_kind_of(LabelField field) { return row_for(field).kind; }

std::vector<LabelField> fields_of_section(LabelSection section) {
    std::vector<LabelField> out;
    for (const auto& row : kFieldRows) {
        if (row.section == section) out.push_back(row.field);
    }
    return out;
}

std::string_view display_name(LabelField field) { return row_for(field).display; }

std::string_view display_name(LabelSection section) {
    switch (section) {
    case LabelSection::BasicInfo: return "Basic Info";
    case LabelSection::DataRights: return "Data Rights";
    case LabelSection::RiskRelated: return "Risk Related";
    case LabelSection::AdditionalInfo: return "Additional Info";
    }
    throw std::logic_error("bad section");
}

std::string_view display_name(Regulation regulation) {
    switch (regulation) {
    case Regulation::GDPR: return "GDPR";
    case Regulation::CCPA: return "CCPA";
    case Regulation::PIPL: return "PIPL";
    case Regulation::MeasGAI: return "Meas-GAI";
    case Regulation::ReqGAI: return "Req-GAI";
    case Regulation::PrinGAI: return "Prin-GAI";
    case Regulation::MAIFGAI: return "MAIF-GAI";
    case Regulation::AIAct: return "AI Act";
    }
    throw std::logic_error("bad regulation");
}

std::string_view region_of(Regulation regulation) {
    switch (regulation) {
    case Regulation::GDPR: return "EU";
    case Regulation::CCPA: return "California";
    case Regulation::PIPL: return "China";
    case Regulation::MeasGAI: return "China";
    case Regulation::ReqGAI: return "China";
    case Regulation::PrinGAI: return "Canada";
    case Regulation::MAIFGAI: return "Singapore";
    case Regulation::AIAct: return "EU";
    }
    throw std::logic_error("bad regulation");
}

std::string_view field_id(LabelField field) { return row_for(field).id; }

std::string_view section_id(LabelSection section) {
    switch (section) {
    case LabelSection::BasicInfo: return "basic_info";
    case LabelSection::DataRights: return "data_rights";
    case LabelSection::RiskRelated: return "risk_related";
    case LabelSection::AdditionalInfo: return "additional_info";
    }
    throw std::logic_error("bad section");
}

std::optional<LabelField> parse_field(std::string_view name) {
    for (const auto& row : kFieldRows) {
        if (text::iequals(name, row.id) || text::iequals(name, row.display)) {
            return row.field;
        }
    }
    return std::nullopt;
}

std::optional<LabelSection> parse_section(std::string_view name) {
    for (LabelSection s : kSectionsInOrder) {
        if (text::iequals(name, section_id(s)) || text::iequals(name, display_name(s))) {
            return s;
        }
    }
    return std::nullopt;
}

} // namespace repo2label

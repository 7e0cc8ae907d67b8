#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace repo2label {

/// The 15 label fields, in catalog (section) order.
enum class LabelField {
    BaseModel,
    ToolModality,
    ToolFunctionality,
    WorkingDetails,
    ControllerContact,
    TargetUsers,
    DataRetention,
    RightToAccess,
    RightToBeForgotten,
    RightToLodgeComplaints,
    AIGeneratedWatermarking,
    PromptGuardrail,
    RiskNotification,
    DataEncryption,
    ProtectionOfMinors,
};

inline constexpr std::size_t kFieldCount = 15;

enum class LabelSection {
    BasicInfo,
    DataRights,
    RiskRelated,
    AdditionalInfo,
};

inline constexpr std::size_t kSectionCount = 4;

enum class ValueKind {
    FreeText,
    Binary,
};

enum class Regulation {
    GDPR,
    CCPA,
    PIPL,
    MeasGAI,
    ReqGAI,
    PrinGAI,
    MAIFGAI,
    AIAct,
};

struct RegulationCitation {
    Regulation regulation;
    std::string region;
    std::vector<std::string> articles;

    bool operator==(const RegulationCitation&) const = default;
};

struct FieldSpec {
    LabelField field;
    LabelSection section;
    ValueKind value_kind;
    std::string display_name;
    std::string explanation;
    std::string example_answer;
    std::vector<RegulationCitation> provenance;
};

/// One extraction unit: the fields of a section with their explanations,
/// used to build prompts.
struct UnitDefinition {
    LabelSection section;
    std::vector<std::pair<LabelField, std::string>> fields; // (field, explanation)
};

// ---- catalog queries (immutable static data, safe for concurrent reads) ----

/// All 15 field specs in section order (Basic Info, Data Rights,
/// Risk Related, Additional Info). Stable across calls and runs.
const std::vector<FieldSpec>& field_catalog();

const FieldSpec& spec_for(LabelField field);

/// Regulation citations backing a field, exactly the tally set.
const std::vector<RegulationCitation>& provenance_for(LabelField field);

UnitDefinition unit_for_section(LabelSection section);

LabelSection section_of(LabelField field);
ValueKind value_kind_of(LabelField field);

/// Ordered members of a section.
std::vector<LabelField> fields_of_section(LabelSection section);

// ---- names and identifiers ----

std::string_view display_name(LabelField field);
std::string_view display_name(LabelSection section);
std::string_view display_name(Regulation regulation);
std::string_view region_of(Regulation regulation);

/// Stable snake_case ids for machine-readable output.
std::string_view field_id(LabelField field);
std::string_view section_id(LabelSection section);

/// Accepts either the snake_case id or the display name (ASCII
/// case-insensitive).
std::optional<LabelField> parse_field(std::string_view name);
std::optional<LabelSection> parse_section(std::string_view name);

inline constexpr std::string_view kSchemaVersion = "1";

/// Footnote attached to the Controller Contact explanation.
inline constexpr std::string_view kControllerContactNote =
    "The GitHub account does not count as a publicly available contact.";

inline constexpr std::array<LabelSection, kSectionCount> kSectionsInOrder = {
    LabelSection::BasicInfo,
    LabelSection::DataRights,
    LabelSection::RiskRelated,
    LabelSection::AdditionalInfo,
};

} // namespace repo2label

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "repo2label/label_schema.hpp"
#include "repo2label/merge.hpp"
#include "test_support.hpp"

namespace r2l_test {

/// One exemplar repository: real-world code shapes (model config lines,
/// watermark encoders, encryption tests, ...) that the scripted extraction
/// replies point into.
struct FixtureRepo {
    std::string id;                                             // directory name / repo id
    std::vector<std::pair<std::string, std::string>> files;     // (relative path, content)
};

/// The eight exemplar repositories.
const std::vector<FixtureRepo>& fixture_repos();

const FixtureRepo& fixture_repo(const std::string& id);

/// Write one fixture repo under root/<id>/, returning its directory.
std::filesystem::path write_fixture_repo(const std::filesystem::path& root,
                                         const std::string& id);

/// What the pipeline must extract from a fixture: one exact evidence triple
/// under a specific field.
struct ExpectedTriple {
    std::string repo_id;
    repo2label::LabelField field;
    repo2label::EvidenceTriple triple;
};

const std::vector<ExpectedTriple>& expected_triples();

/// Scripted extraction replies for the exemplar repos (used both directly
/// and to record replay transcripts).
std::vector<ScriptRule> fixture_rules();

/// Scripted replies demonstrating verification outcomes on the `verifyrepo`
/// fixture: first-try pass, pass after 2 reflections, demotion after 4 bad
/// references. Includes a hallucinating rule for the agentgpt repo.
std::vector<ScriptRule> verification_rules();

/// The single-file repo the verification script runs against.
const FixtureRepo& verify_repo();

/// Gold annotations covering the three-repo evaluation corpus
/// (babyagi, stable_diffusion, agentgpt), CSV text.
std::string corpus_gold_csv();

} // namespace r2l_test

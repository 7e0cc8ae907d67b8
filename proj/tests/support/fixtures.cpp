#include "fixtures.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace r2l_test {

namespace {

using repo2label::EvidenceTriple;
using repo2label::LabelField;

const char* kBabyagiMain = R"PY(#!/usr/bin/env python3
import os
import time
from collections import deque
from dotenv import load_dotenv

load_dotenv()

# Engine configuration
LLM_MODEL = os.getenv('LLM_MODEL',os.getenv('OPENAI_API_MODEL', 'gpt-3.5-turbo')).lower()
OPENAI_API_KEY = os.getenv("OPENAI_API_KEY", "")
RESULTS_STORE_NAME = os.getenv("RESULTS_STORE_NAME", "baby-agi")
INITIAL_TASK = os.getenv("INITIAL_TASK", "Develop a task list")


def main():
    task_list = deque([])
    print("Objective: " + INITIAL_TASK)


if __name__ == "__main__":
    main()
)PY";

const char* kTxt2Img = R"PY(import cv2
import numpy as np
from PIL import Image
from imwatermark import WatermarkEncoder


def put_watermark(img, wm_encoder=None):
    if wm_encoder is not None:
        img = cv2.cvtColor(np.asarray(img), cv2.COLOR_RGB2BGR)
        img = wm_encoder.encode(img, 'dwtDct')
        img = Image.fromarray(img[:, :, ::-1])
    return img


def main(opt):
    print("Creating invisible watermark encoder (see https://github.com/ShieldMnt/invisible-watermark)...")
    wm = "StableDiffusionV1"
    wm_encoder = WatermarkEncoder()
    wm_encoder.set_watermark('bytes', wm.encode('utf-8'))
)PY";

const char* kBackgroundIndex = R"JS(async function getAccessToken() {
  const resp = await fetch("https://chat.openai.com/api/auth/session");
  const data = await resp.json().catch(() => ({}));
  return data.accessToken;
}

async function deleteConversation(conversationId) {
  const accessToken = await getAccessToken();
  const resp = await fetch(
    `https://chat.openai.com/backend-api/conversation/${conversationId}`,
    {
      method: "PATCH",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${accessToken}`,
      },
      body: JSON.stringify({ is_visible: false }),
    }
  )
    .then((r) => r.json())
    .catch(() => ({}));
  if (resp?.success) {
    return true;
  }
  return false;
}
)JS";

const char* kGoogleAqa = R"PY(from typing import List

import google.ai.generativelanguage as genai


class GoogleTextSynthesizer:
    @classmethod
    def from_defaults(
        cls,
        temperature: float = 0.7,
        answer_style: int = 1,
        safety_setting: List["genai.SafetySetting"] = [],
    ) -> "GoogleTextSynthesizer":
        """Create a new Google AQA.

        Example:
          responder = GoogleTextSynthesizer.from_defaults(
              temperature=0.7,
              answer_style=AnswerStyle.ABSTRACTIVE,
          )
        """
        return cls(temperature=temperature, answer_style=answer_style,
                   safety_setting=safety_setting)
)PY";

const char* kGradioServer = R"PY(import gradio as gr

title_markdown = """
# LLaVA: Large Language and Vision Assistant
"""

tos_markdown = """
### Terms of use
By using this service, users are required to agree to the following terms:
The service is a research preview intended for non-commercial use only.
Please click the "Flag" button if you get any inappropriate answers! We will collect those to keep improving our moderator.
"""
)PY";

const char* kMacawReadme = R"MD(# Macaw

Macaw (Multi-angle c(q)uestion answering) is a ready-to-use model capable of
general question answering.

## Disclaimer

As a model capable of generating free form text, the output of the model is not guaranteed to be free of
offensive material, so appropriate caution is advised when using the model.
)MD";

const char* kEncryptionTest = R"PY(from cryptography.fernet import Fernet

from reworkd_platform.services.security import EncryptionService


def test_encrypt_decrypt():
    key = Fernet.generate_key()
    service = EncryptionService(key)

    original_text = "Hello, world!"
    encrypted = service.encrypt(original_text)
    decrypted = service.decrypt(encrypted)

    assert original_text == decrypted
)PY";

const char* kSafetyDoc = R"MD(# Safety

The moderation layer screens both prompts and completions.

Llama Guard safety taxonomy:

- Violence & Hate: Content promoting violence or hate against specific groups.
- Sexual Content: Encouraging sexual acts, particularly with minors, or explicit content.
)MD";

const char* kVerifyNotes =
    "# runtime configuration\n"
    "API_MODEL = \"gpt-4\"\n"
    "WATERMARK = True\n"
    "RETENTION_DAYS = 30\n";

// The reference strings the scripted replies emit (continuation lines are
// unindented; whitespace-insensitive matching ties them back to the files).
const char* kBabyagiRef =
    "LLM_MODEL = os.getenv('LLM_MODEL',os.getenv('OPENAI_API_MODEL', 'gpt-3.5-turbo')).lower()";

const char* kWatermarkRef =
    "wm = \"StableDiffusionV1\"\n"
    "wm_encoder = WatermarkEncoder()\n"
    "wm_encoder.set_watermark('bytes', wm.encode('utf-8'))";

const char* kDeleteRef = "async function deleteConversation(conversationId) {";

const char* kSafetySettingRef = "safety_setting: List[\"genai.SafetySetting\"] = [],";

const char* kFlagRef =
    "Please click the \"Flag\" button if you get any inappropriate answers! "
    "We will collect those to keep improving our moderator.";

const char* kDisclaimerRef =
    "As a model capable of generating free form text, the output of the model is not guaranteed to be free of\n"
    "offensive material, so appropriate caution is advised when using the model.";

const char* kEncryptRef =
    "def test_encrypt_decrypt():\n"
    "    key = Fernet.generate_key()\n"
    "    service = EncryptionService(key)";

const char* kTaxonomyRef =
    "- Violence & Hate: Content promoting violence or hate against specific groups.\n"
    "- Sexual Content: Encouraging sexual acts, particularly with minors, or explicit content.";

// Fragment of the fixed correction sentence; enough to tell a reflection
// round apart from the initial request for the same unit.
const char* kReflectionToken = "Please ensure that the reference provided this time";

std::string block(const std::string& field, const std::string& value, const std::string& reference) {
    return "FIELD: " + field + "\nVALUE: " + value + "\nREFERENCE: " + reference + "\n";
}

std::vector<FixtureRepo> make_repos() {
    return {
        {"babyagi", {{"babyagi.py", kBabyagiMain}}},
        {"stable_diffusion", {{"scripts/txt2img.py", kTxt2Img}}},
        {"summarize_site", {{"background/index.js", kBackgroundIndex}}},
        {"llama_index", {{"synthesizers/google_aqa.py", kGoogleAqa}}},
        {"llava", {{"llava/serve/gradio_web_server.py", kGradioServer}}},
        {"macaw", {{"README.md", kMacawReadme}}},
        {"agentgpt", {{"platform/tests/test_encryption_service.py", kEncryptionTest}}},
        {"llama_guard", {{"docs/safety.md", kSafetyDoc}}},
    };
}

std::vector<ExpectedTriple> make_triples() {
    return {
        {"babyagi", LabelField::BaseModel,
         {"babyagi.py", "gpt-3.5-turbo", kBabyagiRef}},
        {"stable_diffusion", LabelField::AIGeneratedWatermarking,
         {"scripts/txt2img.py", "Yes", kWatermarkRef}},
        {"summarize_site", LabelField::RightToBeForgotten,
         {"background/index.js", "Yes", kDeleteRef}},
        {"llama_index", LabelField::PromptGuardrail,
         {"synthesizers/google_aqa.py", "Yes", kSafetySettingRef}},
        {"llava", LabelField::RightToLodgeComplaints,
         {"llava/serve/gradio_web_server.py", "Yes", kFlagRef}},
        {"macaw", LabelField::RiskNotification,
         {"README.md", "Yes", kDisclaimerRef}},
        {"agentgpt", LabelField::DataEncryption,
         {"platform/tests/test_encryption_service.py", "Yes", kEncryptRef}},
        {"llama_guard", LabelField::ProtectionOfMinors,
         {"docs/safety.md", "Yes", kTaxonomyRef}},
    };
}

} // namespace

const std::vector<FixtureRepo>& fixture_repos() {
    static const std::vector<FixtureRepo> repos = make_repos();
    return repos;
}

const FixtureRepo& fixture_repo(const std::string& id) {
    for (const auto& repo : fixture_repos()) {
        if (repo.id == id) return repo;
    }
    throw std::out_of_range("no fixture repo named " + id);
}

std::filesystem::path write_fixture_repo(const std::filesystem::path& root,
                                         const std::string& id) {
    const FixtureRepo& repo = (id == "verifyrepo") ? verify_repo() : fixture_repo(id);
    std::filesystem::path dir = root / id;
    for (const auto& [rel, content] : repo.files) {
        write_file(dir / rel, content);
    }
    return dir;
}

const std::vector<ExpectedTriple>& expected_triples() {
    static const std::vector<ExpectedTriple> triples = make_triples();
    return triples;
}

std::vector<ScriptRule> fixture_rules() {
    return {
        {{"- Base Model:", "LLM_MODEL = os.getenv"},
         {block("Base Model", "gpt-3.5-turbo", kBabyagiRef)}},
        {{"- AI-generated Watermarking:", "StableDiffusionV1"},
         {block("AI-generated Watermarking", "Yes", kWatermarkRef)}},
        {{"- Right to be Forgotten:", "deleteConversation"},
         {block("Right to be Forgotten", "Yes", kDeleteRef)}},
        {{"- Prompt Guardrail:", "GoogleTextSynthesizer"},
         {block("Prompt Guardrail", "Yes", kSafetySettingRef)}},
        {{"- Right to Lodge Complaints:", "\"Flag\" button"},
         {block("Right to Lodge Complaints", "Yes", kFlagRef)}},
        {{"- Risk Notification:", "appropriate caution is advised"},
         {block("Risk Notification", "Yes", kDisclaimerRef)}},
        {{"- Data Encryption:", "test_encrypt_decrypt"},
         {block("Data Encryption", "Yes", kEncryptRef)}},
        {{"- Protection of Minors:", "Llama Guard safety taxonomy"},
         {block("Protection of Minors", "Yes", kTaxonomyRef)}},
    };
}

std::vector<ScriptRule> verification_rules() {
    // Reflection rules come first: a reflection request embeds the original
    // prompt, so it would otherwise be swallowed by the initial-round rules.
    return {
        // verifyrepo, Data Retention: bad first reference, bad first
        // correction, good second correction.
        {{kReflectionToken, "field \"Data Retention\"", "RETENTION_DAYS"},
         {block("Data Retention", "Yes", "KEEP_DAYS = 30"),
          block("Data Retention", "Yes", "RETENTION_DAYS = 30")}},
        // verifyrepo, Prompt Guardrail: every correction is bad too.
        {{kReflectionToken, "field \"Prompt Guardrail\"", "WATERMARK = True"},
         {block("Prompt Guardrail", "Yes", "GUARDRAIL_LEVEL = 2"),
          block("Prompt Guardrail", "Yes", "GUARDRAIL_LEVEL = 2"),
          block("Prompt Guardrail", "Yes", "GUARDRAIL_LEVEL = 2")}},
        // agentgpt, Prompt Guardrail: hallucinated reference that never
        // survives correction.
        {{kReflectionToken, "field \"Prompt Guardrail\"", "test_encrypt_decrypt"},
         {block("Prompt Guardrail", "Yes", "SAFETY_FILTER = on"),
          block("Prompt Guardrail", "Yes", "SAFETY_FILTER = on"),
          block("Prompt Guardrail", "Yes", "SAFETY_FILTER = on")}},
        // Initial rounds.
        {{"- Data Retention:", "RETENTION_DAYS = 30"},
         {block("Data Retention", "Yes", "RETENTION_POLICY = \"strict\"")}},
        {{"- AI-generated Watermarking:", "WATERMARK = True"},
         {block("AI-generated Watermarking", "Yes", "WATERMARK = True") + "\n" +
          block("Prompt Guardrail", "Yes", "GUARDRAIL_MODE = \"strict\"")}},
        {{"- Prompt Guardrail:", "test_encrypt_decrypt"},
         {block("Prompt Guardrail", "Yes", "SAFETY_FILTER = enabled")}},
    };
}

const FixtureRepo& verify_repo() {
    static const FixtureRepo repo{"verifyrepo", {{"notes.py", kVerifyNotes}}};
    return repo;
}

std::string corpus_gold_csv() {
    using repo2label::LabelField;
    using repo2label::ValueKind;

    struct Entry {
        std::string repo;
        std::string file;
        std::map<LabelField, std::string> overrides;
    };
    const std::vector<Entry> entries = {
        {"babyagi", "babyagi.py", {{LabelField::BaseModel, "gpt-3.5-turbo"}}},
        {"stable_diffusion", "scripts/txt2img.py",
         {{LabelField::AIGeneratedWatermarking, "Yes"}}},
        {"agentgpt", "platform/tests/test_encryption_service.py",
         {{LabelField::DataEncryption, "Yes"}}},
    };

    std::ostringstream out;
    out << "repo,file_path,field,value\n";
    for (const auto& entry : entries) {
        for (const auto& spec : repo2label::field_catalog()) {
            std::string value;
            auto it = entry.overrides.find(spec.field);
            if (it != entry.overrides.end()) {
                value = it->second;
            } else {
                value = (spec.value_kind == ValueKind::Binary) ? "No" : "N/A";
            }
            out << entry.repo << ',' << entry.file << ','
                << repo2label::field_id(spec.field) << ',' << value << '\n';
        }
    }
    return out.str();
}

} // namespace r2l_test

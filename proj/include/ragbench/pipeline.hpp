#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/dedup.hpp"
#include "ragbench/genctl.hpp"
#include "ragbench/kb.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/prompts.hpp"
#include "ragbench/synth.hpp"

namespace ragbench {

// One accepted benchmark question.
struct QAPair {
    std::string qa_id;       // ROB_0001 / MULTI_0001 / GEN_0001 ...
    std::string test_type;   // robustness | multihop | generation
    std::string format;      // objective:math ... subjective:causal_reasoning ...
    std::string question;
    std::string ground_truth;
    std::string context_ref;  // bundle id the question was generated from
    std::string precision;    // low | medium | high
    double density = 0.0;
    std::optional<std::string> dominant_category;
    ControlParams control;    // sampling knobs of the accepting attempt
    // (attempt number within the context, outcome) — 1-based, ends "accepted".
    std::vector<std::pair<int, std::string>> attempt_log;
    std::string template_id;

    nlohmann::json to_json() const;
    static QAPair from_json(const nlohmann::json& j);
};

// Sampling-parameter tuple recorded for every generation attempt.
struct AuditEntry {
    std::string context;
    std::string precision;
    double density = 0.0;
    std::optional<std::string> dominant_category;
    int successes = 0;        // k at attempt start
    int failed_attempts = 0;  // a at attempt start
    int sim_failures = 0;     // s at attempt start
    int retry = 0;            // retries already spent on this context (0-based)
    double temperature = 0.0;
    double nucleus_p = 0.0;
    double sim_threshold = 0.0;
    int attempt = 0;          // 1-based attempt number within the context
    std::string outcome;

    nlohmann::json to_json() const;
    static AuditEntry from_json(const nlohmann::json& j);
};

// Outcome of checking one raw model completion against the required shape.
struct QaValidation {
    bool ok = false;
    std::string question;
    std::string ground_truth;
    std::string error_kind;  // parse_failure | empty_field | format_error | grounding_failure
    std::string error_detail;
};

// Parses the completion as a {"question", "ground_truth"} JSON object and
// enforces: non-empty fields; question ends in '?' or contains ____; every
// number in the ground truth appears in the context; at least half of the
// ground truth's content words appear in the context.
QaValidation validate_qa(const std::string& raw,
                         const std::set<std::string>& context_tokens);

struct GenerationConfig {
    int max_attempts_per_context = 5;
    int token_budget = 4096;
    std::uint64_t seed = 0;  // shuffles context visiting order
    SynthConfig synth;
    CategoryAdjustments adjustments = CategoryAdjustments::defaults();
    double term_bonus = 0.05;          // domain-term weight in duplicate scoring
    std::size_t semantic_min_pool = 5;
    double semantic_margin = 0.05;
    std::vector<OutputLimitRule> output_ladder;  // empty = built-in ladder
};

struct GenerationResult {
    std::vector<QAPair> pairs;
    std::vector<ContextBundle> bundles;  // every synthesized context
    std::vector<SynthSkip> skipped;
    std::vector<AuditEntry> audit;
    GenerationState final_state;
    bool exhausted = false;   // stopped before reaching n
    std::string warning;
};

// Generates up to n accepted question/answer pairs for one test type, cycling
// through synthesized contexts with per-attempt adaptive sampling parameters.
GenerationResult generate_benchmark(const TfIdfIndex& index, const KnowledgeBase& kb,
                                    TestType type, int n, ChatClient& client,
                                    const PromptLibrary& lib,
                                    const GenerationConfig& cfg);

const char* qa_id_prefix(TestType t);  // "ROB_", "MULTI_", "GEN_"

}  // namespace ragbench

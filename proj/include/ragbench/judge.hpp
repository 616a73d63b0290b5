#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/kb.hpp"
#include "ragbench/llm.hpp"

namespace ragbench {

enum class MetricKind {
    completeness = 0,
    technical_depth = 1,
    factuality = 2,
    relevance = 3,
    context_utilization = 4,
    support_quality = 5,
};

inline constexpr std::array<const char*, 6> kMetricNames = {
    "completeness",    "technical_depth",     "factuality",
    "relevance",       "context_utilization", "support_quality"};

const char* metric_name(MetricKind m);
MetricKind metric_from_name(const std::string& name);

// ---- rubrics ---------------------------------------------------------------

struct RubricBand {
    std::string range;        // "9-10", "7-8", "5-6", "3-4", "1-2", "0"
    std::string description;  // "---" marks a band the variant never awards
    bool operator==(const RubricBand&) const = default;
};

struct RubricVariant {
    std::string name;  // objective | subjective | with_context | without_context | manual_setup
    std::vector<RubricBand> bands;
    bool operator==(const RubricVariant&) const = default;
};

struct Rubric {
    std::string metric;
    std::string focus;  // one-line statement of what the metric measures
    std::vector<RubricVariant> variants;
    bool operator==(const Rubric&) const = default;
};

class RubricSet {
public:
    static RubricSet builtin();
    // Loads <metric>.json for all six metrics from dir.
    static RubricSet load(const std::filesystem::path& dir);

    const Rubric& rubric(MetricKind m) const;
    const RubricVariant& variant(MetricKind m, const std::string& name) const;
    bool operator==(const RubricSet&) const = default;

private:
    std::map<std::string, Rubric> rubrics_;
};

// ---- scoring ---------------------------------------------------------------

struct JudgeInputs {
    std::string question;
    std::string ground_truth;
    std::string answer;
    std::string context;            // shown to the judge when available
    bool objective = true;          // question format family
    bool context_available = false;
};

// Which rubric variant applies, given the question format and whether the
// retrieval context can be shown to the judge.
std::string select_variant(MetricKind m, const JudgeInputs& in);

struct MetricScore {
    double value = 0.0;   // normalized 0..1
    double raw = 0.0;     // 0..10 scale
    bool weighted = false;  // probability-weighted over score candidates
    bool failed = false;
    int reasks = 0;
    std::string variant;
    std::string note;

    nlohmann::json to_json() const;
    static MetricScore from_json(const nlohmann::json& j);
};

struct JudgeOptions {
    int max_reasks = 1;  // one corrective follow-up on an unparseable verdict
};

std::string render_judge_prompt(const RubricSet& rubrics, MetricKind m,
                                const JudgeInputs& in);

// Extracts the integer verdict from a judge completion; nullopt when absent.
std::optional<int> parse_judge_score(const std::string& text);

// Scores one metric: renders the rubric prompt, asks the judge, retries once
// with a corrective nudge if the verdict is unparseable, and prefers the
// probability-weighted mean over score candidates when the judge exposes
// token probabilities.
MetricScore judge_response(ChatClient& judge, const RubricSet& rubrics,
                           MetricKind m, const JudgeInputs& in,
                           const JudgeOptions& opts = {});

std::map<std::string, MetricScore> judge_all(ChatClient& judge,
                                             const RubricSet& rubrics,
                                             const JudgeInputs& in,
                                             const JudgeOptions& opts = {});

// ---- evaluation records ------------------------------------------------------

struct EvaluationRecord {
    std::string qa_id;
    std::string mode;  // with_kb | without_kb
    std::string answer;
    bool context_detected = false;  // heuristic flag for opaque systems
    std::map<std::string, MetricScore> metrics;
    std::vector<std::string> failed_metrics;
    double mean = 0.0;  // unweighted mean of non-failed normalized scores

    nlohmann::json to_json() const;
    static EvaluationRecord from_json(const nlohmann::json& j);
};

EvaluationRecord make_record(std::string qa_id, std::string mode,
                             std::string answer,
                             std::map<std::string, MetricScore> metrics);

// ---- dual-mode diagnosis -----------------------------------------------------

struct DualModeThresholds {
    double retrieval_gap = 0.15;      // mean improvement that implicates retrieval
    double weak_generation = 0.5;     // both-mode ceiling that implicates the model
};

struct DualModeReport {
    int paired = 0;
    std::map<std::string, double> mean_a;   // native retrieval mode, per metric
    std::map<std::string, double> mean_b;   // gold-context mode, per metric
    std::map<std::string, double> delta;    // b - a, per metric
    double overall_a = 0.0;
    double overall_b = 0.0;
    double mean_delta = 0.0;
    std::string verdict;  // retrieval_failure | generation_weakness | healthy

    nlohmann::json to_json() const;
};

// Pairs records by qa_id and classifies where quality is being lost:
// a large B-over-A gap implicates retrieval; low scores in both modes
// implicate the generator; otherwise the pipeline is healthy.
DualModeReport dual_mode_delta(const std::vector<EvaluationRecord>& mode_a,
                               const std::vector<EvaluationRecord>& mode_b,
                               const DualModeThresholds& t = {});

// ---- context-use heuristic ---------------------------------------------------

struct ContextHeuristic {
    std::vector<std::string> indicator_phrases = {"according to", "standard specifies",
                                                  "SEMI"};
    double min_density = 0.02;
};

struct ContextDetection {
    bool detected = false;
    int indicator_hits = 0;
    double density = 0.0;
};

// For systems that expose neither sources nor context: infer context use from
// citation-style phrases plus the density of domain vocabulary in the answer.
ContextDetection detect_context_use(const KnowledgeBase& kb, const std::string& answer,
                                    const ContextHeuristic& h = {});

}  // namespace ragbench

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "ragbench/kb.hpp"

namespace ragbench {

// Mutable counters threaded through a generation run.
struct GenerationState {
    int successes = 0;                 // accepted questions so far
    int failed_attempts = 0;           // every rejected attempt, any cause
    int consecutive_sim_failures = 0;  // uniqueness rejections since last accept
    int retries_current = 0;           // retries spent on the current context
    int objective_count = 0;
    int subjective_count = 0;
    std::array<int, 4> objective_subtype_counts{};  // math, fill_blank, true_false, multiple_choice
};

// Sampling knobs computed for one generation attempt.
struct ControlParams {
    double temperature = 0.0;
    double nucleus_p = 0.0;
    double sim_threshold = 0.0;
};

// Per-category temperature offsets. Keys accept both the full category names
// used by the shipped knowledge base and generic short aliases.
struct CategoryAdjustments {
    std::map<std::string, double> offsets;
    static CategoryAdjustments defaults();
    double offset_for(const std::optional<std::string>& category) const;
};

// Temperature rises with progress (more accepted questions), failures, and
// uniqueness pressure; category and precision anchor the base range.
double adaptive_temperature(PrecisionLevel precision, int successes,
                            int failed_attempts, int consecutive_sim_failures,
                            double category_offset);

double nucleus_p_for(double temperature);

// Similarity acceptance threshold, relaxed per retry down to a floor.
double sim_threshold(PrecisionLevel precision, int retries);

ControlParams control_params(PrecisionLevel precision, const GenerationState& state,
                             const std::optional<std::string>& dominant_category,
                             const CategoryAdjustments& adjustments);

// Completion-size limit matched to the context window (tokens -> tokens).
struct OutputLimitRule {
    int max_window;  // inclusive upper bound; <=0 means "anything larger"
    int output_limit;
};
int output_limit_for_window(int window_tokens,
                            const std::vector<OutputLimitRule>& ladder = {});
std::vector<OutputLimitRule> default_output_ladder();

}  // namespace ragbench

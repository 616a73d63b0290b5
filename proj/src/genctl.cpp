#include "ragbench/genctl.hpp"

#include <algorithm>

#include "ragbench/errors.hpp"

namespace ragbench {

namespace {

struct TempRange {
    double lo, hi;
};

TempRange base_range(PrecisionLevel p) {
    switch (p) {
        case PrecisionLevel::high: return {0.4, 0.8};
        case PrecisionLevel::medium: return {0.5, 0.9};
        case PrecisionLevel::low: return {0.6, 1.0};
    }
    return {0.6, 1.0};
}

double theta_base(PrecisionLevel p) {
    switch (p) {
        case PrecisionLevel::high: return 0.70;
        case PrecisionLevel::medium: return 0.75;
        case PrecisionLevel::low: return 0.80;
    }
    return 0.80;
}

}  // namespace

CategoryAdjustments CategoryAdjustments::defaults() {
    CategoryAdjustments a;
    // Trimmed for precision-sensitive categories, loosened where variety helps.
    const std::pair<const char*, double> table[] = {
        {"parameters", -0.10}, {"Performance Parameters", -0.10},
        {"processes", -0.08},  {"Process Nodes", -0.08},
        {"devices", -0.05},    {"Device Physics", -0.05},
        {"testing", -0.03},    {"Testing Methodologies", -0.03},
        {"materials", 0.00},   {"Materials Science", 0.00},
        {"manufacturing", 0.02}, {"Manufacturing Processes", 0.02},
        {"applications", 0.05},  {"Applications", 0.05},
    };
    for (const auto& [k, v] : table) a.offsets[k] = v;
    return a;
}

double CategoryAdjustments::offset_for(const std::optional<std::string>& category) const {
    if (!category) return 0.0;
    auto it = offsets.find(*category);
    return it == offsets.end() ? 0.0 : it->second;
}

double adaptive_temperature(PrecisionLevel precision, int successes,
                            int failed_attempts, int consecutive_sim_failures,
                            double category_offset) {
    if (successes < 0 || failed_attempts < 0 || consecutive_sim_failures < 0)
        throw ConfigError("generation counters must be non-negative");
    TempRange r = base_range(precision);
    double progress = std::min(static_cast<double>(successes) / 20.0, 0.8);
    double tau = r.lo + (r.hi - r.lo) * progress;
    tau += category_offset;
    tau += std::min(0.25, 0.08 * failed_attempts);
    tau += std::min(0.15, 0.05 * consecutive_sim_failures);
    return std::clamp(tau, 0.1, 1.0);
}

double nucleus_p_for(double temperature) {
    if (temperature <= 0.4) return 0.95;
    if (temperature <= 0.7) return 0.90;
    return 0.85;
}

double sim_threshold(PrecisionLevel precision, int retries) {
    if (retries < 0) throw ConfigError("retry count must be non-negative");
    return std::max(0.50, theta_base(precision) - 0.05 * retries);
}

ControlParams control_params(PrecisionLevel precision, const GenerationState& state,
                             const std::optional<std::string>& dominant_category,
                             const CategoryAdjustments& adjustments) {
    ControlParams p;
    p.temperature = adaptive_temperature(precision, state.successes,
                                         state.failed_attempts,
                                         state.consecutive_sim_failures,
                                         adjustments.offset_for(dominant_category));
    p.nucleus_p = nucleus_p_for(p.temperature);
    p.sim_threshold = sim_threshold(precision, state.retries_current);
    return p;
}

std::vector<OutputLimitRule> default_output_ladder() {
    return {{4096, 1024}, {10240, 2048}, {0, 4096}};
}

int output_limit_for_window(int window_tokens, const std::vector<OutputLimitRule>& ladder) {
    if (window_tokens <= 0) throw ConfigError("window size must be positive");
    const auto rules = ladder.empty() ? default_output_ladder() : ladder;
    for (const auto& r : rules)
        if (r.max_window > 0 && window_tokens <= r.max_window) return r.output_limit;
    for (const auto& r : rules)
        if (r.max_window <= 0) return r.output_limit;
    return rules.back().output_limit;
}

}  // namespace ragbench

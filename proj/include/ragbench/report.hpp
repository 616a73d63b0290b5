#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ragbench/judge.hpp"

namespace ragbench {

// Column order used by every CSV this module reads or writes.
inline constexpr std::array<const char*, 6> kCsvMetricOrder = {
    "factuality",          "technical_depth", "completeness",
    "relevance",           "context_utilization", "support_quality"};

// Aggregated scores for one (system, context window, output limit) cell.
struct ConfigPoint {
    std::string system;
    int window_tokens = 0;
    int output_tokens = 0;
    int n_records = 0;
    std::map<std::string, double> metric_means;  // normalized 0..1
    double overall = 0.0;  // unweighted mean of the six metric means
};

// Means per metric over non-failed scores; throws on an empty group.
ConfigPoint aggregate_point(const std::string& system, int window_tokens,
                            int output_tokens,
                            const std::vector<EvaluationRecord>& records);

// ---- context scaling fit -----------------------------------------------------

struct ScalingFit {
    double slope = 0.0;      // per unit of ln(window tokens)
    double intercept = 0.0;
    double r2 = 0.0;         // 0 when the values do not vary at all
    int n = 0;
};

// Least squares of value against ln(window_tokens). Needs at least three
// points spanning more than one window size.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& window_vs_value);

// Convenience: fit one metric ("overall" included) across points of one system.
ScalingFit scaling_fit_metric(const std::vector<ConfigPoint>& points,
                              const std::string& metric);

// ---- context dilution ----------------------------------------------------------

// Relative change of each metric (and the overall mean) between two window
// sizes, in percent of the lower-window value.
struct DilutionDelta {
    std::string metric;
    double lower_value = 0.0;
    double upper_value = 0.0;
    double delta_pct = 0.0;  // (upper - lower) / lower * 100
};

std::vector<DilutionDelta> dilution_delta(const ConfigPoint& lower,
                                          const ConfigPoint& upper);

// ---- metric correlation ----------------------------------------------------------

struct CorrelationMatrix {
    std::vector<std::string> metrics;
    std::vector<std::vector<double>> r;      // Pearson, r[i][j]
    std::vector<std::vector<bool>> defined;  // false when a metric has no variance
};

CorrelationMatrix metric_correlation(const std::vector<ConfigPoint>& points);

// ---- CSV -----------------------------------------------------------------------

std::string points_csv(const std::vector<ConfigPoint>& points);
std::string scaling_csv(const std::vector<std::tuple<std::string, std::string, ScalingFit>>& rows);
std::string dilution_csv(const std::string& system, int lower_window, int upper_window,
                         const std::vector<DilutionDelta>& rows);
std::string correlation_csv(const CorrelationMatrix& m);
std::string attribution_csv(const DualModeReport& report);

// One row of a published-results table: the per-metric scores plus the
// overall value the source reported (kept separate so it can be checked
// against the recomputed mean).
struct FixtureRow {
    ConfigPoint point;
    double reported_overall = 0.0;
};

// Reads a results CSV with header: system,window_tokens,output_tokens,
// factuality,...,support_quality,reported_overall.
std::vector<FixtureRow> load_results_csv(const std::filesystem::path& file);

}  // namespace ragbench

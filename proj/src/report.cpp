#include "ragbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ragbench/errors.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

ConfigPoint aggregate_point(const std::string& system, int window_tokens,
                            int output_tokens,
                            const std::vector<EvaluationRecord>& records) {
    if (records.empty())
        throw ConfigError("cannot aggregate an empty record group for " + system);
    ConfigPoint p;
    p.system = system;
    p.window_tokens = window_tokens;
    p.output_tokens = output_tokens;
    p.n_records = static_cast<int>(records.size());

    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& r : records)
        for (const auto& [name, score] : r.metrics)
            if (!score.failed) {
                acc[name].first += score.value;
                acc[name].second += 1;
            }
    double sum = 0.0;
    int n = 0;
    for (const auto& [name, sc] : acc)
        if (sc.second > 0) {
            p.metric_means[name] = sc.first / sc.second;
            sum += p.metric_means[name];
            ++n;
        }
    if (n == 0)
        throw ConfigError("record group for " + system + " has no scored metrics");
    p.overall = sum / n;
    return p;
}

// ---- scaling fit ------------------------------------------------------------

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& window_vs_value) {
    if (window_vs_value.size() < 3)
        throw ConfigError("scaling fit needs at least three points");
    std::vector<double> x, y;
    for (const auto& [w, v] : window_vs_value) {
        if (w <= 0.0) throw ConfigError("window sizes must be positive");
        x.push_back(std::log(w));
        y.push_back(v);
    }
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw ConfigError("scaling fit needs more than one distinct window size");

    ScalingFit f;
    f.n = static_cast<int>(n);
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy == 0.0) {
        f.r2 = 0.0;  // flat response: no variance explained, none to explain
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = y[i] - (f.intercept + f.slope * x[i]);
            ss_res += e * e;
        }
        f.r2 = 1.0 - ss_res / syy;
    }
    return f;
}

ScalingFit scaling_fit_metric(const std::vector<ConfigPoint>& points,
                              const std::string& metric) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : points) {
        if (metric == "overall") {
            xy.emplace_back(p.window_tokens, p.overall);
        } else {
            auto it = p.metric_means.find(metric);
            if (it == p.metric_means.end())
                throw LookupError("point " + p.system + "@" +
                                  std::to_string(p.window_tokens) +
                                  " has no metric: " + metric);
            xy.emplace_back(p.window_tokens, it->second);
        }
    }
    return scaling_fit(xy);
}

// ---- dilution ------------------------------------------------------------------

std::vector<DilutionDelta> dilution_delta(const ConfigPoint& lower,
                                          const ConfigPoint& upper) {
    if (lower.window_tokens >= upper.window_tokens)
        throw ConfigError("dilution expects the lower window first");
    std::vector<DilutionDelta> out;
    auto push = [&out](const std::string& name, double lo, double hi) {
        if (lo == 0.0)
            throw ConfigError("dilution baseline for '" + name + "' is zero");
        out.push_back({name, lo, hi, (hi - lo) / lo * 100.0});
    };
    for (const char* name : kCsvMetricOrder) {
        auto li = lower.metric_means.find(name);
        auto ui = upper.metric_means.find(name);
        if (li == lower.metric_means.end() || ui == upper.metric_means.end()) continue;
        push(name, li->second, ui->second);
    }
    push("overall", lower.overall, upper.overall);
    return out;
}

// ---- correlation ------------------------------------------------------------------

CorrelationMatrix metric_correlation(const std::vector<ConfigPoint>& points) {
    if (points.size() < 2)
        throw ConfigError("metric correlation needs at least two points");
    CorrelationMatrix m;
    for (const char* name : kCsvMetricOrder) m.metrics.push_back(name);

    const std::size_t k = m.metrics.size();
    std::vector<std::vector<double>> cols(k);
    for (const auto& p : points)
        for (std::size_t i = 0; i < k; ++i) {
            auto it = p.metric_means.find(m.metrics[i]);
            if (it == p.metric_means.end())
                throw LookupError("point " + p.system + "@" +
                                  std::to_string(p.window_tokens) +
                                  " has no metric: " + m.metrics[i]);
            cols[i].push_back(it->second);
        }

    const std::size_t n = points.size();
    std::vector<double> mean(k, 0.0), var(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (double v : cols[i]) mean[i] += v;
        mean[i] /= static_cast<double>(n);
        for (double v : cols[i]) var[i] += (v - mean[i]) * (v - mean[i]);
    }

    m.r.assign(k, std::vector<double>(k, 0.0));
    m.defined.assign(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (var[i] == 0.0 || var[j] == 0.0) continue;  // undefined
            double cov = 0.0;
            for (std::size_t t = 0; t < n; ++t)
                cov += (cols[i][t] - mean[i]) * (cols[j][t] - mean[j]);
            m.r[i][j] = cov / std::sqrt(var[i] * var[j]);
            m.defined[i][j] = true;
        }
    }
    return m;
}

// ---- CSV ---------------------------------------------------------------------------

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string csv_field(const std::string& s) {
    if (!needs_quoting(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

// Minimal CSV reader: quoted fields, doubled quotes, LF or CRLF line ends.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
            row.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string points_csv(const std::vector<ConfigPoint>& points) {
    std::string out = "system,window_tokens,output_tokens,n_records";
    for (const char* name : kCsvMetricOrder) out += std::string(",") + name;
    out += ",overall\n";
    for (const auto& p : points) {
        out += csv_field(p.system) + "," + std::to_string(p.window_tokens) + "," +
               std::to_string(p.output_tokens) + "," + std::to_string(p.n_records);
        for (const char* name : kCsvMetricOrder) {
            auto it = p.metric_means.find(name);
            out += ",";
            if (it != p.metric_means.end()) out += fmt_double(it->second);
        }
        out += "," + fmt_double(p.overall) + "\n";
    }
    return out;
}

std::string scaling_csv(
    const std::vector<std::tuple<std::string, std::string, ScalingFit>>& rows) {
    std::string out = "system,metric,slope,intercept,r2,n\n";
    for (const auto& [system, metric, fit] : rows) {
        out += csv_field(system) + "," + metric + "," + fmt_double(fit.slope) + "," +
               fmt_double(fit.intercept) + "," + fmt_double(fit.r2) + "," +
               std::to_string(fit.n) + "\n";
    }
    return out;
}

std::string dilution_csv(const std::string& system, int lower_window, int upper_window,
                         const std::vector<DilutionDelta>& rows) {
    std::string out =
        "system,metric,lower_window,upper_window,lower_value,upper_value,delta_pct\n";
    for (const auto& d : rows) {
        out += csv_field(system) + "," + d.metric + "," +
               std::to_string(lower_window) + "," + std::to_string(upper_window) +
               "," + fmt_double(d.lower_value) + "," + fmt_double(d.upper_value) +
               "," + fmt_double(d.delta_pct) + "\n";
    }
    return out;
}

std::string correlation_csv(const CorrelationMatrix& m) {
    std::string out = "metric";
    for (const auto& name : m.metrics) out += "," + name;
    out += "\n";
    for (std::size_t i = 0; i < m.metrics.size(); ++i) {
        out += m.metrics[i];
        for (std::size_t j = 0; j < m.metrics.size(); ++j) {
            out += ",";
            if (m.defined[i][j]) out += fmt_double(m.r[i][j]);
        }
        out += "\n";
    }
    return out;
}

std::string attribution_csv(const DualModeReport& report) {
    std::string out = "metric,mean_native,mean_gold,delta\n";
    for (const char* name : kCsvMetricOrder) {
        auto a = report.mean_a.find(name);
        auto b = report.mean_b.find(name);
        if (a == report.mean_a.end() || b == report.mean_b.end()) continue;
        out += std::string(name) + "," + fmt_double(a->second) + "," +
               fmt_double(b->second) + "," + fmt_double(b->second - a->second) + "\n";
    }
    out += "overall," + fmt_double(report.overall_a) + "," +
           fmt_double(report.overall_b) + "," +
           fmt_double(report.overall_b - report.overall_a) + "\n";
    return out;
}

std::vector<FixtureRow> load_results_csv(const std::filesystem::path& file) {
    auto rows = parse_csv(read_file(file));
    if (rows.size() < 2)
        throw ConfigError("results CSV " + file.string() + " has no data rows");

    const auto& header = rows.front();
    auto col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("results CSV " + file.string() + " lacks column: " + name);
    };
    const std::size_t c_system = col("system");
    const std::size_t c_window = col("window_tokens");
    const std::size_t c_output = col("output_tokens");
    const std::size_t c_overall = col("reported_overall");
    std::array<std::size_t, 6> c_metric{};
    for (std::size_t i = 0; i < kCsvMetricOrder.size(); ++i)
        c_metric[i] = col(kCsvMetricOrder[i]);

    std::vector<FixtureRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < header.size())
            throw ConfigError("results CSV " + file.string() + " row " +
                              std::to_string(r + 1) + " is short");
        try {
            FixtureRow f;
            f.point.system = row[c_system];
            f.point.window_tokens = std::stoi(row[c_window]);
            f.point.output_tokens = std::stoi(row[c_output]);
            f.point.n_records = 0;
            double sum = 0.0;
            for (std::size_t i = 0; i < kCsvMetricOrder.size(); ++i) {
                double v = std::stod(row[c_metric[i]]);
                f.point.metric_means[kCsvMetricOrder[i]] = v;
                sum += v;
            }
            f.point.overall = sum / static_cast<double>(kCsvMetricOrder.size());
            f.reported_overall = std::stod(row[c_overall]);
            out.push_back(std::move(f));
        } catch (const std::exception& e) {
            throw ConfigError("results CSV " + file.string() + " row " +
                              std::to_string(r + 1) + " is malformed: " + e.what());
        }
    }
    return out;
}

}  // namespace ragbench

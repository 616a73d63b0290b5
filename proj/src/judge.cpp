#include "ragbench/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ragbench/errors.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

const char* metric_name(MetricKind m) {
    return kMetricNames[static_cast<std::size_t>(m)];
}

MetricKind metric_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kMetricNames.size(); ++i)
        if (name == kMetricNames[i]) return static_cast<MetricKind>(i);
    throw ConfigError("unknown metric: " + name);
}

// ---- rubrics ---------------------------------------------------------------

namespace {

const std::array<const char*, 6> kBandRanges = {"9-10", "7-8", "5-6",
                                                "3-4",  "1-2", "0"};

RubricVariant make_variant(const char* name, std::array<const char*, 6> descs) {
    RubricVariant v;
    v.name = name;
    for (std::size_t i = 0; i < 6; ++i)
        v.bands.push_back({kBandRanges[i], descs[i]});
    return v;
}

std::map<std::string, Rubric> builtin_rubrics() {
    std::map<std::string, Rubric> out;

    Rubric completeness;
    completeness.metric = "completeness";
    completeness.focus =
        "How completely the response answers everything the question asks for.";
    completeness.variants = {
        make_variant("objective",
                     {"Correct answer with complete explanation and clear reasoning",
                      "Correct answer with good explanation, minor gaps",
                      "Answer with basic explanation, some missing details",
                      "Partial answer or incomplete explanation",
                      "Minimal answer, lacks proper explanation",
                      "No clear answer or off-topic"}),
        make_variant("subjective",
                     {"Addresses all key aspects thoroughly",
                      "Covers all major aspects with good detail",
                      "Addresses most important aspects reasonably",
                      "Covers key aspects with varying depth",
                      "Addresses some but misses important points",
                      "Fails to address key aspects"}),
    };
    out[completeness.metric] = std::move(completeness);

    Rubric depth;
    depth.metric = "technical_depth";
    depth.focus =
        "How sophisticated and analytical the response's treatment of the subject is.";
    depth.variants = {
        make_variant("objective",
                     {"Sophisticated understanding with detailed methodology",
                      "Strong analytical thinking with clear solution steps",
                      "Reasonable technical detail with some analysis",
                      "Basic approach but relatively shallow analysis",
                      "Minimal analytical content, superficial approach",
                      "No meaningful analysis demonstrated"}),
        make_variant("subjective",
                     {"Sophisticated understanding with nuanced analysis",
                      "Strong analytical thinking with good conceptual depth",
                      "Reasonable analysis with adequate technical detail",
                      "Surface-level analysis with limited sophistication",
                      "Superficial treatment with minimal content",
                      "No meaningful analysis or understanding"}),
    };
    out[depth.metric] = std::move(depth);

    Rubric factuality;
    factuality.metric = "factuality";
    factuality.focus =
        "Whether the response's claims are accurate and free of contradictions.";
    factuality.variants = {
        make_variant("with_context",
                     {"All claims match context exactly, no contradictions",
                      "Minor imprecision in non-critical details",
                      "Generally accurate with minor factual gaps",
                      "Noticeable inaccuracies but core info correct",
                      "Several factual errors or contradictions",
                      "Major errors or predominantly false information"}),
        make_variant("without_context",
                     {"Claims match expected output, no contradictions",
                      "Most claims consistent, no significant errors",
                      "Some inconsistencies but generally reasonable",
                      "Notable contradictions or implausible info",
                      "Major contradictions or obviously incorrect",
                      "---"}),
    };
    out[factuality.metric] = std::move(factuality);

    Rubric relevance;
    relevance.metric = "relevance";
    relevance.focus =
        "How directly the response addresses the question that was asked.";
    relevance.variants = {
        make_variant("objective",
                     {"Directly addresses specific question format",
                      "Stays focused with minimal deviation",
                      "Generally addresses question, some unnecessary details",
                      "Partially addresses with irrelevant information",
                      "Somewhat related with significant drift",
                      "Fails to address specific requirements"}),
        make_variant("subjective",
                     {"Every sentence directly addresses the question",
                      "Strongly focused with minimal deviation",
                      "Mostly focused with minor tangential elements",
                      "Generally on-topic but includes unnecessary info",
                      "Partially addresses with significant drift",
                      "Minimal connection to actual question"}),
    };
    out[relevance.metric] = std::move(relevance);

    Rubric ctx;
    ctx.metric = "context_utilization";
    ctx.focus = "How well the response draws on the supplied or retrieved material.";
    ctx.variants = {
        make_variant("with_context",
                     {"Seamlessly weaves multiple sources together",
                      "Effectively uses most relevant context",
                      "Incorporates key context adequately",
                      "Uses some context, integration could improve",
                      "Minimal effective use of available context",
                      "Completely ignores or contradicts context"}),
        make_variant("manual_setup",
                     {"Sophisticated domain expertise with advanced terminology",
                      "Clear evidence of domain-specific knowledge",
                      "Some evidence of specialized knowledge",
                      "Minimal evidence of specialized knowledge",
                      "Generic response with limited domain content",
                      "No domain-specific content"}),
    };
    out[ctx.metric] = std::move(ctx);

    Rubric support;
    support.metric = "support_quality";
    support.focus =
        "How well the response's claims are backed by evidence and specifics.";
    support.variants = {
        make_variant("objective",
                     {"Exceptional evidence with specific calculations/formulas",
                      "Strong evidence with good specificity",
                      "Adequate details with reasonable explanation",
                      "Some details but could be more specific",
                      "Minimal evidence or poorly explained",
                      "Lacks evidence or contains misleading explanations"}),
        make_variant("subjective",
                     {"Exceptional evidence with specific, concrete details",
                      "Strong evidence with good specificity",
                      "Adequate details with reasonable examples",
                      "Some details but could be more specific",
                      "Minimal evidence or poorly chosen examples",
                      "Lacks evidence or contains misleading examples"}),
    };
    out[support.metric] = std::move(support);

    return out;
}

void validate_rubric(const Rubric& r) {
    if (r.variants.size() != 2)
        throw ConfigError("rubric '" + r.metric + "' must define exactly two variants");
    for (const auto& v : r.variants) {
        if (v.bands.size() != kBandRanges.size())
            throw ConfigError("rubric '" + r.metric + "' variant '" + v.name +
                              "' must define six bands");
        for (std::size_t i = 0; i < kBandRanges.size(); ++i)
            if (v.bands[i].range != kBandRanges[i])
                throw ConfigError("rubric '" + r.metric + "' variant '" + v.name +
                                  "' band " + std::to_string(i) + " must cover " +
                                  kBandRanges[i]);
    }
}

}  // namespace

RubricSet RubricSet::builtin() {
    RubricSet set;
    set.rubrics_ = builtin_rubrics();
    for (const auto& [name, r] : set.rubrics_) validate_rubric(r);
    return set;
}

RubricSet RubricSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("rubric directory not found: " + dir.string());
    RubricSet set;
    for (const char* name : kMetricNames) {
        std::filesystem::path file = dir / (std::string(name) + ".json");
        if (!std::filesystem::is_regular_file(file))
            throw ConfigError("rubric set is missing " + file.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("rubric file " + file.string() + " is not valid JSON: " +
                              e.what());
        }
        Rubric r;
        try {
            r.metric = j.at("metric").get<std::string>();
            r.focus = j.at("focus").get<std::string>();
            for (const auto& jv : j.at("variants")) {
                RubricVariant v;
                v.name = jv.at("name").get<std::string>();
                for (const auto& jb : jv.at("bands"))
                    v.bands.push_back({jb.at("range").get<std::string>(),
                                       jb.at("description").get<std::string>()});
                r.variants.push_back(std::move(v));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("rubric file " + file.string() + " is malformed: " +
                              e.what());
        }
        if (r.metric != name)
            throw ConfigError("rubric file " + file.string() + " declares metric '" +
                              r.metric + "'");
        validate_rubric(r);
        set.rubrics_[r.metric] = std::move(r);
    }
    return set;
}

const Rubric& RubricSet::rubric(MetricKind m) const {
    auto it = rubrics_.find(metric_name(m));
    if (it == rubrics_.end())
        throw LookupError("no rubric for metric: " + std::string(metric_name(m)));
    return it->second;
}

const RubricVariant& RubricSet::variant(MetricKind m, const std::string& name) const {
    for (const auto& v : rubric(m).variants)
        if (v.name == name) return v;
    throw LookupError("metric " + std::string(metric_name(m)) +
                      " has no variant: " + name);
}

// ---- scoring ---------------------------------------------------------------

std::string select_variant(MetricKind m, const JudgeInputs& in) {
    switch (m) {
        case MetricKind::factuality:
            return in.context_available ? "with_context" : "without_context";
        case MetricKind::context_utilization:
            return in.context_available ? "with_context" : "manual_setup";
        default:
            return in.objective ? "objective" : "subjective";
    }
}

std::string render_judge_prompt(const RubricSet& rubrics, MetricKind m,
                                const JudgeInputs& in) {
    const Rubric& r = rubrics.rubric(m);
    const RubricVariant& v = rubrics.variant(m, select_variant(m, in));

    std::string out =
        "You are an impartial grader for question-answering systems. Grade exactly "
        "one quality dimension of the response below and ignore every other "
        "dimension.\n\n";
    out += "METRIC: " + r.metric + "\n";
    out += "VARIANT: " + v.name + "\n";
    out += "FOCUS: " + r.focus + "\n\n";
    out += "SCORING BANDS:\n";
    for (const auto& b : v.bands) out += b.range + ": " + b.description + "\n";
    out +=
        "\nRead the question, the reference answer, and the candidate response";
    if (in.context_available) out += ", then the context it was drawn from";
    out += ". Pick the band that fits best and score within it.\n";
    out += "\nQUESTION:\n" + in.question + "\n";
    out += "\nGROUND TRUTH:\n" + in.ground_truth + "\n";
    out += "\nRESPONSE:\n" + in.answer + "\n";
    if (in.context_available) out += "\nCONTEXT:\n" + in.context + "\n";
    out += "\nEnd your reply with one line of exactly this form: SCORE: <integer "
           "from 0 to 10>";
    return out;
}

std::optional<int> parse_judge_score(const std::string& text) {
    std::string low = lower_ascii(text);
    std::optional<int> found;
    std::size_t pos = 0;
    while ((pos = low.find("score", pos)) != std::string::npos) {
        std::size_t i = pos + 5;
        while (i < low.size() && (low[i] == ' ' || low[i] == ':' || low[i] == '\t' ||
                                  low[i] == '*'))
            ++i;
        std::size_t d = i;
        while (d < low.size() && std::isdigit(static_cast<unsigned char>(low[d])) &&
               d - i < 3)
            ++d;
        if (d > i) {
            int v = std::stoi(low.substr(i, d - i));
            if (v >= 0 && v <= 10) found = v;
        }
        pos += 5;
    }
    if (found) return found;

    // Fallback: last standalone 0..10 integer token.
    std::optional<int> last;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t b = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == b) break;
        std::string tok = text.substr(b, i - b);
        while (!tok.empty() && !std::isdigit(static_cast<unsigned char>(tok.front())) &&
               tok.front() != '-')
            tok.erase(tok.begin());
        while (!tok.empty() && !std::isdigit(static_cast<unsigned char>(tok.back())))
            tok.pop_back();
        if (tok.empty() || tok.size() > 2) continue;
        bool digits = std::all_of(tok.begin(), tok.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
        });
        if (!digits) continue;
        int v = std::stoi(tok);
        if (v >= 0 && v <= 10) last = v;
    }
    return last;
}

MetricScore judge_response(ChatClient& judge, const RubricSet& rubrics,
                           MetricKind m, const JudgeInputs& in,
                           const JudgeOptions& opts) {
    MetricScore s;
    s.variant = select_variant(m, in);

    CompletionRequest req;
    req.messages.push_back({"user", render_judge_prompt(rubrics, m, in)});
    req.temperature = 0.0;
    req.top_p = 1.0;
    req.max_tokens = 512;
    req.want_logprobs = true;

    for (int ask = 0; ask <= opts.max_reasks; ++ask) {
        s.reasks = ask;
        CompletionResponse resp;
        try {
            resp = judge.complete(req);
        } catch (const AuthError&) {
            throw;
        } catch (const LlmError& e) {
            s.failed = true;
            s.note = e.what();
            return s;
        }

        if (judge.supports_logprobs() && !resp.score_candidates.empty()) {
            double total = 0.0, mean = 0.0;
            for (const auto& c : resp.score_candidates) {
                total += c.probability;
                mean += c.value * c.probability;
            }
            if (total > 0.0) {
                s.raw = mean / total;
                s.value = s.raw / 10.0;
                s.weighted = true;
                return s;
            }
        }
        if (auto parsed = parse_judge_score(resp.text)) {
            s.raw = *parsed;
            s.value = s.raw / 10.0;
            return s;
        }
        // Unparseable verdict: nudge once with the transcript so far.
        req.messages.push_back({"assistant", resp.text});
        req.messages.push_back(
            {"user", "Reply with only one line of the form SCORE: <integer from 0 "
                     "to 10>."});
    }
    s.failed = true;
    s.note = "judge verdict could not be parsed after a corrective follow-up";
    return s;
}

std::map<std::string, MetricScore> judge_all(ChatClient& judge,
                                             const RubricSet& rubrics,
                                             const JudgeInputs& in,
                                             const JudgeOptions& opts) {
    std::map<std::string, MetricScore> out;
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
        MetricKind m = static_cast<MetricKind>(i);
        out[kMetricNames[i]] = judge_response(judge, rubrics, m, in, opts);
    }
    return out;
}

// ---- serialization ------------------------------------------------------------

nlohmann::json MetricScore::to_json() const {
    return {{"value", value},     {"raw", raw},         {"weighted", weighted},
            {"failed", failed},   {"reasks", reasks},   {"variant", variant},
            {"note", note}};
}

MetricScore MetricScore::from_json(const nlohmann::json& j) {
    MetricScore s;
    try {
        s.value = j.at("value").get<double>();
        s.raw = j.at("raw").get<double>();
        s.weighted = j.at("weighted").get<bool>();
        s.failed = j.at("failed").get<bool>();
        s.reasks = j.at("reasks").get<int>();
        s.variant = j.at("variant").get<std::string>();
        s.note = j.value("note", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad metric score record: ") + e.what());
    }
    return s;
}

nlohmann::json EvaluationRecord::to_json() const {
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& [name, score] : metrics) jm[name] = score.to_json();
    return {{"qa_id", qa_id},
            {"mode", mode},
            {"answer", answer},
            {"context_detected", context_detected},
            {"metrics", jm},
            {"failed_metrics", failed_metrics},
            {"mean", mean}};
}

EvaluationRecord EvaluationRecord::from_json(const nlohmann::json& j) {
    EvaluationRecord r;
    try {
        r.qa_id = j.at("qa_id").get<std::string>();
        r.mode = j.at("mode").get<std::string>();
        r.answer = j.at("answer").get<std::string>();
        r.context_detected = j.value("context_detected", false);
        for (const auto& [name, js] : j.at("metrics").items())
            r.metrics[name] = MetricScore::from_json(js);
        r.failed_metrics = j.at("failed_metrics").get<std::vector<std::string>>();
        r.mean = j.at("mean").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad evaluation record: ") + e.what());
    }
    return r;
}

EvaluationRecord make_record(std::string qa_id, std::string mode, std::string answer,
                             std::map<std::string, MetricScore> metrics) {
    EvaluationRecord r;
    r.qa_id = std::move(qa_id);
    r.mode = std::move(mode);
    r.answer = std::move(answer);
    r.metrics = std::move(metrics);
    double sum = 0.0;
    int n = 0;
    for (const auto& [name, score] : r.metrics) {
        if (score.failed) {
            r.failed_metrics.push_back(name);
        } else {
            sum += score.value;
            ++n;
        }
    }
    r.mean = n == 0 ? 0.0 : sum / n;
    return r;
}

// ---- dual-mode diagnosis -------------------------------------------------------

nlohmann::json DualModeReport::to_json() const {
    return {{"paired", paired},       {"mean_a", mean_a},
            {"mean_b", mean_b},       {"delta", delta},
            {"overall_a", overall_a}, {"overall_b", overall_b},
            {"mean_delta", mean_delta}, {"verdict", verdict}};
}

DualModeReport dual_mode_delta(const std::vector<EvaluationRecord>& mode_a,
                               const std::vector<EvaluationRecord>& mode_b,
                               const DualModeThresholds& t) {
    std::map<std::string, const EvaluationRecord*> by_id;
    for (const auto& r : mode_a) by_id[r.qa_id] = &r;

    DualModeReport rep;
    std::map<std::string, std::pair<double, int>> acc_a, acc_b;
    for (const auto& rb : mode_b) {
        auto it = by_id.find(rb.qa_id);
        if (it == by_id.end()) continue;
        ++rep.paired;
        for (const auto& [name, score] : it->second->metrics)
            if (!score.failed) {
                acc_a[name].first += score.value;
                acc_a[name].second += 1;
            }
        for (const auto& [name, score] : rb.metrics)
            if (!score.failed) {
                acc_b[name].first += score.value;
                acc_b[name].second += 1;
            }
    }
    if (rep.paired == 0)
        throw ConfigError("dual-mode comparison needs overlapping question ids");

    for (const auto& [name, sc] : acc_a)
        if (sc.second > 0) rep.mean_a[name] = sc.first / sc.second;
    for (const auto& [name, sc] : acc_b)
        if (sc.second > 0) rep.mean_b[name] = sc.first / sc.second;

    double sum_a = 0.0, sum_b = 0.0, sum_d = 0.0;
    int n_a = 0, n_b = 0, n_d = 0;
    for (const auto& [name, v] : rep.mean_a) {
        sum_a += v;
        ++n_a;
        auto it = rep.mean_b.find(name);
        if (it != rep.mean_b.end()) {
            rep.delta[name] = it->second - v;
            sum_d += rep.delta[name];
            ++n_d;
        }
    }
    for (const auto& [name, v] : rep.mean_b) {
        sum_b += v;
        ++n_b;
    }
    rep.overall_a = n_a == 0 ? 0.0 : sum_a / n_a;
    rep.overall_b = n_b == 0 ? 0.0 : sum_b / n_b;
    rep.mean_delta = n_d == 0 ? 0.0 : sum_d / n_d;

    if (rep.mean_delta > t.retrieval_gap)
        rep.verdict = "retrieval_failure";
    else if (rep.overall_a < t.weak_generation && rep.overall_b < t.weak_generation)
        rep.verdict = "generation_weakness";
    else
        rep.verdict = "healthy";
    return rep;
}

// ---- context-use heuristic ------------------------------------------------------

namespace {

bool word_boundary(const std::string& s, std::size_t b, std::size_t e) {
    auto alnum = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    if (b > 0 && alnum(s[b - 1])) return false;
    if (e < s.size() && alnum(s[e])) return false;
    return true;
}

}  // namespace

ContextDetection detect_context_use(const KnowledgeBase& kb, const std::string& answer,
                                    const ContextHeuristic& h) {
    ContextDetection d;
    std::string low = lower_ascii(answer);
    for (const auto& phrase : h.indicator_phrases) {
        std::string needle = lower_ascii(phrase);
        std::size_t pos = 0;
        while ((pos = low.find(needle, pos)) != std::string::npos) {
            if (word_boundary(low, pos, pos + needle.size())) ++d.indicator_hits;
            pos += needle.size();
        }
    }
    d.density = technical_density(kb, answer);
    d.detected = d.indicator_hits >= 1 && d.density > h.min_density;
    return d;
}

}  // namespace ragbench

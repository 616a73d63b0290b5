#include "ragbench/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

const char* qa_id_prefix(TestType t) {
    switch (t) {
        case TestType::robustness: return "ROB_";
        case TestType::multihop: return "MULTI_";
        case TestType::generation: return "GEN_";
    }
    return "ROB_";
}

nlohmann::json QAPair::to_json() const {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& [attempt, outcome] : attempt_log)
        log.push_back({attempt, outcome});
    return {{"qa_id", qa_id},
            {"test_type", test_type},
            {"format", format},
            {"question", question},
            {"ground_truth", ground_truth},
            {"context_ref", context_ref},
            {"precision", precision},
            {"density", density},
            {"dominant_category",
             dominant_category ? nlohmann::json(*dominant_category) : nlohmann::json()},
            {"control",
             {{"temperature", control.temperature},
              {"nucleus_p", control.nucleus_p},
              {"sim_threshold", control.sim_threshold}}},
            {"attempt_log", log},
            {"template_id", template_id}};
}

QAPair QAPair::from_json(const nlohmann::json& j) {
    QAPair p;
    try {
        p.qa_id = j.at("qa_id").get<std::string>();
        p.test_type = j.at("test_type").get<std::string>();
        p.format = j.at("format").get<std::string>();
        p.question = j.at("question").get<std::string>();
        p.ground_truth = j.at("ground_truth").get<std::string>();
        p.context_ref = j.at("context_ref").get<std::string>();
        p.precision = j.at("precision").get<std::string>();
        p.density = j.at("density").get<double>();
        if (j.contains("dominant_category") && !j.at("dominant_category").is_null())
            p.dominant_category = j.at("dominant_category").get<std::string>();
        const auto& c = j.at("control");
        p.control.temperature = c.at("temperature").get<double>();
        p.control.nucleus_p = c.at("nucleus_p").get<double>();
        p.control.sim_threshold = c.at("sim_threshold").get<double>();
        for (const auto& e : j.at("attempt_log"))
            p.attempt_log.emplace_back(e.at(0).get<int>(), e.at(1).get<std::string>());
        p.template_id = j.value("template_id", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad benchmark record: ") + e.what());
    }
    return p;
}

nlohmann::json AuditEntry::to_json() const {
    return {{"context", context},
            {"precision", precision},
            {"density", density},
            {"dominant_category",
             dominant_category ? nlohmann::json(*dominant_category) : nlohmann::json()},
            {"successes", successes},
            {"failed_attempts", failed_attempts},
            {"sim_failures", sim_failures},
            {"retry", retry},
            {"temperature", temperature},
            {"nucleus_p", nucleus_p},
            {"sim_threshold", sim_threshold},
            {"attempt", attempt},
            {"outcome", outcome}};
}

AuditEntry AuditEntry::from_json(const nlohmann::json& j) {
    AuditEntry a;
    try {
        a.context = j.at("context").get<std::string>();
        a.precision = j.at("precision").get<std::string>();
        a.density = j.at("density").get<double>();
        if (j.contains("dominant_category") && !j.at("dominant_category").is_null())
            a.dominant_category = j.at("dominant_category").get<std::string>();
        a.successes = j.at("successes").get<int>();
        a.failed_attempts = j.at("failed_attempts").get<int>();
        a.sim_failures = j.at("sim_failures").get<int>();
        a.retry = j.at("retry").get<int>();
        a.temperature = j.at("temperature").get<double>();
        a.nucleus_p = j.at("nucleus_p").get<double>();
        a.sim_threshold = j.at("sim_threshold").get<double>();
        a.attempt = j.at("attempt").get<int>();
        a.outcome = j.at("outcome").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad audit record: ") + e.what());
    }
    return a;
}

QaValidation validate_qa(const std::string& raw,
                         const std::set<std::string>& context_tokens) {
    QaValidation v;

    nlohmann::json j;
    bool parsed = false;
    try {
        j = nlohmann::json::parse(raw);
        parsed = j.is_object();
    } catch (const nlohmann::json::exception&) {
        parsed = false;
    }
    if (!parsed) {
        // Models often wrap the object in prose or code fences; take the
        // outermost braces and retry once.
        auto b = raw.find('{');
        auto e = raw.rfind('}');
        if (b != std::string::npos && e != std::string::npos && e > b) {
            try {
                j = nlohmann::json::parse(raw.substr(b, e - b + 1));
                parsed = j.is_object();
            } catch (const nlohmann::json::exception&) {
                parsed = false;
            }
        }
    }
    if (!parsed) {
        v.error_kind = "parse_failure";
        v.error_detail = "completion is not a JSON object";
        return v;
    }

    std::string question, ground_truth;
    if (j.contains("question") && j.at("question").is_string())
        question = j.at("question").get<std::string>();
    if (j.contains("ground_truth") && j.at("ground_truth").is_string())
        ground_truth = j.at("ground_truth").get<std::string>();
    if (question.empty() || ground_truth.empty()) {
        v.error_kind = "empty_field";
        v.error_detail = question.empty() ? "missing question" : "missing ground_truth";
        return v;
    }

    // Raw-string check: normalization strips the ____ marker.
    bool ends_q = false;
    for (auto it = question.rbegin(); it != question.rend(); ++it) {
        if (std::isspace(static_cast<unsigned char>(*it))) continue;
        ends_q = *it == '?';
        break;
    }
    if (!ends_q && question.find("____") == std::string::npos) {
        v.error_kind = "format_error";
        v.error_detail = "question neither ends with '?' nor contains a blank";
        return v;
    }

    auto gt_tokens = tokenize(ground_truth);
    int key_total = 0, key_present = 0;
    for (const auto& t : gt_tokens) {
        if (has_digit(t)) {
            if (!context_tokens.count(t)) {
                v.error_kind = "grounding_failure";
                v.error_detail = "value '" + t + "' does not appear in the context";
                return v;
            }
            continue;
        }
        if (stopwords().count(t)) continue;
        ++key_total;
        if (context_tokens.count(t)) ++key_present;
    }
    if (key_total > 0 &&
        static_cast<double>(key_present) / key_total < 0.5) {
        v.error_kind = "grounding_failure";
        v.error_detail = "fewer than half of the answer's content words appear in the context";
        return v;
    }

    v.ok = true;
    v.question = std::move(question);
    v.ground_truth = std::move(ground_truth);
    return v;
}

namespace {

struct BundleMeta {
    std::string precision;
    PrecisionLevel level = PrecisionLevel::low;
    double density = 0.0;
    std::optional<std::string> dominant;
    std::set<std::string> context_tokens;
};

BundleMeta analyze_bundle(const KnowledgeBase& kb, const ContextBundle& b) {
    BundleMeta m;
    std::string text = b.assembled_text();
    auto tokens = tokenize(text);
    m.context_tokens.insert(tokens.begin(), tokens.end());
    TermScan scan = kb.scan(tokens);
    m.density = kb.density(scan);
    double omega = kb.omega_high(scan);
    m.level = classify_precision(m.density, omega);
    m.precision = precision_name(m.level);
    m.dominant = kb.dominant_category(scan);
    return m;
}

}  // namespace

GenerationResult generate_benchmark(const TfIdfIndex& index, const KnowledgeBase& kb,
                                    TestType type, int n, ChatClient& client,
                                    const PromptLibrary& lib,
                                    const GenerationConfig& cfg) {
    if (n <= 0) throw ConfigError("question count must be positive");
    if (cfg.max_attempts_per_context <= 0)
        throw ConfigError("max attempts per context must be positive");

    GenerationResult result;
    SynthBatch batch =
        synthesize_all(index, strategy_for(type), cfg.token_budget, cfg.synth);
    result.bundles = batch.bundles;
    result.skipped = batch.skipped;
    if (batch.bundles.empty())
        throw StrategyInapplicableError(
            "no context could be synthesized for test type " +
            std::string(test_type_name(type)));

    // Visit order is a seeded shuffle so different seeds sample different
    // contexts first while a fixed seed stays fully reproducible.
    std::vector<std::size_t> order(batch.bundles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed);
    rng.shuffle(order);

    std::vector<std::optional<BundleMeta>> meta(batch.bundles.size());
    auto meta_for = [&](std::size_t i) -> const BundleMeta& {
        if (!meta[i]) meta[i] = analyze_bundle(kb, batch.bundles[i]);
        return *meta[i];
    };

    GenerationState state;
    UniquenessChecker checker(&kb, cfg.term_bonus, cfg.semantic_min_pool,
                              cfg.semantic_margin);
    int max_tokens = output_limit_for_window(cfg.token_budget, cfg.output_ladder);

    std::size_t cursor = 0;
    std::size_t abandoned_streak = 0;

    while (static_cast<int>(result.pairs.size()) < n) {
        if (abandoned_streak >= batch.bundles.size()) {
            result.exhausted = true;
            result.warning = "generation stalled: every context failed " +
                             std::to_string(cfg.max_attempts_per_context) +
                             " attempts in a row; produced " +
                             std::to_string(result.pairs.size()) + " of " +
                             std::to_string(n) + " questions";
            break;
        }
        const std::size_t bi = order[cursor % order.size()];
        ++cursor;
        const ContextBundle& bundle = batch.bundles[bi];
        const BundleMeta& bm = meta_for(bi);
        const std::string context_text = bundle.assembled_text();

        std::vector<std::pair<int, std::string>> attempts;
        bool accepted = false;

        for (int attempt = 1; attempt <= cfg.max_attempts_per_context; ++attempt) {
            state.retries_current = attempt - 1;
            PromptPlan plan = plan_prompt(type, state);
            ControlParams params =
                control_params(bm.level, state, bm.dominant, cfg.adjustments);

            AuditEntry audit;
            audit.context = bundle.bundle_id;
            audit.precision = bm.precision;
            audit.density = bm.density;
            audit.dominant_category = bm.dominant;
            audit.successes = state.successes;
            audit.failed_attempts = state.failed_attempts;
            audit.sim_failures = state.consecutive_sim_failures;
            audit.retry = state.retries_current;
            audit.temperature = params.temperature;
            audit.nucleus_p = params.nucleus_p;
            audit.sim_threshold = params.sim_threshold;
            audit.attempt = attempt;

            CompletionRequest req;
            req.messages.push_back({"user", render_prompt(lib, plan, context_text)});
            req.temperature = params.temperature;
            req.top_p = params.nucleus_p;
            req.max_tokens = max_tokens;

            std::string outcome;
            QaValidation qa;
            try {
                CompletionResponse resp = client.complete(req);
                qa = validate_qa(resp.text, bm.context_tokens);
                outcome = qa.ok ? "accepted" : qa.error_kind;
            } catch (const AuthError&) {
                throw;  // nothing downstream can succeed without credentials
            } catch (const LlmError& e) {
                outcome = std::string("provider_error: ") + e.what();
            }

            if (outcome == "accepted") {
                QuestionFingerprint fp = fingerprint(kb, qa.question);
                UniquenessVerdict verdict = checker.check(fp, params.sim_threshold);
                if (!verdict.unique) {
                    outcome = "duplicate_" + verdict.rejected_by;
                    ++state.failed_attempts;
                    ++state.consecutive_sim_failures;
                } else {
                    checker.accept(std::move(fp));
                    state.consecutive_sim_failures = 0;
                    ++state.successes;
                    if (plan.objective) {
                        ++state.objective_count;
                        ++state.objective_subtype_counts[static_cast<std::size_t>(
                            plan.subtype)];
                    } else {
                        ++state.subjective_count;
                    }

                    QAPair pair;
                    char idx[16];
                    std::snprintf(idx, sizeof(idx), "%04d", state.successes);
                    pair.qa_id = std::string(qa_id_prefix(type)) + idx;
                    pair.test_type = test_type_name(type);
                    pair.format = format_label(plan);
                    pair.question = qa.question;
                    pair.ground_truth = qa.ground_truth;
                    pair.context_ref = bundle.bundle_id;
                    pair.precision = bm.precision;
                    pair.density = bm.density;
                    pair.dominant_category = bm.dominant;
                    pair.control = params;
                    attempts.emplace_back(attempt, "accepted");
                    pair.attempt_log = attempts;
                    pair.template_id = plan.template_id;
                    result.pairs.push_back(std::move(pair));
                    accepted = true;
                }
            } else {
                ++state.failed_attempts;
            }

            audit.outcome = outcome;
            result.audit.push_back(std::move(audit));
            if (accepted) break;
            attempts.emplace_back(attempt, outcome);
        }

        state.retries_current = 0;
        abandoned_streak = accepted ? 0 : abandoned_streak + 1;
    }

    result.final_state = state;
    return result;
}

}  // namespace ragbench

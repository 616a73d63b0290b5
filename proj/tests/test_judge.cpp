#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/judge.hpp"
#include "ragbench/kb.hpp"
#include "ragbench/llm.hpp"

using namespace ragbench;
using nlohmann::json;

namespace {

JudgeInputs sample_inputs() {
    JudgeInputs in;
    in.question = "Why does the wafer lot drift overnight?";
    in.ground_truth = "The wafer lot 420 drifts overnight.";
    in.answer = "Because the etch chamber idles, lot 420 drifts.";
    in.context = "The wafer lot 420 drifts overnight while the etch chamber idles.";
    return in;
}

KnowledgeBase fab_kb() {
    return KnowledgeBase::from_json(json{
        {"name", "fab"},
        {"categories",
         {{{"name", "Fab"}, {"weight", 1.0}, {"terms", {"wafer", "etch"}}}}},
    });
}

// Judge scripted to emit a fixed verdict for every metric it is asked about.
MockChatClient scripted_judge(json scores, bool logprobs) {
    json script{{"supports_logprobs", logprobs},
                {"rules", json::array({json{{"kind", "judge_score"},
                                            {"scores", std::move(scores)}}})}};
    return MockChatClient("judge", script);
}

MetricScore score_of(double value, bool failed = false) {
    MetricScore s;
    s.value = value;
    s.raw = value * 10.0;
    s.variant = "objective";
    s.failed = failed;
    return s;
}

EvaluationRecord rec(std::string id, std::string mode,
                     std::map<std::string, MetricScore> metrics) {
    return make_record(std::move(id), std::move(mode), "answer text",
                       std::move(metrics));
}

}  // namespace

TEST_CASE("metric names round-trip and reject strangers") {
    REQUIRE(kMetricNames.size() == 6);
    CHECK(std::string(metric_name(MetricKind::completeness)) == "completeness");
    CHECK(std::string(metric_name(MetricKind::support_quality)) ==
          "support_quality");
    for (const char* name : kMetricNames)
        CHECK(std::string(metric_name(metric_from_name(name))) == name);
    CHECK_THROWS_AS(metric_from_name("novelty"), ConfigError);
    CHECK_THROWS_AS(metric_from_name(""), ConfigError);
}

TEST_CASE("builtin rubrics equal the shipped rubric directory") {
    RubricSet a = RubricSet::builtin();
    RubricSet b = RubricSet::load(RAGBENCH_DATA_DIR "/rubrics");
    CHECK(a == b);

    const Rubric& fact = a.rubric(MetricKind::factuality);
    CHECK(fact.metric == "factuality");
    CHECK_FALSE(fact.focus.empty());
    CHECK_FALSE(fact.variants.empty());
    for (const auto& v : fact.variants) {
        CHECK_FALSE(v.bands.empty());
        for (const auto& band : v.bands) CHECK_FALSE(band.range.empty());
    }

    // Every metric carries the variants select_variant can ask for.
    CHECK(a.variant(MetricKind::factuality, "with_context").name ==
          "with_context");
    CHECK(a.variant(MetricKind::factuality, "without_context").name ==
          "without_context");
    CHECK(a.variant(MetricKind::context_utilization, "manual_setup").name ==
          "manual_setup");
    CHECK(a.variant(MetricKind::completeness, "objective").name == "objective");
    CHECK(a.variant(MetricKind::completeness, "subjective").name == "subjective");
    CHECK_THROWS_AS(a.variant(MetricKind::completeness, "with_context"),
                    LookupError);
    CHECK_THROWS_AS(RubricSet::load(RAGBENCH_DATA_DIR "/templates"), ConfigError);
    CHECK_THROWS_AS(RubricSet::load("/nonexistent/rubric/dir"), ConfigError);
}

TEST_CASE("variant selection depends on metric, format, and context") {
    JudgeInputs in = sample_inputs();
    struct Case {
        MetricKind m;
        bool objective;
        bool ctx;
        const char* want;
    };
    const Case cases[] = {
        // Factuality cares only about whether the context can be shown.
        {MetricKind::factuality, true, true, "with_context"},
        {MetricKind::factuality, false, true, "with_context"},
        {MetricKind::factuality, true, false, "without_context"},
        {MetricKind::factuality, false, false, "without_context"},
        // Context utilization swaps in a manual-setup rubric when blind.
        {MetricKind::context_utilization, true, true, "with_context"},
        {MetricKind::context_utilization, false, true, "with_context"},
        {MetricKind::context_utilization, true, false, "manual_setup"},
        {MetricKind::context_utilization, false, false, "manual_setup"},
        // Everything else splits on the question format family.
        {MetricKind::completeness, true, true, "objective"},
        {MetricKind::completeness, false, false, "subjective"},
        {MetricKind::technical_depth, true, false, "objective"},
        {MetricKind::technical_depth, false, true, "subjective"},
        {MetricKind::relevance, true, true, "objective"},
        {MetricKind::relevance, false, false, "subjective"},
        {MetricKind::support_quality, true, false, "objective"},
        {MetricKind::support_quality, false, true, "subjective"},
    };
    for (const auto& c : cases) {
        in.objective = c.objective;
        in.context_available = c.ctx;
        CHECK(select_variant(c.m, in) == c.want);
    }
}

TEST_CASE("judge prompt assembles the rubric and transcript in order") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    in.objective = false;
    in.context_available = true;

    std::string p = render_judge_prompt(rubrics, MetricKind::factuality, in);
    CHECK(p.rfind("You are an impartial grader for question-answering systems.",
                  0) == 0);
    CHECK(p.find("METRIC: factuality\n") != std::string::npos);
    CHECK(p.find("VARIANT: with_context\n") != std::string::npos);
    const Rubric& r = rubrics.rubric(MetricKind::factuality);
    CHECK(p.find("FOCUS: " + r.focus) != std::string::npos);
    CHECK(p.find("SCORING BANDS:\n") != std::string::npos);
    for (const auto& band : rubrics.variant(MetricKind::factuality, "with_context").bands)
        CHECK(p.find(band.range + ": " + band.description) != std::string::npos);
    CHECK(p.find(", then the context it was drawn from") != std::string::npos);
    CHECK(p.find("QUESTION:\n" + in.question) != std::string::npos);
    CHECK(p.find("GROUND TRUTH:\n" + in.ground_truth) != std::string::npos);
    CHECK(p.find("RESPONSE:\n" + in.answer) != std::string::npos);
    CHECK(p.find("CONTEXT:\n" + in.context) != std::string::npos);
    const std::string tail =
        "End your reply with one line of exactly this form: SCORE: <integer "
        "from 0 to 10>";
    REQUIRE(p.size() >= tail.size());
    CHECK(p.compare(p.size() - tail.size(), tail.size(), tail) == 0);

    // Sections appear in reading order.
    CHECK(p.find("METRIC:") < p.find("VARIANT:"));
    CHECK(p.find("VARIANT:") < p.find("FOCUS:"));
    CHECK(p.find("FOCUS:") < p.find("SCORING BANDS:"));
    CHECK(p.find("QUESTION:") < p.find("GROUND TRUTH:"));
    CHECK(p.find("GROUND TRUTH:") < p.find("RESPONSE:"));
    CHECK(p.find("RESPONSE:") < p.find("CONTEXT:"));

    // Without context: different variant, no context section, no mention of it.
    in.context_available = false;
    std::string blind = render_judge_prompt(rubrics, MetricKind::factuality, in);
    CHECK(blind.find("VARIANT: without_context\n") != std::string::npos);
    CHECK(blind.find("CONTEXT:") == std::string::npos);
    CHECK(blind.find("then the context it was drawn from") == std::string::npos);
    CHECK(blind.find("Read the question, the reference answer, and the candidate "
                     "response. Pick the band") != std::string::npos);

    // Subjective non-context metric picks the subjective rubric variant.
    std::string subj = render_judge_prompt(rubrics, MetricKind::completeness, in);
    CHECK(subj.find("VARIANT: subjective\n") != std::string::npos);
}

TEST_CASE("score parsing takes the last labelled verdict") {
    CHECK(parse_judge_score("SCORE: 7") == 7);
    CHECK(parse_judge_score("reasoning first\nSCORE: 0\n") == 0);
    CHECK(parse_judge_score("SCORE: 10") == 10);
    CHECK(parse_judge_score("SCORE: 3\non reflection\nSCORE: 9") == 9);
    CHECK(parse_judge_score("final score: 8.") == 8);
    CHECK(parse_judge_score("**Score:** 8") == 8);
    CHECK(parse_judge_score("SCORE:\t6") == 6);
    CHECK(parse_judge_score("score 6 but really score 4") == 4);
    // An out-of-range later mention does not clobber a valid verdict.
    CHECK(parse_judge_score("SCORE: 7\nmy internal score 99 aside") == 7);
}

TEST_CASE("score parsing falls back to a trailing bare number") {
    CHECK(parse_judge_score("I'd give it a solid 7.") == 7);
    CHECK(parse_judge_score("Rating (9)") == 9);
    CHECK(parse_judge_score("worth 8 out of 10") == 10);  // last wins
    CHECK(parse_judge_score("maybe a 4, maybe a 5") == 5);
}

TEST_CASE("score parsing rejects out-of-range and absent verdicts") {
    CHECK(parse_judge_score("SCORE: 11") == std::nullopt);
    CHECK(parse_judge_score("SCORE: 123") == std::nullopt);
    CHECK(parse_judge_score("rated 42 overall") == std::nullopt);
    CHECK(parse_judge_score("no verdict here") == std::nullopt);
    CHECK(parse_judge_score("SCORE:") == std::nullopt);
    CHECK(parse_judge_score("") == std::nullopt);
}

TEST_CASE("judging prefers the probability-weighted verdict") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    auto judge = scripted_judge(json{{"factuality", 6.26}}, /*logprobs=*/true);

    MetricScore s = judge_response(judge, rubrics, MetricKind::factuality, in);
    CHECK(s.weighted);
    CHECK_FALSE(s.failed);
    CHECK(s.reasks == 0);
    CHECK(s.raw == doctest::Approx(6.26).epsilon(1e-9));
    CHECK(s.value == doctest::Approx(0.626).epsilon(1e-9));
    CHECK(s.variant == "without_context");
    CHECK(s.note.empty());

    // The judge is driven deterministically and asked for token probabilities.
    auto calls = judge.calls();
    REQUIRE(calls.size() == 1);
    const CompletionRequest& req = calls[0];
    CHECK(req.temperature == 0.0);
    CHECK(req.top_p == 1.0);
    CHECK(req.max_tokens == 512);
    CHECK(req.want_logprobs);
    REQUIRE(req.messages.size() == 1);
    CHECK(req.messages[0].role == "user");
    CHECK(req.messages[0].content.find("METRIC: factuality") != std::string::npos);
}

TEST_CASE("judging falls back to text parsing without logprob support") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    in.context_available = true;
    auto judge = scripted_judge(json{{"factuality", 6.26}}, /*logprobs=*/false);

    MetricScore s = judge_response(judge, rubrics, MetricKind::factuality, in);
    CHECK_FALSE(s.weighted);
    CHECK_FALSE(s.failed);
    // The scripted reply reads "SCORE: 6"; without probabilities the fraction
    // is lost.
    CHECK(s.raw == doctest::Approx(6.0));
    CHECK(s.value == doctest::Approx(0.6));
    CHECK(s.variant == "with_context");
}

TEST_CASE("an unparseable verdict earns one corrective follow-up") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    MockChatClient judge(
        "judge", json::array({json{{"kind", "sequence"},
                                   {"texts", {"the grade is splendid",
                                              "SCORE: 7"}}}}));

    MetricScore s = judge_response(judge, rubrics, MetricKind::relevance, in);
    CHECK_FALSE(s.failed);
    CHECK(s.reasks == 1);
    CHECK(s.raw == doctest::Approx(7.0));
    CHECK(s.value == doctest::Approx(0.7));

    auto calls = judge.calls();
    REQUIRE(calls.size() == 2);
    const CompletionRequest& second = calls[1];
    REQUIRE(second.messages.size() == 3);
    CHECK(second.messages[0].role == "user");
    CHECK(second.messages[1].role == "assistant");
    CHECK(second.messages[1].content == "the grade is splendid");
    CHECK(second.messages[2].role == "user");
    CHECK(second.messages[2].content ==
          "Reply with only one line of the form SCORE: <integer from 0 to 10>.");
}

TEST_CASE("two unparseable verdicts mark the metric failed") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    MockChatClient judge(
        "judge", json::array({json{{"kind", "sequence"},
                                   {"texts", {"no verdict here",
                                              "still nothing useful"}}}}));

    MetricScore s = judge_response(judge, rubrics, MetricKind::relevance, in);
    CHECK(s.failed);
    CHECK(s.reasks == 1);
    CHECK(s.value == 0.0);
    CHECK(s.note ==
          "judge verdict could not be parsed after a corrective follow-up");
    CHECK(judge.calls().size() == 2);
}

TEST_CASE("provider failures mark the metric failed but auth aborts") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();

    MockChatClient flaky("judge", json::array({json{{"kind", "fail"},
                                                    {"error", "server"},
                                                    {"status", 503}}}));
    MetricScore s = judge_response(flaky, rubrics, MetricKind::completeness, in);
    CHECK(s.failed);
    CHECK(s.note == "mock server error");
    CHECK(s.value == 0.0);

    MockChatClient locked("judge",
                          json::array({json{{"kind", "fail"}, {"error", "auth"}}}));
    CHECK_THROWS_AS(judge_response(locked, rubrics, MetricKind::completeness, in),
                    AuthError);
}

TEST_CASE("judging all metrics produces one score per dimension") {
    RubricSet rubrics = RubricSet::builtin();
    JudgeInputs in = sample_inputs();
    auto judge = scripted_judge(json{{"completeness", 5.92},
                                     {"technical_depth", 5.54},
                                     {"factuality", 6.26},
                                     {"relevance", 6.27},
                                     {"context_utilization", 7.83},
                                     {"support_quality", 5.34}},
                                /*logprobs=*/true);

    auto scores = judge_all(judge, rubrics, in);
    REQUIRE(scores.size() == 6);
    for (const char* name : kMetricNames) REQUIRE(scores.count(name) == 1);
    CHECK(scores["completeness"].raw == doctest::Approx(5.92).epsilon(1e-9));
    CHECK(scores["support_quality"].raw == doctest::Approx(5.34).epsilon(1e-9));
    CHECK(scores["factuality"].variant == "without_context");
    CHECK(scores["context_utilization"].variant == "manual_setup");
    CHECK(scores["completeness"].variant == "objective");
    CHECK(judge.calls().size() == 6);

    EvaluationRecord record =
        make_record("ROB_0001", "with_kb", in.answer, scores);
    CHECK(record.qa_id == "ROB_0001");
    CHECK(record.mode == "with_kb");
    CHECK(record.failed_metrics.empty());
    // (5.92 + 5.54 + 6.26 + 6.27 + 7.83 + 5.34) / 60
    CHECK(record.mean == doctest::Approx(0.6193333333333333).epsilon(1e-9));
}

TEST_CASE("record means skip failed metrics") {
    std::map<std::string, MetricScore> metrics;
    metrics["factuality"] = score_of(0.8);
    metrics["relevance"] = score_of(0.6);
    metrics["completeness"] = score_of(0.0, /*failed=*/true);

    EvaluationRecord r = make_record("Q1", "with_kb", "a", metrics);
    REQUIRE(r.failed_metrics.size() == 1);
    CHECK(r.failed_metrics[0] == "completeness");
    CHECK(r.mean == doctest::Approx(0.7));

    std::map<std::string, MetricScore> all_failed;
    all_failed["factuality"] = score_of(0.0, true);
    EvaluationRecord dead = make_record("Q2", "with_kb", "a", all_failed);
    CHECK(dead.mean == 0.0);
    REQUIRE(dead.failed_metrics.size() == 1);
}

TEST_CASE("metric scores and evaluation records survive JSON round trips") {
    MetricScore s;
    s.value = 0.626;
    s.raw = 6.26;
    s.weighted = true;
    s.reasks = 1;
    s.variant = "with_context";
    s.note = "ok";
    MetricScore back = MetricScore::from_json(s.to_json());
    CHECK(back.value == s.value);
    CHECK(back.raw == s.raw);
    CHECK(back.weighted == s.weighted);
    CHECK_FALSE(back.failed);
    CHECK(back.reasks == 1);
    CHECK(back.variant == "with_context");
    CHECK(back.note == "ok");

    std::map<std::string, MetricScore> metrics;
    metrics["factuality"] = score_of(0.9);
    metrics["relevance"] = score_of(0.1, true);
    EvaluationRecord r = make_record("GEN_0007", "without_kb", "an answer", metrics);
    r.context_detected = true;
    EvaluationRecord rb = EvaluationRecord::from_json(r.to_json());
    CHECK(rb.qa_id == "GEN_0007");
    CHECK(rb.mode == "without_kb");
    CHECK(rb.answer == "an answer");
    CHECK(rb.context_detected);
    CHECK(rb.mean == doctest::Approx(r.mean));
    REQUIRE(rb.metrics.size() == 2);
    CHECK(rb.metrics["factuality"].value == doctest::Approx(0.9));
    CHECK(rb.metrics["relevance"].failed);
    REQUIRE(rb.failed_metrics.size() == 1);
    CHECK(rb.failed_metrics[0] == "relevance");

    CHECK_THROWS_AS(MetricScore::from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(EvaluationRecord::from_json(json{{"qa_id", "X"}}),
                    ConfigError);
    CHECK_THROWS_AS(EvaluationRecord::from_json(json::array()), ConfigError);
}

TEST_CASE("dual-mode comparison spots retrieval failures") {
    std::vector<EvaluationRecord> a = {
        rec("q1", "with_kb", {{"factuality", score_of(0.4)},
                              {"completeness", score_of(0.5)}}),
        rec("q2", "with_kb", {{"factuality", score_of(0.2)},
                              {"completeness", score_of(0.3)}}),
    };
    std::vector<EvaluationRecord> b = {
        rec("q1", "gold", {{"factuality", score_of(0.8)},
                           {"completeness", score_of(0.7)}}),
        rec("q2", "gold", {{"factuality", score_of(0.6)},
                           {"completeness", score_of(0.5)}}),
    };

    DualModeReport rep = dual_mode_delta(a, b);
    CHECK(rep.paired == 2);
    CHECK(rep.mean_a["factuality"] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(rep.mean_a["completeness"] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rep.mean_b["factuality"] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rep.mean_b["completeness"] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rep.delta["factuality"] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(rep.delta["completeness"] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(rep.overall_a == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(rep.overall_b == doctest::Approx(0.65).epsilon(1e-12));
    CHECK(rep.mean_delta == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(rep.verdict == "retrieval_failure");

    json j = rep.to_json();
    CHECK(j["verdict"] == "retrieval_failure");
    CHECK(j["paired"] == 2);
}

TEST_CASE("dual-mode comparison separates weak generation from health") {
    // Both modes flat and low: the generator is the bottleneck.
    std::vector<EvaluationRecord> low_a = {
        rec("q1", "with_kb", {{"factuality", score_of(0.30)},
                              {"completeness", score_of(0.20)}})};
    std::vector<EvaluationRecord> low_b = {
        rec("q1", "gold", {{"factuality", score_of(0.35)},
                           {"completeness", score_of(0.25)}})};
    CHECK(dual_mode_delta(low_a, low_b).verdict == "generation_weakness");

    // Both modes strong with a small gap: healthy.
    std::vector<EvaluationRecord> hi_a = {
        rec("q1", "with_kb", {{"factuality", score_of(0.70)},
                              {"completeness", score_of(0.60)}})};
    std::vector<EvaluationRecord> hi_b = {
        rec("q1", "gold", {{"factuality", score_of(0.72)},
                           {"completeness", score_of(0.62)}})};
    CHECK(dual_mode_delta(hi_a, hi_b).verdict == "healthy");

    // Custom thresholds shift the boundaries.
    DualModeThresholds strict;
    strict.retrieval_gap = 0.01;
    CHECK(dual_mode_delta(hi_a, hi_b, strict).verdict == "retrieval_failure");
}

TEST_CASE("dual-mode comparison skips failed metrics and strangers") {
    std::vector<EvaluationRecord> a = {
        rec("q1", "with_kb", {{"factuality", score_of(0.2)}}),
        rec("q2", "with_kb", {{"factuality", score_of(0.0, /*failed=*/true)}}),
    };
    std::vector<EvaluationRecord> b = {
        rec("q1", "gold", {{"factuality", score_of(0.9)},
                           {"completeness", score_of(0.5)}}),
        rec("q2", "gold", {{"factuality", score_of(0.1)}}),
        rec("q9", "gold", {{"factuality", score_of(1.0)}}),
    };

    DualModeReport rep = dual_mode_delta(a, b);
    CHECK(rep.paired == 2);  // q9 has no partner
    // The failed q2 score drops out of mode A's mean.
    CHECK(rep.mean_a["factuality"] == doctest::Approx(0.2));
    CHECK(rep.mean_b["factuality"] == doctest::Approx(0.5));
    // completeness exists only in mode B, so it gets no delta.
    CHECK(rep.mean_b.count("completeness") == 1);
    CHECK(rep.delta.count("completeness") == 0);
    CHECK(rep.delta.count("factuality") == 1);

    std::vector<EvaluationRecord> other = {
        rec("zz", "gold", {{"factuality", score_of(0.5)}})};
    CHECK_THROWS_AS(dual_mode_delta(a, other), ConfigError);
    CHECK_THROWS_AS(dual_mode_delta({}, {}), ConfigError);
}

TEST_CASE("context detection needs a citation phrase plus dense vocabulary") {
    KnowledgeBase kb = fab_kb();

    // Citation phrase present and the answer leans on domain terms.
    ContextDetection hit = detect_context_use(
        kb, "According to the recipe, the etch chamber holds wafer 420.");
    CHECK(hit.detected);
    CHECK(hit.indicator_hits == 1);
    CHECK(hit.density > 0.02);

    // Dense vocabulary without any citation phrase is not context use.
    ContextDetection blunt =
        detect_context_use(kb, "The etch chamber holds wafer 420 at setpoint.");
    CHECK_FALSE(blunt.detected);
    CHECK(blunt.indicator_hits == 0);
    CHECK(blunt.density > 0.02);

    // Citation phrase with vocabulary from nowhere near the domain.
    ContextDetection fluffy =
        detect_context_use(kb, "According to them, everything is fine.");
    CHECK_FALSE(fluffy.detected);
    CHECK(fluffy.indicator_hits == 1);
    CHECK(fluffy.density == doctest::Approx(0.0));

    // Phrase matching is case-insensitive and counts every occurrence.
    ContextDetection loud = detect_context_use(
        kb,
        "ACCORDING TO the log, the standard specifies an etch stop; "
        "according to the fab, the wafer passed.");
    CHECK(loud.indicator_hits == 3);
    CHECK(loud.detected);
}

TEST_CASE("context detection honors word boundaries for acronyms") {
    KnowledgeBase kb = fab_kb();

    // "SEMINAR" must not register as the standards body "SEMI".
    ContextDetection no = detect_context_use(
        kb, "The seminar on wafer etch processes was well attended.");
    CHECK(no.indicator_hits == 0);
    CHECK_FALSE(no.detected);

    ContextDetection yes = detect_context_use(
        kb, "Per SEMI guidance the wafer etch rate stays fixed.");
    CHECK(yes.indicator_hits == 1);
    CHECK(yes.detected);

    // Punctuation on either side still counts as a boundary.
    ContextDetection bracketed =
        detect_context_use(kb, "The spec (SEMI) covers etch and wafer handling.");
    CHECK(bracketed.indicator_hits == 1);
    CHECK(bracketed.detected);

    // Custom heuristic: raise the density bar until detection flips off.
    ContextHeuristic picky;
    picky.min_density = 0.9;
    ContextDetection barred = detect_context_use(
        kb, "Per SEMI guidance the wafer etch rate stays fixed.", picky);
    CHECK(barred.indicator_hits == 1);
    CHECK_FALSE(barred.detected);
}

// Command-line front end: ingest a corpus, generate a benchmark, evaluate a
// retrieval system against it, and report context-scaling diagnostics.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ragbench/adapters.hpp"
#include "ragbench/corpus.hpp"
#include "ragbench/errors.hpp"
#include "ragbench/judge.hpp"
#include "ragbench/pipeline.hpp"
#include "ragbench/report.hpp"
#include "ragbench/text.hpp"
#include "ragbench/util.hpp"

namespace {

using namespace ragbench;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

// 0 ok, 1 internal, 2 usage, 3 config, 4 provider/transport, 5 partial results
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitTransport = 4;
constexpr int kExitPartial = 5;

int g_exit = 0;

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json load_json_file(const fs::path& p) {
    try {
        return nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(p.string() + " is not valid JSON: " + e.what());
    }
}

struct ToolConfig {
    nlohmann::json raw = nlohmann::json::object();
    ProviderRegistry providers;
    AdapterRegistry adapters;
    fs::path base_dir;  // for relative script paths

    static ToolConfig load(const std::string& path) {
        ToolConfig c;
        if (path.empty()) return c;
        c.raw = load_json_file(path);
        c.base_dir = fs::path(path).parent_path();
        if (c.raw.contains("providers"))
            c.providers = ProviderRegistry::from_json(c.raw);
        if (c.raw.contains("adapters"))
            c.adapters = AdapterRegistry::from_json(c.raw);
        return c;
    }

    SynthConfig synth() const {
        SynthConfig s;
        if (raw.contains("synth")) {
            s.cluster_separation =
                raw.at("synth").value("cluster_separation", s.cluster_separation);
            s.theta_link = raw.at("synth").value("theta_link", s.theta_link);
        }
        return s;
    }

    ContextHeuristic heuristic() const {
        ContextHeuristic h;
        if (raw.contains("heuristic")) {
            const auto& j = raw.at("heuristic");
            if (j.contains("indicator_phrases"))
                h.indicator_phrases =
                    j.at("indicator_phrases").get<std::vector<std::string>>();
            h.min_density = j.value("min_density", h.min_density);
        }
        return h;
    }

    DualModeThresholds thresholds() const {
        DualModeThresholds t;
        if (raw.contains("thresholds")) {
            t.retrieval_gap = raw.at("thresholds").value("retrieval_gap", t.retrieval_gap);
            t.weak_generation =
                raw.at("thresholds").value("weak_generation", t.weak_generation);
        }
        return t;
    }

    std::vector<OutputLimitRule> output_ladder() const {
        std::vector<OutputLimitRule> out;
        if (raw.contains("output_ladder"))
            for (const auto& r : raw.at("output_ladder"))
                out.push_back({r.at("max_window").get<int>(),
                               r.at("output_limit").get<int>()});
        return out;
    }

    std::vector<std::pair<int, int>> window_ladder() const {
        std::vector<std::pair<int, int>> out;
        if (raw.contains("window_ladder"))
            for (const auto& r : raw.at("window_ladder"))
                out.emplace_back(r.at("window_tokens").get<int>(),
                                 r.at("output_tokens").get<int>());
        return out;
    }
};

std::vector<Document> load_corpus_any(const std::string& path) {
    fs::path p(path);
    if (fs::is_directory(p)) return load_corpus_dir(p);
    if (p.extension() == ".json") return load_corpus_json(p);
    throw ConfigError("--corpus must be a directory of .txt files or a .json file: " +
                      path);
}

void write_jsonl(const fs::path& file, const std::vector<nlohmann::json>& rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump() + "\n";
    write_file(file, out);
}

std::vector<nlohmann::json> read_jsonl(const fs::path& file) {
    std::istringstream in(read_file(file));
    std::vector<nlohmann::json> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            rows.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) +
                              " is not valid JSON: " + e.what());
        }
    }
    return rows;
}

// ---- ingest ------------------------------------------------------------------

struct IngestArgs {
    std::string corpus, kb, out;
    int window = 512, overlap = 128;
};

void run_ingest(const IngestArgs& a) {
    KnowledgeBase kb = KnowledgeBase::load(a.kb);
    auto docs = load_corpus_any(a.corpus);
    ChunkingConfig cc{a.window, a.overlap};
    TfIdfIndex index = TfIdfIndex::build(chunk_corpus(docs, cc), cc);

    fs::path out(a.out);
    write_file(out / "kb.json", read_file(a.kb));
    index.save(out / "index.json");

    nlohmann::json per_doc = nlohmann::json::array();
    std::map<std::string, int> histogram{{"low", 0}, {"medium", 0}, {"high", 0}};
    for (const auto& d : docs) {
        auto tokens = tokenize(d.body);
        TermScan scan = kb.scan(tokens);
        double rho = kb.density(scan);
        double omega = kb.omega_high(scan);
        PrecisionLevel p = classify_precision(rho, omega);
        auto dom = kb.dominant_category(scan);
        ++histogram[precision_name(p)];
        per_doc.push_back({{"doc_id", d.doc_id},
                           {"words", tokens.size()},
                           {"density", rho},
                           {"omega_high", omega},
                           {"precision", precision_name(p)},
                           {"dominant_category",
                            dom ? nlohmann::json(*dom) : nlohmann::json()},
                           {"source_kind", source_kind_name(d.source_kind)}});
    }
    nlohmann::json stats = {{"documents", per_doc},
                            {"precision_histogram", histogram},
                            {"chunks", index.size()},
                            {"window", a.window},
                            {"overlap", a.overlap},
                            {"kb_terms", kb.term_count()},
                            {"corpus_hash", to_hex(index.content_hash())},
                            {"kb_hash", to_hex(kb.content_hash())}};
    write_file(out / "stats.json", stats.dump(2) + "\n");
    write_file(out / "manifest.json",
               nlohmann::json{{"kind", "ingest"},
                              {"created_at", iso_now()},
                              {"tool_version", kVersion},
                              {"corpus", a.corpus},
                              {"kb", a.kb}}
                       .dump(2) +
                   "\n");
    std::cout << "ingested " << docs.size() << " documents into " << index.size()
              << " chunks (" << stats["precision_histogram"].dump() << ")\n";
}

// ---- generate ----------------------------------------------------------------

struct GenerateArgs {
    std::string corpus, kb, test_type, provider, config, out;
    int n = 10;
    int window = 512, overlap = 128;
    int budget = 4096;
    std::uint64_t seed = 0;
};

void run_generate(const GenerateArgs& a) {
    ToolConfig cfg = ToolConfig::load(a.config);
    KnowledgeBase kb = KnowledgeBase::load(a.kb);
    auto docs = load_corpus_any(a.corpus);
    ChunkingConfig cc{a.window, a.overlap};
    TfIdfIndex index = TfIdfIndex::build(chunk_corpus(docs, cc), cc);
    TestType type = test_type_from_name(a.test_type);

    auto client = make_client(cfg.providers.require(a.provider), cfg.base_dir);
    PromptLibrary lib = PromptLibrary::builtin();

    GenerationConfig gc;
    gc.token_budget = a.budget;
    gc.seed = a.seed;
    gc.synth = cfg.synth();
    gc.output_ladder = cfg.output_ladder();
    if (cfg.raw.contains("generation")) {
        const auto& j = cfg.raw.at("generation");
        gc.max_attempts_per_context =
            j.value("max_attempts_per_context", gc.max_attempts_per_context);
        gc.term_bonus = j.value("term_bonus", gc.term_bonus);
        gc.semantic_min_pool = j.value("semantic_min_pool", gc.semantic_min_pool);
        gc.semantic_margin = j.value("semantic_margin", gc.semantic_margin);
    }

    GenerationResult res = generate_benchmark(index, kb, type, a.n, *client, lib, gc);

    fs::path out(a.out);
    std::vector<nlohmann::json> rows;
    for (const auto& p : res.pairs) rows.push_back(p.to_json());
    write_jsonl(out / "benchmark.jsonl", rows);
    rows.clear();
    for (const auto& b : res.bundles) rows.push_back(b.to_json());
    write_jsonl(out / "benchmark.bundles.jsonl", rows);
    rows.clear();
    for (const auto& e : res.audit) rows.push_back(e.to_json());
    write_jsonl(out / "benchmark.audit.jsonl", rows);

    std::string run_id = to_hex(fnv1a64(
        to_hex(index.content_hash()) + "|" + to_hex(kb.content_hash()) + "|" +
        std::to_string(a.seed) + "|" + test_type_name(type) + "|" +
        std::to_string(a.n) + "|" + a.provider + "|" + std::to_string(a.budget)));
    nlohmann::json skips = nlohmann::json::array();
    for (const auto& s : res.skipped)
        skips.push_back({{"subject", s.subject}, {"reason", s.reason}});
    nlohmann::json manifest = {{"kind", "generate"},
                               {"run_id", run_id},
                               {"created_at", iso_now()},
                               {"tool_version", kVersion},
                               {"corpus_hash", to_hex(index.content_hash())},
                               {"kb_hash", to_hex(kb.content_hash())},
                               {"test_type", test_type_name(type)},
                               {"requested", a.n},
                               {"generated", res.pairs.size()},
                               {"provider", a.provider},
                               {"seed", a.seed},
                               {"token_budget", a.budget},
                               {"window", a.window},
                               {"overlap", a.overlap},
                               {"contexts", res.bundles.size()},
                               {"contexts_skipped", skips},
                               {"attempts", res.audit.size()},
                               {"exhausted", res.exhausted},
                               {"warning", res.warning}};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "generated " << res.pairs.size() << "/" << a.n << " questions ("
              << res.audit.size() << " attempts, " << res.bundles.size()
              << " contexts)\n";
    if (res.exhausted) {
        std::cerr << "warning: " << res.warning << "\n";
        g_exit = kExitPartial;
    }
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string benchmark, bundles, kb, config, out, mode = "both";
    std::string adapter, judge_provider, gold_provider, system;
    int concurrency = 4;
    int window = 0;  // gold-context ceiling; 0 = bundle budget
    int output = 0;  // answer token limit; 0 = ladder default
};

std::vector<EvaluationRecord> judge_records(
    const std::vector<QAPair>& pairs, const std::vector<std::string>& answers,
    const std::vector<std::string>& contexts, const std::vector<bool>& ctx_available,
    const std::vector<bool>& ctx_detected, const std::vector<std::string>& errors,
    const std::string& mode, ChatClient& judge, const RubricSet& rubrics,
    int concurrency) {
    std::vector<EvaluationRecord> records(pairs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr abort_error;
    std::mutex abort_mu;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= pairs.size() || abort.load()) return;
            const QAPair& p = pairs[i];
            try {
                if (!errors[i].empty()) {
                    // The system under test failed; score nothing.
                    EvaluationRecord r;
                    r.qa_id = p.qa_id;
                    r.mode = mode;
                    for (const char* m : kMetricNames) {
                        MetricScore s;
                        s.failed = true;
                        s.note = errors[i];
                        r.metrics[m] = s;
                        r.failed_metrics.push_back(m);
                    }
                    records[i] = std::move(r);
                    continue;
                }
                JudgeInputs in;
                in.question = p.question;
                in.ground_truth = p.ground_truth;
                in.answer = answers[i];
                in.context = contexts[i];
                in.objective = p.format.rfind("objective", 0) == 0;
                in.context_available = ctx_available[i];
                auto metrics = judge_all(judge, rubrics, in);
                EvaluationRecord r =
                    make_record(p.qa_id, mode, answers[i], std::move(metrics));
                r.context_detected = ctx_detected[i];
                records[i] = std::move(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(abort_mu);
                if (!abort_error) abort_error = std::current_exception();
                abort.store(true);
                return;
            }
        }
    };

    int n_threads = std::max(1, std::min<int>(concurrency,
                                              static_cast<int>(pairs.size())));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (abort_error) std::rethrow_exception(abort_error);
    return records;
}

void run_evaluate(const EvaluateArgs& a) {
    ToolConfig cfg = ToolConfig::load(a.config);
    if (a.mode != "with_kb" && a.mode != "without_kb" && a.mode != "both")
        throw ConfigError("--mode must be with_kb, without_kb, or both");
    const bool want_a = a.mode != "without_kb";
    const bool want_b = a.mode != "with_kb";

    std::vector<QAPair> pairs;
    for (const auto& j : read_jsonl(a.benchmark)) pairs.push_back(QAPair::from_json(j));
    if (pairs.empty()) throw ConfigError("benchmark file has no questions");

    std::map<std::string, ContextBundle> bundles;
    for (const auto& j : read_jsonl(a.bundles)) {
        ContextBundle b = ContextBundle::from_json(j);
        bundles[b.bundle_id] = std::move(b);
    }

    std::optional<KnowledgeBase> kb;
    if (!a.kb.empty()) kb = KnowledgeBase::load(a.kb);

    auto judge = make_client(cfg.providers.require(a.judge_provider), cfg.base_dir);
    RubricSet rubrics = RubricSet::builtin();
    ContextHeuristic heuristic = cfg.heuristic();

    fs::path out(a.out);
    std::vector<EvaluationRecord> records_a, records_b;
    int failures = 0;
    std::string system_label = a.system;

    if (want_a) {
        if (a.adapter.empty())
            throw ConfigError("--adapter is required for with_kb evaluation");
        auto adapter = make_adapter(cfg.adapters.require(a.adapter), cfg.providers,
                                    cfg.base_dir);
        if (system_label.empty()) system_label = adapter->name();
        AdapterCapabilities caps = adapter->capabilities();
        if (!caps.exposes_sources && !caps.exposes_context && !kb)
            throw ConfigError(
                "adapter exposes neither sources nor context; pass --kb so context "
                "use can be inferred from answers");

        std::vector<std::string> answers(pairs.size()), contexts(pairs.size()),
            errors(pairs.size());
        std::vector<bool> ctx_avail(pairs.size(), false), detected(pairs.size(), false);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            AdapterResult r = query_rag(*adapter, {pairs[i].qa_id, pairs[i].question},
                                        kb ? &*kb : nullptr, heuristic);
            if (!r.ok) {
                errors[i] = r.error;
                ++failures;
                continue;
            }
            answers[i] = r.response.answer;
            contexts[i] = r.response.context;
            ctx_avail[i] = r.context_available;
            detected[i] = r.heuristic_used && r.heuristic.detected;
        }
        records_a = judge_records(pairs, answers, contexts, ctx_avail, detected,
                                  errors, "with_kb", *judge, rubrics, a.concurrency);
        std::vector<nlohmann::json> rows;
        for (const auto& r : records_a) rows.push_back(r.to_json());
        write_jsonl(out / "results_with_kb.jsonl", rows);
    }

    if (want_b) {
        if (a.gold_provider.empty())
            throw ConfigError("--gold-provider is required for without_kb evaluation");
        auto gold = make_client(cfg.providers.require(a.gold_provider), cfg.base_dir);
        if (system_label.empty()) system_label = gold->name();

        std::vector<std::string> answers(pairs.size()), contexts(pairs.size()),
            errors(pairs.size());
        std::vector<bool> ctx_avail(pairs.size(), true), detected(pairs.size(), false);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            auto it = bundles.find(pairs[i].context_ref);
            if (it == bundles.end())
                throw LookupError("benchmark references unknown context: " +
                                  pairs[i].context_ref);
            int ceiling = a.window > 0 ? a.window : it->second.token_budget;
            GoldContext gc = inject_gold_context(it->second, ceiling);
            contexts[i] = gc.text;
            CompletionRequest req;
            req.messages.push_back(
                {"user", render_gold_prompt(pairs[i].question, gc.text)});
            req.temperature = 0.2;
            req.max_tokens = a.output > 0
                                 ? a.output
                                 : output_limit_for_window(ceiling, cfg.output_ladder());
            try {
                answers[i] = gold->complete(req).text;
            } catch (const AuthError&) {
                throw;
            } catch (const LlmError& e) {
                errors[i] = e.what();
                ++failures;
            }
        }
        records_b = judge_records(pairs, answers, contexts, ctx_avail, detected,
                                  errors, "without_kb", *judge, rubrics, a.concurrency);
        std::vector<nlohmann::json> rows;
        for (const auto& r : records_b) rows.push_back(r.to_json());
        write_jsonl(out / "results_without_kb.jsonl", rows);
    }

    nlohmann::json manifest = {{"kind", "evaluate"},
                               {"created_at", iso_now()},
                               {"tool_version", kVersion},
                               {"system", system_label},
                               {"benchmark", a.benchmark},
                               {"mode", a.mode},
                               {"questions", pairs.size()},
                               {"failures", failures},
                               {"window_tokens", a.window},
                               {"output_tokens", a.output},
                               {"judge_provider", a.judge_provider}};

    if (want_a && want_b) {
        DualModeReport rep = dual_mode_delta(records_a, records_b, cfg.thresholds());
        write_file(out / "dual_mode.json", rep.to_json().dump(2) + "\n");
        write_file(out / "attribution.csv", attribution_csv(rep));
        manifest["verdict"] = rep.verdict;
        std::cout << "dual-mode verdict: " << rep.verdict
                  << " (mean delta " << fmt_double(rep.mean_delta) << ")\n";
    }
    write_file(out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "evaluated " << pairs.size() << " questions";
    if (failures > 0) {
        std::cout << " (" << failures << " system-under-test failures)";
        g_exit = kExitPartial;
    }
    std::cout << "\n";
}

// ---- report ------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> runs;
    std::string fixture, out, mode = "with_kb";
};

void run_report(const ReportArgs& a) {
    if (a.runs.empty() && a.fixture.empty())
        throw ConfigError("report needs at least one --run directory or a --fixture CSV");

    std::vector<ConfigPoint> points;
    std::vector<std::string> notices;
    std::optional<DualModeReport> dual;
    std::string dual_system;

    for (const auto& run : a.runs) {
        fs::path dir(run);
        nlohmann::json manifest = load_json_file(dir / "manifest.json");
        std::string system = manifest.value("system", dir.filename().string());
        int window = manifest.value("window_tokens", 0);
        int output = manifest.value("output_tokens", 0);

        auto load_records = [&](const char* file) {
            std::vector<EvaluationRecord> recs;
            for (const auto& j : read_jsonl(dir / file))
                recs.push_back(EvaluationRecord::from_json(j));
            return recs;
        };

        fs::path mode_file =
            a.mode == "without_kb" ? dir / "results_without_kb.jsonl"
                                   : dir / "results_with_kb.jsonl";
        fs::path fallback = a.mode == "without_kb" ? dir / "results_with_kb.jsonl"
                                                   : dir / "results_without_kb.jsonl";
        fs::path chosen = fs::exists(mode_file) ? mode_file : fallback;
        if (!fs::exists(chosen))
            throw ConfigError("run directory " + run + " has no results files");
        std::vector<EvaluationRecord> recs;
        for (const auto& j : read_jsonl(chosen))
            recs.push_back(EvaluationRecord::from_json(j));
        points.push_back(aggregate_point(system, window, output, recs));

        if (!dual && fs::exists(dir / "results_with_kb.jsonl") &&
            fs::exists(dir / "results_without_kb.jsonl")) {
            dual = dual_mode_delta(load_records("results_with_kb.jsonl"),
                                   load_records("results_without_kb.jsonl"));
            dual_system = system;
        }
    }

    if (!a.fixture.empty())
        for (const auto& row : load_results_csv(a.fixture)) points.push_back(row.point);

    fs::path out(a.out);
    write_file(out / "points.csv", points_csv(points));

    // Group points per system for fits and dilution.
    std::map<std::string, std::vector<ConfigPoint>> by_system;
    for (const auto& p : points) by_system[p.system].push_back(p);

    std::vector<std::tuple<std::string, std::string, ScalingFit>> fits;
    std::string dilution_all;
    for (auto& [system, pts] : by_system) {
        std::sort(pts.begin(), pts.end(), [](const ConfigPoint& x, const ConfigPoint& y) {
            return x.window_tokens < y.window_tokens;
        });
        std::set<int> windows;
        for (const auto& p : pts) windows.insert(p.window_tokens);
        if (windows.size() >= 3) {
            fits.emplace_back(system, "overall", scaling_fit_metric(pts, "overall"));
            for (const char* m : kCsvMetricOrder)
                fits.emplace_back(system, m, scaling_fit_metric(pts, m));
        } else {
            notices.push_back("system '" + system + "' has " +
                              std::to_string(windows.size()) +
                              " window size(s); scaling fit needs 3");
        }
        if (windows.size() >= 2) {
            const ConfigPoint& hi = pts.back();
            const ConfigPoint* lo = nullptr;
            for (auto it = pts.rbegin(); it != pts.rend(); ++it)
                if (it->window_tokens < hi.window_tokens) {
                    lo = &*it;
                    break;
                }
            auto rows = dilution_delta(*lo, hi);
            std::string csv =
                dilution_csv(system, lo->window_tokens, hi.window_tokens, rows);
            if (dilution_all.empty()) dilution_all = csv;
            else {
                auto nl = csv.find('\n');
                dilution_all += csv.substr(nl + 1);
            }
        }
    }
    if (!fits.empty()) write_file(out / "scaling.csv", scaling_csv(fits));
    if (!dilution_all.empty()) write_file(out / "dilution.csv", dilution_all);
    if (points.size() >= 2)
        write_file(out / "correlation.csv", correlation_csv(metric_correlation(points)));
    else
        notices.push_back("metric correlation needs at least two points");
    if (dual) {
        write_file(out / "attribution.csv", attribution_csv(*dual));
        notices.push_back("dual-mode verdict for '" + dual_system + "': " + dual->verdict);
    }

    nlohmann::json summary = {{"kind", "report"},
                              {"created_at", iso_now()},
                              {"tool_version", kVersion},
                              {"points", points.size()},
                              {"systems", by_system.size()},
                              {"notices", notices}};
    if (dual) summary["dual_mode"] = dual->to_json();
    write_file(out / "summary.json", summary.dump(2) + "\n");

    std::cout << "report: " << points.size() << " points across " << by_system.size()
              << " system(s)\n";
    for (const auto& n : notices) std::cout << "  note: " << n << "\n";
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
    std::string corpus, kb, test_type, provider, adapter, judge_provider,
        gold_provider, config, out, mode = "both";
    int n = 10;
    int window = 512, overlap = 128;
    int concurrency = 4;
    std::uint64_t seed = 0;
};

void run_sweep(const SweepArgs& a) {
    ToolConfig cfg = ToolConfig::load(a.config);
    auto ladder = cfg.window_ladder();
    if (ladder.empty())
        throw ConfigError("sweep needs a window_ladder entry in the config file");

    std::vector<std::string> run_dirs;
    for (const auto& [window_tokens, output_tokens] : ladder) {
        fs::path dir = fs::path(a.out) / ("w" + std::to_string(window_tokens));
        GenerateArgs g;
        g.corpus = a.corpus;
        g.kb = a.kb;
        g.test_type = a.test_type;
        g.provider = a.provider;
        g.config = a.config;
        g.out = dir.string();
        g.n = a.n;
        g.window = a.window;
        g.overlap = a.overlap;
        g.budget = window_tokens;
        g.seed = a.seed;
        run_generate(g);

        EvaluateArgs e;
        e.benchmark = (dir / "benchmark.jsonl").string();
        e.bundles = (dir / "benchmark.bundles.jsonl").string();
        e.kb = a.kb;
        e.config = a.config;
        e.out = dir.string();
        e.mode = a.mode;
        e.adapter = a.adapter;
        e.judge_provider = a.judge_provider;
        e.gold_provider = a.gold_provider;
        e.concurrency = a.concurrency;
        e.window = window_tokens;
        e.output = output_tokens;
        run_evaluate(e);
        run_dirs.push_back(dir.string());
    }

    ReportArgs r;
    r.runs = run_dirs;
    r.out = a.out;
    r.mode = a.mode == "without_kb" ? "without_kb" : "with_kb";
    run_report(r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive benchmark generation and evaluation for retrieval-augmented systems"};
    app.set_version_flag("--version", std::string("ragbench ") + kVersion);
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "Chunk and index a corpus");
    cmd_ingest->add_option("--corpus", ingest.corpus, "Corpus directory or JSON file")
        ->required();
    cmd_ingest->add_option("--kb", ingest.kb, "Domain vocabulary JSON")->required();
    cmd_ingest->add_option("--out", ingest.out, "Output directory")->required();
    cmd_ingest->add_option("--window", ingest.window, "Chunk window in tokens");
    cmd_ingest->add_option("--overlap", ingest.overlap, "Chunk overlap in tokens");
    cmd_ingest->callback([&] { run_ingest(ingest); });

    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "Generate a question benchmark");
    cmd_gen->add_option("--corpus", gen.corpus, "Corpus directory or JSON file")
        ->required();
    cmd_gen->add_option("--kb", gen.kb, "Domain vocabulary JSON")->required();
    cmd_gen
        ->add_option("--test-type", gen.test_type,
                     "rob(ustness) | multi(hop) | gen(eration)")
        ->required()
        ->check(CLI::IsMember({"rob", "multi", "gen", "robustness", "multihop",
                               "generation"}));
    cmd_gen->add_option("--n", gen.n, "Questions to generate")->required();
    cmd_gen->add_option("--provider", gen.provider, "Generator provider name")
        ->required();
    cmd_gen->add_option("--config", gen.config, "Config JSON with providers")
        ->required();
    cmd_gen->add_option("--out", gen.out, "Output directory")->required();
    cmd_gen->add_option("--seed", gen.seed, "Context-order shuffle seed");
    cmd_gen->add_option("--window", gen.window, "Chunk window in tokens");
    cmd_gen->add_option("--overlap", gen.overlap, "Chunk overlap in tokens");
    cmd_gen->add_option("--budget", gen.budget, "Context token budget");
    cmd_gen->callback([&] { run_generate(gen); });

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "Evaluate a system on a benchmark");
    cmd_ev->add_option("--benchmark", ev.benchmark, "benchmark.jsonl")->required();
    cmd_ev->add_option("--bundles", ev.bundles, "benchmark.bundles.jsonl")->required();
    cmd_ev->add_option("--kb", ev.kb, "Domain vocabulary JSON (for opaque systems)");
    cmd_ev->add_option("--config", ev.config, "Config JSON with providers/adapters")
        ->required();
    cmd_ev->add_option("--out", ev.out, "Output directory")->required();
    cmd_ev
        ->add_option("--mode", ev.mode, "with_kb | without_kb | both")
        ->check(CLI::IsMember({"with_kb", "without_kb", "both"}));
    cmd_ev->add_option("--adapter", ev.adapter, "System-under-test adapter name");
    cmd_ev->add_option("--judge-provider", ev.judge_provider, "Judge provider name")
        ->required();
    cmd_ev->add_option("--gold-provider", ev.gold_provider,
                       "Reference-mode provider name");
    cmd_ev->add_option("--system", ev.system, "Label for reports");
    cmd_ev->add_option("--concurrency", ev.concurrency, "Parallel judge calls");
    cmd_ev->add_option("--window", ev.window, "Gold-context token ceiling");
    cmd_ev->add_option("--output", ev.output, "Answer token limit");
    cmd_ev->callback([&] { run_evaluate(ev); });

    ReportArgs rep;
    auto* cmd_rep = app.add_subcommand("report", "Aggregate results into CSV reports");
    cmd_rep->add_option("--run", rep.runs, "Evaluation output directory (repeatable)");
    cmd_rep->add_option("--fixture", rep.fixture, "Published-results CSV");
    cmd_rep->add_option("--out", rep.out, "Output directory")->required();
    cmd_rep->add_option("--mode", rep.mode, "Which mode feeds the points");
    cmd_rep->callback([&] { run_report(rep); });

    SweepArgs sweep;
    auto* cmd_sweep =
        app.add_subcommand("sweep", "Generate + evaluate across the window ladder");
    cmd_sweep->add_option("--corpus", sweep.corpus, "Corpus directory or JSON file")
        ->required();
    cmd_sweep->add_option("--kb", sweep.kb, "Domain vocabulary JSON")->required();
    cmd_sweep
        ->add_option("--test-type", sweep.test_type,
                     "rob(ustness) | multi(hop) | gen(eration)")
        ->required()
        ->check(CLI::IsMember({"rob", "multi", "gen", "robustness", "multihop",
                               "generation"}));
    cmd_sweep->add_option("--n", sweep.n, "Questions per window")->required();
    cmd_sweep->add_option("--provider", sweep.provider, "Generator provider name")
        ->required();
    cmd_sweep->add_option("--adapter", sweep.adapter, "System-under-test adapter");
    cmd_sweep
        ->add_option("--judge-provider", sweep.judge_provider, "Judge provider name")
        ->required();
    cmd_sweep->add_option("--gold-provider", sweep.gold_provider,
                          "Reference-mode provider name");
    cmd_sweep->add_option("--config", sweep.config, "Config JSON with window_ladder")
        ->required();
    cmd_sweep->add_option("--out", sweep.out, "Output directory")->required();
    cmd_sweep->add_option("--mode", sweep.mode, "with_kb | without_kb | both")
        ->check(CLI::IsMember({"with_kb", "without_kb", "both"}));
    cmd_sweep->add_option("--seed", sweep.seed, "Context-order shuffle seed");
    cmd_sweep->add_option("--window", sweep.window, "Chunk window in tokens");
    cmd_sweep->add_option("--overlap", sweep.overlap, "Chunk overlap in tokens");
    cmd_sweep->add_option("--concurrency", sweep.concurrency, "Parallel judge calls");
    cmd_sweep->callback([&] { run_sweep(sweep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const LookupError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BudgetError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const LlmError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return g_exit;
}

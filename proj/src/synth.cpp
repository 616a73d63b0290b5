#include "ragbench/synth.hpp"

#include <algorithm>
#include <sstream>

#include "ragbench/errors.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::needle: return "needle";
        case Strategy::intra_multi_topic: return "intra_multi_topic";
        case Strategy::cross_doc_multihop: return "cross_doc_multihop";
    }
    return "needle";
}

Strategy strategy_from_name(const std::string& s) {
    if (s == "needle") return Strategy::needle;
    if (s == "intra_multi_topic") return Strategy::intra_multi_topic;
    if (s == "cross_doc_multihop") return Strategy::cross_doc_multihop;
    throw ConfigError("unknown strategy: " + s);
}

std::string ContextBundle::assembled_text() const {
    std::string out;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (i) out += "\n\n";
        out += segments[i].text;
    }
    return out;
}

nlohmann::json ContextBundle::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments) {
        segs.push_back({{"chunk_id", s.chunk_id},
                        {"text", s.text},
                        {"tokens", s.tokens},
                        {"evidence", s.evidence}});
    }
    return {{"bundle_id", bundle_id},
            {"strategy", strategy_name(strategy)},
            {"target_chunks", target_chunks},
            {"distractor_chunks", distractor_chunks},
            {"segments", segs},
            {"token_budget", token_budget},
            {"token_count", token_count},
            {"evidence_position", evidence_position},
            {"similarity_audit", similarity_audit}};
}

ContextBundle ContextBundle::from_json(const nlohmann::json& j) {
    ContextBundle b;
    try {
        b.bundle_id = j.at("bundle_id").get<std::string>();
        b.strategy = strategy_from_name(j.at("strategy").get<std::string>());
        b.target_chunks = j.at("target_chunks").get<std::vector<std::string>>();
        b.distractor_chunks = j.at("distractor_chunks").get<std::vector<std::string>>();
        for (const auto& js : j.at("segments")) {
            BundleSegment s;
            s.chunk_id = js.at("chunk_id").get<std::string>();
            s.text = js.at("text").get<std::string>();
            s.tokens = js.at("tokens").get<int>();
            s.evidence = js.at("evidence").get<bool>();
            b.segments.push_back(std::move(s));
        }
        b.token_budget = j.at("token_budget").get<int>();
        b.token_count = j.at("token_count").get<int>();
        b.evidence_position = j.at("evidence_position").get<int>();
        if (j.contains("similarity_audit"))
            b.similarity_audit = j.at("similarity_audit").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad context bundle record: ") + e.what());
    }
    return b;
}

namespace {

BundleSegment make_segment(const TfIdfIndex& index, const std::string& id, bool evidence) {
    const Chunk& c = index.chunk(id);
    BundleSegment s;
    s.chunk_id = id;
    s.text = c.text;
    s.tokens = static_cast<int>(c.tokens.size());
    s.evidence = evidence;
    return s;
}

int chunk_tokens(const TfIdfIndex& index, const std::string& id) {
    return static_cast<int>(index.chunk(id).tokens.size());
}

// All other chunks ranked by ascending cosine to `anchor`; ties broken by
// index order so the ranking is reproducible.
std::vector<size_t> ascending_by_cosine(const TfIdfIndex& index, size_t anchor) {
    std::vector<std::pair<double, size_t>> ranked;
    ranked.reserve(index.size());
    for (size_t i = 0; i < index.size(); ++i) {
        if (i == anchor) continue;
        ranked.emplace_back(tfidf::cosine(index.vector(i), index.vector(anchor)), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                         if (a.first != b.first) return a.first < b.first;
                         return a.second < b.second;
                     });
    std::vector<size_t> out;
    out.reserve(ranked.size());
    for (const auto& [cos, i] : ranked) out.push_back(i);
    return out;
}

// Greedy fill: walk candidates in order, stop at the first one that does not
// fit the remaining budget.
std::vector<size_t> fill_until_budget(const TfIdfIndex& index,
                                      const std::vector<size_t>& candidates,
                                      int remaining) {
    std::vector<size_t> picked;
    for (size_t i : candidates) {
        int t = static_cast<int>(index.chunks()[i].tokens.size());
        if (t > remaining) break;
        picked.push_back(i);
        remaining -= t;
    }
    return picked;
}

}  // namespace

ContextBundle synth_needle(const TfIdfIndex& index, const std::string& target,
                           int budget) {
    if (budget <= 0) throw ConfigError("token budget must be positive");
    size_t anchor = index.position(target);

    ContextBundle b;
    b.bundle_id = std::string("needle:") + target;
    b.strategy = Strategy::needle;
    b.token_budget = budget;
    b.target_chunks = {target};

    int evidence_tokens = chunk_tokens(index, target);
    if (evidence_tokens > budget)
        throw BudgetError("evidence chunk " + target + " alone exceeds token budget");

    auto order = ascending_by_cosine(index, anchor);
    auto picked = fill_until_budget(index, order, budget - evidence_tokens);

    // Bury the evidence at a position derived from the bundle id, so the same
    // bundle always lands in the same slot but different bundles vary.
    Rng rng(fnv1a64(b.bundle_id));
    size_t slot = picked.empty() ? 0 : static_cast<size_t>(rng.below(picked.size() + 1));

    b.token_count = evidence_tokens;
    for (size_t i = 0; i <= picked.size(); ++i) {
        if (i == slot) {
            b.evidence_position = static_cast<int>(b.segments.size());
            b.segments.push_back(make_segment(index, target, true));
        }
        if (i == picked.size()) break;
        const std::string& id = index.chunks()[picked[i]].chunk_id;
        b.segments.push_back(make_segment(index, id, false));
        b.distractor_chunks.push_back(id);
        b.token_count += static_cast<int>(index.chunks()[picked[i]].tokens.size());
        b.similarity_audit["distractor:" + id] =
            tfidf::cosine(index.vector(picked[i]), index.vector(anchor));
    }
    return b;
}

ContextBundle synth_intra(const TfIdfIndex& index, const std::string& doc_id,
                          int budget, const SynthConfig& cfg) {
    if (budget <= 0) throw ConfigError("token budget must be positive");

    // Document chunks in ordinal order.
    std::vector<size_t> doc_chunks;
    for (size_t i = 0; i < index.size(); ++i)
        if (index.chunks()[i].doc_id == doc_id) doc_chunks.push_back(i);
    if (doc_chunks.empty()) throw LookupError("unknown document id: " + doc_id);
    if (doc_chunks.size() < 2)
        throw StrategyInapplicableError("document " + doc_id +
                                        " has fewer than two chunks");

    // Try each chunk as pivot in ordinal order; partner = least-similar other
    // chunk of the same document, accepted only below the separation bound.
    size_t pivot = 0, partner = 0;
    double best_pair_cos = 1.0;
    bool found = false;
    for (size_t pi = 0; pi < doc_chunks.size() && !found; ++pi) {
        size_t p = doc_chunks[pi];
        double min_cos = 2.0;
        size_t min_j = p;
        for (size_t q : doc_chunks) {
            if (q == p) continue;
            double c = tfidf::cosine(index.vector(p), index.vector(q));
            if (c < min_cos) {
                min_cos = c;
                min_j = q;
            }
        }
        if (min_cos < cfg.cluster_separation) {
            pivot = p;
            partner = min_j;
            best_pair_cos = min_cos;
            found = true;
        }
    }
    if (!found)
        throw StrategyInapplicableError(
            "document " + doc_id + " has no chunk pair below the separation bound");

    ContextBundle b;
    b.bundle_id = std::string("intra:") + doc_id;
    b.strategy = Strategy::intra_multi_topic;
    b.token_budget = budget;
    b.target_chunks = {index.chunks()[pivot].chunk_id,
                       index.chunks()[partner].chunk_id};
    b.similarity_audit["pair_cosine"] = best_pair_cos;

    int evidence_tokens = static_cast<int>(index.chunks()[pivot].tokens.size()) +
                          static_cast<int>(index.chunks()[partner].tokens.size());
    if (evidence_tokens > budget)
        throw BudgetError("evidence chunks for document " + doc_id +
                          " exceed token budget");

    // Evidence first, then the rest of the document in ordinal order.
    b.segments.push_back(make_segment(index, b.target_chunks[0], true));
    b.segments.push_back(make_segment(index, b.target_chunks[1], true));
    b.evidence_position = 0;
    b.token_count = evidence_tokens;

    std::vector<size_t> fillers;
    for (size_t i : doc_chunks)
        if (i != pivot && i != partner) fillers.push_back(i);
    auto picked = fill_until_budget(index, fillers, budget - evidence_tokens);
    for (size_t i : picked) {
        const std::string& id = index.chunks()[i].chunk_id;
        b.segments.push_back(make_segment(index, id, false));
        b.distractor_chunks.push_back(id);
        b.token_count += static_cast<int>(index.chunks()[i].tokens.size());
    }
    return b;
}

ContextBundle synth_multihop(const TfIdfIndex& index, const std::string& seed,
                             int budget, const SynthConfig& cfg) {
    if (budget <= 0) throw ConfigError("token budget must be positive");
    size_t anchor = index.position(seed);
    const std::string& seed_doc = index.chunks()[anchor].doc_id;

    // Strongest link in any other document.
    double best = -1.0;
    size_t link = anchor;
    for (size_t i = 0; i < index.size(); ++i) {
        if (index.chunks()[i].doc_id == seed_doc) continue;
        double c = tfidf::cosine(index.vector(i), index.vector(anchor));
        if (c > best) {
            best = c;
            link = i;
        }
    }
    if (link == anchor)
        throw StrategyInapplicableError("no other document available for seed " + seed);
    if (!(best > cfg.theta_link))
        throw LinkTooWeakError("strongest cross-document link for " + seed +
                               " is " + fmt_double(best) + ", not above " +
                               fmt_double(cfg.theta_link));

    ContextBundle b;
    b.bundle_id = std::string("multihop:") + seed;
    b.strategy = Strategy::cross_doc_multihop;
    b.token_budget = budget;
    b.target_chunks = {seed, index.chunks()[link].chunk_id};
    b.similarity_audit["link_cosine"] = best;

    int evidence_tokens =
        chunk_tokens(index, seed) + static_cast<int>(index.chunks()[link].tokens.size());
    if (evidence_tokens > budget)
        throw BudgetError("evidence chunks for seed " + seed + " exceed token budget");

    b.segments.push_back(make_segment(index, seed, true));
    b.segments.push_back(make_segment(index, b.target_chunks[1], true));
    b.evidence_position = 0;
    b.token_count = evidence_tokens;

    // Distractors: ascending cosine to the seed, excluding both evidence chunks.
    auto order = ascending_by_cosine(index, anchor);
    std::vector<size_t> candidates;
    for (size_t i : order)
        if (i != link) candidates.push_back(i);
    auto picked = fill_until_budget(index, candidates, budget - evidence_tokens);
    for (size_t i : picked) {
        const std::string& id = index.chunks()[i].chunk_id;
        b.segments.push_back(make_segment(index, id, false));
        b.distractor_chunks.push_back(id);
        b.token_count += static_cast<int>(index.chunks()[i].tokens.size());
        b.similarity_audit["distractor:" + id] =
            tfidf::cosine(index.vector(i), index.vector(anchor));
    }
    return b;
}

SynthBatch synthesize_all(const TfIdfIndex& index, Strategy strategy, int budget,
                          const SynthConfig& cfg) {
    SynthBatch batch;
    auto attempt = [&](const std::string& subject, auto&& fn) {
        try {
            batch.bundles.push_back(fn());
        } catch (const StrategyInapplicableError& e) {
            batch.skipped.push_back({subject, e.what()});
        } catch (const BudgetError& e) {
            batch.skipped.push_back({subject, e.what()});
        }
    };

    if (strategy == Strategy::intra_multi_topic) {
        std::vector<std::string> docs;
        for (const auto& c : index.chunks())
            if (docs.empty() || docs.back() != c.doc_id) docs.push_back(c.doc_id);
        for (const auto& d : docs)
            attempt(d, [&] { return synth_intra(index, d, budget, cfg); });
    } else {
        for (const auto& c : index.chunks()) {
            if (strategy == Strategy::needle)
                attempt(c.chunk_id,
                        [&] { return synth_needle(index, c.chunk_id, budget); });
            else
                attempt(c.chunk_id,
                        [&] { return synth_multihop(index, c.chunk_id, budget, cfg); });
        }
    }
    return batch;
}

}  // namespace ragbench

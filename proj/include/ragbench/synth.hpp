#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/corpus.hpp"

namespace ragbench {

enum class Strategy { needle, intra_multi_topic, cross_doc_multihop };
const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& s);

struct BundleSegment {
    std::string chunk_id;
    std::string text;
    int tokens = 0;
    bool evidence = false;
};

// A synthesized evaluation context: evidence chunk(s) plus budget-filling
// distractors, with the similarity values behind every selection decision.
struct ContextBundle {
    std::string bundle_id;
    Strategy strategy = Strategy::needle;
    std::vector<std::string> target_chunks;      // evidence ids
    std::vector<std::string> distractor_chunks;  // assembled order, minus evidence
    std::vector<BundleSegment> segments;         // full assembled order
    int token_budget = 0;
    int token_count = 0;
    int evidence_position = -1;                  // needle slot in segments
    std::map<std::string, double> similarity_audit;

    std::string assembled_text() const;  // segments joined by blank lines

    nlohmann::json to_json() const;
    static ContextBundle from_json(const nlohmann::json& j);
};

struct SynthConfig {
    double cluster_separation = 0.3;  // intra-doc pairwise cosine bound (strict <)
    double theta_link = 0.1;          // multihop minimum link similarity (strict >)
};

// Strategy 1: target chunk buried among ascending-cosine distractors at a
// position seeded from the bundle id.
ContextBundle synth_needle(const TfIdfIndex& index, const std::string& target,
                           int budget);

// Strategy 2: two weakly-related chunks from one document (pairwise cosine
// below the separation bound), padded with further same-document chunks.
ContextBundle synth_intra(const TfIdfIndex& index, const std::string& doc_id,
                          int budget, const SynthConfig& cfg = {});

// Strategy 3: seed plus its strongest cross-document link, padded with
// ascending-cosine distractors relative to the seed.
ContextBundle synth_multihop(const TfIdfIndex& index, const std::string& seed,
                             int budget, const SynthConfig& cfg = {});

struct SynthSkip {
    std::string subject;  // chunk or doc id
    std::string reason;
};

struct SynthBatch {
    std::vector<ContextBundle> bundles;
    std::vector<SynthSkip> skipped;
};

// Enumerate every applicable context for a strategy (needle/multihop: one per
// chunk; intra: one per document), collecting skips instead of failing.
SynthBatch synthesize_all(const TfIdfIndex& index, Strategy strategy, int budget,
                          const SynthConfig& cfg = {});

}  // namespace ragbench

#pragma once

#include <set>
#include <string>
#include <vector>

#include "ragbench/kb.hpp"
#include "ragbench/tfidf.hpp"

namespace ragbench {

// Lexical footprint of one question, used for duplicate rejection.
struct QuestionFingerprint {
    std::string text;
    std::set<std::string> words;       // all normalized tokens
    std::set<std::string> tech_terms;  // subset matched by the knowledge base
    std::vector<std::string> tokens;   // normalized token sequence
};

QuestionFingerprint fingerprint(const KnowledgeBase& kb, const std::string& question);

// |A∩B| / |A∪B|, with two empty sets counted as disjoint (0).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Word-set overlap plus a small bonus for sharing domain vocabulary.
double weighted_similarity(const QuestionFingerprint& a, const QuestionFingerprint& b,
                           double term_bonus = 0.05);

struct UniquenessVerdict {
    bool unique = true;
    double max_lexical = 0.0;
    std::string closest_lexical;       // accepted question text, if any
    bool semantic_gate_active = false;
    double max_semantic = 0.0;
    std::string closest_semantic;
    std::string rejected_by;           // "", "lexical", or "semantic"
};

// Tracks accepted questions and rejects near-duplicates. Lexical check always
// runs; a TF-IDF cosine gate over the accepted pool joins in once the pool is
// large enough to fit a meaningful vocabulary.
class UniquenessChecker {
public:
    explicit UniquenessChecker(const KnowledgeBase* kb, double term_bonus = 0.05,
                               std::size_t semantic_min_pool = 5,
                               double semantic_margin = 0.05);

    UniquenessVerdict check(const QuestionFingerprint& fp, double sim_threshold) const;
    // Adds to the pool and refits the question-vocabulary model.
    void accept(QuestionFingerprint fp);
    std::size_t size() const { return accepted_.size(); }
    const std::vector<QuestionFingerprint>& accepted() const { return accepted_; }

private:
    const KnowledgeBase* kb_;
    double term_bonus_;
    std::size_t semantic_min_pool_;
    double semantic_margin_;
    std::vector<QuestionFingerprint> accepted_;
    tfidf::Model model_;
    std::vector<tfidf::SparseVec> vectors_;
};

}  // namespace ragbench

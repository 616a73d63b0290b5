#include "ragbench/dedup.hpp"

#include <algorithm>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"

namespace ragbench {

QuestionFingerprint fingerprint(const KnowledgeBase& kb, const std::string& question) {
    QuestionFingerprint fp;
    fp.text = question;
    fp.tokens = tokenize(question);
    fp.words.insert(fp.tokens.begin(), fp.tokens.end());
    fp.tech_terms = kb.covered_tokens(fp.tokens);
    return fp;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else { ++inter; ++ia; ++ib; }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double weighted_similarity(const QuestionFingerprint& a, const QuestionFingerprint& b,
                           double term_bonus) {
    return jaccard(a.words, b.words) + term_bonus * jaccard(a.tech_terms, b.tech_terms);
}

UniquenessChecker::UniquenessChecker(const KnowledgeBase* kb, double term_bonus,
                                     std::size_t semantic_min_pool,
                                     double semantic_margin)
    : kb_(kb),
      term_bonus_(term_bonus),
      semantic_min_pool_(semantic_min_pool),
      semantic_margin_(semantic_margin) {
    if (!kb_) throw ConfigError("uniqueness checker needs a knowledge base");
}

UniquenessVerdict UniquenessChecker::check(const QuestionFingerprint& fp,
                                           double sim_threshold) const {
    UniquenessVerdict v;
    for (const auto& prev : accepted_) {
        double s = weighted_similarity(fp, prev, term_bonus_);
        if (s > v.max_lexical) {
            v.max_lexical = s;
            v.closest_lexical = prev.text;
        }
    }
    if (v.max_lexical > sim_threshold) {
        v.unique = false;
        v.rejected_by = "lexical";
        return v;
    }

    if (accepted_.size() >= semantic_min_pool_) {
        v.semantic_gate_active = true;
        tfidf::SparseVec q = model_.transform(fp.tokens);
        for (std::size_t i = 0; i < vectors_.size(); ++i) {
            double c = tfidf::cosine(q, vectors_[i]);
            if (c > v.max_semantic) {
                v.max_semantic = c;
                v.closest_semantic = accepted_[i].text;
            }
        }
        if (v.max_semantic > sim_threshold + semantic_margin_) {
            v.unique = false;
            v.rejected_by = "semantic";
            return v;
        }
    }
    return v;
}

void UniquenessChecker::accept(QuestionFingerprint fp) {
    accepted_.push_back(std::move(fp));
    // Refit so the semantic gate always reflects the current accepted pool.
    std::vector<std::vector<std::string>> docs;
    docs.reserve(accepted_.size());
    for (const auto& a : accepted_) docs.push_back(a.tokens);
    model_ = tfidf::Model::fit(docs);
    vectors_.clear();
    vectors_.reserve(docs.size());
    for (const auto& d : docs) vectors_.push_back(model_.transform(d));
}

}  // namespace ragbench

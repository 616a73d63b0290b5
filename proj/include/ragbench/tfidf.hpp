#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragbench::tfidf {

// Sparse vector: (vocabulary index, value) pairs sorted by index.
using SparseVec = std::vector<std::pair<int, double>>;

double dot(const SparseVec& a, const SparseVec& b);
double norm(const SparseVec& v);
// 0.0 when either vector is all-zero.
double cosine(const SparseVec& a, const SparseVec& b);

// Raw-count tf with smoothed idf = ln((1+N)/(1+df)) + 1; vectors are
// L2-normalized by transform(). Vocabulary order is sorted-unique, so the
// model is deterministic for a given document sequence.
class Model {
public:
    static Model fit(const std::vector<std::vector<std::string>>& docs);

    SparseVec transform(const std::vector<std::string>& tokens) const;

    const std::vector<std::string>& vocabulary() const { return vocab_terms_; }
    const std::vector<double>& idf() const { return idf_; }
    std::size_t doc_count() const { return doc_count_; }

    nlohmann::json to_json() const;
    static Model from_json(const nlohmann::json& j);

private:
    std::vector<std::string> vocab_terms_;
    std::unordered_map<std::string, int> vocab_index_;
    std::vector<double> idf_;
    std::size_t doc_count_ = 0;
};

}  // namespace ragbench::tfidf

#include "ragbench/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ragbench/errors.hpp"

namespace ragbench::tfidf {

double dot(const SparseVec& a, const SparseVec& b) {
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            acc += a[i].second * b[j].second;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return acc;
}

double norm(const SparseVec& v) {
    double acc = 0.0;
    for (const auto& [_, x] : v) acc += x * x;
    return std::sqrt(acc);
}

double cosine(const SparseVec& a, const SparseVec& b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

Model Model::fit(const std::vector<std::vector<std::string>>& docs) {
    Model m;
    m.doc_count_ = docs.size();
    std::map<std::string, int> df;
    for (const auto& doc : docs) {
        std::map<std::string, bool> seen;
        for (const auto& t : doc) {
            if (!seen[t]) {
                seen[t] = true;
                ++df[t];
            }
        }
    }
    m.vocab_terms_.reserve(df.size());
    m.idf_.reserve(df.size());
    const double n = static_cast<double>(docs.size());
    for (const auto& [term, d] : df) {  // std::map keeps this sorted
        m.vocab_index_.emplace(term, static_cast<int>(m.vocab_terms_.size()));
        m.vocab_terms_.push_back(term);
        m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0);
    }
    return m;
}

SparseVec Model::transform(const std::vector<std::string>& tokens) const {
    std::map<int, double> counts;
    for (const auto& t : tokens) {
        auto it = vocab_index_.find(t);
        if (it != vocab_index_.end()) counts[it->second] += 1.0;
    }
    SparseVec v;
    v.reserve(counts.size());
    double sq = 0.0;
    for (const auto& [idx, tf] : counts) {
        double x = tf * idf_[idx];
        v.emplace_back(idx, x);
        sq += x * x;
    }
    if (sq > 0.0) {
        double inv = 1.0 / std::sqrt(sq);
        for (auto& [_, x] : v) x *= inv;
    }
    return v;
}

nlohmann::json Model::to_json() const {
    nlohmann::json j;
    j["doc_count"] = doc_count_;
    j["vocabulary"] = vocab_terms_;
    j["idf"] = idf_;
    return j;
}

Model Model::from_json(const nlohmann::json& j) {
    Model m;
    m.doc_count_ = j.at("doc_count").get<std::size_t>();
    m.vocab_terms_ = j.at("vocabulary").get<std::vector<std::string>>();
    m.idf_ = j.at("idf").get<std::vector<double>>();
    if (m.vocab_terms_.size() != m.idf_.size())
        throw ConfigError("tf-idf model: vocabulary/idf size mismatch");
    for (std::size_t i = 0; i < m.vocab_terms_.size(); ++i)
        m.vocab_index_.emplace(m.vocab_terms_[i], static_cast<int>(i));
    return m;
}

}  // namespace ragbench::tfidf

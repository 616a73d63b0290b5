#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragbench {

enum class PrecisionLevel { low = 0, medium = 1, high = 2 };

const char* precision_name(PrecisionLevel p);
PrecisionLevel precision_from_name(const std::string& name);

struct TermCategory {
    std::string name;
    double weight = 0.0;
    std::vector<std::string> terms;  // normalized, sorted, unique
};

// One matched KB phrase inside a token stream.
struct TermOccurrence {
    int category = -1;    // index into KnowledgeBase::categories
    int term = -1;        // index into that category's terms
    std::size_t token_pos = 0;
    std::size_t token_len = 0;
};

struct TermScan {
    std::vector<TermOccurrence> occurrences;
    std::size_t word_count = 0;
};

class KnowledgeBase {
public:
    static KnowledgeBase from_json(const nlohmann::json& doc);
    static KnowledgeBase load(const std::filesystem::path& file);

    const std::vector<TermCategory>& categories() const { return categories_; }
    const std::vector<std::string>& high_weight_categories() const {
        return high_weight_;
    }
    const std::string& name() const { return name_; }
    std::uint64_t content_hash() const { return hash_; }
    std::size_t term_count() const;

    // Longest-match-first scan, left to right; a matched span is consumed so
    // "atomic layer deposition" never also counts as "deposition".
    TermScan scan(const std::vector<std::string>& tokens) const;

    double density(const TermScan& scan) const;
    double omega_high(const TermScan& scan) const;
    // Category with the largest weighted occurrence mass; ties prefer the
    // higher weight, then the lexicographically smaller name.
    std::optional<std::string> dominant_category(const TermScan& scan) const;

    // Token positions covered by any matched term (for question fingerprints).
    std::set<std::string> covered_tokens(const std::vector<std::string>& tokens) const;

private:
    struct PhraseRef {
        int category;
        int term;
        const std::vector<std::string>* tokens;
    };

    void build_matcher();

    std::string name_;
    std::vector<TermCategory> categories_;
    std::vector<std::string> high_weight_;
    std::uint64_t hash_ = 0;

    std::vector<std::vector<std::vector<std::string>>> phrase_tokens_;
    std::map<std::string, std::vector<PhraseRef>> first_token_index_;
};

// Convenience wrappers that tokenize and scan in one step.
double technical_density(const KnowledgeBase& kb, const std::string& text);
double omega_high(const KnowledgeBase& kb, const std::string& text);
std::optional<std::string> dominant_category(const KnowledgeBase& kb,
                                             const std::string& text);

// Eq-style branch rules; strict ">" on every threshold.
PrecisionLevel classify_precision(double rho, double omega_h);

}  // namespace ragbench

#include "ragbench/kb.hpp"

#include <algorithm>
#include <set>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

const char* precision_name(PrecisionLevel p) {
    switch (p) {
        case PrecisionLevel::high: return "high";
        case PrecisionLevel::medium: return "medium";
        case PrecisionLevel::low: return "low";
    }
    return "low";
}

PrecisionLevel precision_from_name(const std::string& name) {
    if (name == "high") return PrecisionLevel::high;
    if (name == "medium") return PrecisionLevel::medium;
    if (name == "low") return PrecisionLevel::low;
    throw ConfigError("unknown precision level: " + name);
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& doc) {
    KnowledgeBase kb;
    kb.name_ = doc.value("name", "kb");
    if (!doc.contains("categories") || !doc["categories"].is_array() ||
        doc["categories"].empty()) {
        throw ConfigError("knowledge base needs a non-empty categories array");
    }

    std::map<std::string, std::string> term_owner;  // normalized term -> category
    std::set<std::string> category_names;
    for (const auto& c : doc["categories"]) {
        TermCategory cat;
        if (!c.contains("name") || !c["name"].is_string())
            throw ConfigError("category missing name");
        cat.name = c["name"].get<std::string>();
        if (!category_names.insert(cat.name).second)
            throw ConfigError("duplicate category name: " + cat.name);
        if (!c.contains("weight") || !c["weight"].is_number())
            throw ConfigError("category '" + cat.name + "' missing weight");
        cat.weight = c["weight"].get<double>();
        if (cat.weight <= 0.0)
            throw ConfigError("category '" + cat.name + "' has non-positive weight");
        if (!c.contains("terms") || !c["terms"].is_array() || c["terms"].empty())
            throw ConfigError("category '" + cat.name + "' has no terms");

        std::set<std::string> uniq;
        for (const auto& t : c["terms"]) {
            if (!t.is_string()) throw ConfigError("non-string term in " + cat.name);
            std::string norm;
            for (const auto& tok : tokenize(t.get<std::string>())) {
                if (!norm.empty()) norm.push_back(' ');
                norm += tok;
            }
            if (norm.empty())
                throw ConfigError("empty term in category '" + cat.name + "'");
            uniq.insert(norm);
        }
        for (const auto& term : uniq) {
            auto [it, fresh] = term_owner.emplace(term, cat.name);
            if (!fresh) {
                throw ConfigError("term '" + term + "' appears in categories '" +
                                  it->second + "' and '" + cat.name + "'");
            }
            cat.terms.push_back(term);
        }
        kb.categories_.push_back(std::move(cat));
    }

    if (doc.contains("high_weight_categories")) {
        for (const auto& n : doc["high_weight_categories"]) {
            std::string name = n.get<std::string>();
            if (!category_names.count(name))
                throw ConfigError("high_weight_categories references unknown category: " + name);
            kb.high_weight_.push_back(name);
        }
    } else {
        // Default: the two highest-weight categories, ties broken by name.
        std::vector<const TermCategory*> sorted;
        for (const auto& c : kb.categories_) sorted.push_back(&c);
        std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
            if (a->weight != b->weight) return a->weight > b->weight;
            return a->name < b->name;
        });
        for (std::size_t i = 0; i < sorted.size() && i < 2; ++i)
            kb.high_weight_.push_back(sorted[i]->name);
    }

    // Content hash over a canonical rendering.
    std::string canon = kb.name_;
    for (const auto& c : kb.categories_) {
        canon += "|" + c.name + ":" + fmt_double(c.weight);
        for (const auto& t : c.terms) canon += ";" + t;
    }
    for (const auto& h : kb.high_weight_) canon += "^" + h;
    kb.hash_ = fnv1a64(canon);

    kb.build_matcher();
    return kb;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse knowledge base file " + file.string() +
                          ": " + e.what());
    }
    return from_json(doc);
}

std::size_t KnowledgeBase::term_count() const {
    std::size_t n = 0;
    for (const auto& c : categories_) n += c.terms.size();
    return n;
}

void KnowledgeBase::build_matcher() {
    phrase_tokens_.resize(categories_.size());
    for (std::size_t ci = 0; ci < categories_.size(); ++ci) {
        auto& per_cat = phrase_tokens_[ci];
        per_cat.resize(categories_[ci].terms.size());
        for (std::size_t ti = 0; ti < categories_[ci].terms.size(); ++ti) {
            per_cat[ti] = tokenize(categories_[ci].terms[ti]);
            if (per_cat[ti].empty()) continue;
            first_token_index_[per_cat[ti][0]].push_back(
                {static_cast<int>(ci), static_cast<int>(ti), &per_cat[ti]});
        }
    }
    for (auto& [tok, refs] : first_token_index_) {
        std::sort(refs.begin(), refs.end(), [](const PhraseRef& a, const PhraseRef& b) {
            if (a.tokens->size() != b.tokens->size())
                return a.tokens->size() > b.tokens->size();
            if (a.category != b.category) return a.category < b.category;
            return a.term < b.term;
        });
    }
}

TermScan KnowledgeBase::scan(const std::vector<std::string>& tokens) const {
    TermScan out;
    out.word_count = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = first_token_index_.find(tokens[i]);
        if (it == first_token_index_.end()) continue;
        for (const PhraseRef& ref : it->second) {
            const auto& ph = *ref.tokens;
            if (i + ph.size() > tokens.size()) continue;
            bool match = true;
            for (std::size_t j = 1; j < ph.size(); ++j) {
                if (tokens[i + j] != ph[j]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                out.occurrences.push_back({ref.category, ref.term, i, ph.size()});
                i += ph.size() - 1;  // consume the span
                break;
            }
        }
    }
    return out;
}

double KnowledgeBase::density(const TermScan& scan) const {
    if (scan.word_count == 0)
        throw Error("technical density over empty text (zero words)");
    double mass = 0.0;
    for (const auto& occ : scan.occurrences)
        mass += categories_[occ.category].weight;
    return mass / static_cast<double>(scan.word_count);
}

double KnowledgeBase::omega_high(const TermScan& scan) const {
    std::set<std::string> high(high_weight_.begin(), high_weight_.end());
    std::map<int, std::set<int>> distinct;  // category -> distinct term indices
    for (const auto& occ : scan.occurrences) {
        if (high.count(categories_[occ.category].name))
            distinct[occ.category].insert(occ.term);
    }
    double total = 0.0;
    for (const auto& [ci, terms] : distinct)
        total += categories_[ci].weight * static_cast<double>(terms.size());
    return total;
}

std::optional<std::string> KnowledgeBase::dominant_category(const TermScan& scan) const {
    std::map<int, double> mass;
    for (const auto& occ : scan.occurrences)
        mass[occ.category] += categories_[occ.category].weight;
    if (mass.empty()) return std::nullopt;
    int best = -1;
    for (const auto& [ci, m] : mass) {
        if (best < 0) {
            best = ci;
            continue;
        }
        double bm = mass[best];
        if (m > bm ||
            (m == bm && (categories_[ci].weight > categories_[best].weight ||
                         (categories_[ci].weight == categories_[best].weight &&
                          categories_[ci].name < categories_[best].name)))) {
            best = ci;
        }
    }
    return categories_[best].name;
}

std::set<std::string> KnowledgeBase::covered_tokens(
    const std::vector<std::string>& tokens) const {
    std::set<std::string> covered;
    TermScan s = scan(tokens);
    for (const auto& occ : s.occurrences)
        for (std::size_t j = 0; j < occ.token_len; ++j)
            covered.insert(tokens[occ.token_pos + j]);
    return covered;
}

double technical_density(const KnowledgeBase& kb, const std::string& text) {
    return kb.density(kb.scan(tokenize(text)));
}

double omega_high(const KnowledgeBase& kb, const std::string& text) {
    return kb.omega_high(kb.scan(tokenize(text)));
}

std::optional<std::string> dominant_category(const KnowledgeBase& kb,
                                             const std::string& text) {
    return kb.dominant_category(kb.scan(tokenize(text)));
}

PrecisionLevel classify_precision(double rho, double omega_h) {
    if (rho > 0.20 || omega_h > 8.0) return PrecisionLevel::high;
    if (rho > 0.12 || omega_h > 4.0) return PrecisionLevel::medium;
    return PrecisionLevel::low;
}

}  // namespace ragbench

#include "ragbench/text.hpp"

#include <cctype>

namespace ragbench {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_strip(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

}  // namespace

std::string normalize_token(std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && is_strip(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && is_strip(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw[i]);
    }
    return out;
}

std::vector<Token> tokenize_spans(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        std::size_t start = i;
        while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::string norm = normalize_token(text.substr(start, i - start));
        if (!norm.empty()) out.push_back({std::move(norm), start, i});
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.norm));
    return out;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",       "about",   "after",  "all",   "also", "an",    "and",
        "any",     "are",     "as",     "at",    "be",   "been",  "because",
        "before",  "between", "both",   "but",   "by",   "can",   "could",
        "did",     "do",      "does",   "during","each", "for",   "from",
        "had",     "has",     "have",   "how",   "if",   "in",    "into",
        "is",      "it",      "its",    "may",   "might","more",  "most",
        "must",    "no",      "not",    "of",    "on",   "one",   "or",
        "over",    "per",     "shall",  "she",   "should","some", "such",
        "than",    "that",    "the",    "their", "them", "then",  "there",
        "these",   "they",    "this",   "those", "through", "to", "under",
        "was",     "we",      "were",   "what",  "when", "where", "which",
        "while",   "why",     "will",   "with",  "would","you",
    };
    return words;
}

}  // namespace ragbench

#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench {

// One normalized word token plus the byte span it came from, so chunked text
// can be reproduced verbatim while similarity math runs on normalized forms.
struct Token {
    std::string norm;
    std::size_t byte_begin = 0;
    std::size_t byte_end = 0;
};

// Whitespace-split words, lowercased, with leading/trailing ASCII punctuation
// stripped. Interior punctuation survives ("low-k", "13.5nm", "i-v"). Words
// that normalize to nothing (pure punctuation) are dropped.
std::vector<Token> tokenize_spans(std::string_view text);

// Normalized token strings only.
std::vector<std::string> tokenize(std::string_view text);

std::string normalize_token(std::string_view raw);

// Small English function-word list used by answer-grounding checks; not used
// anywhere in density or similarity math.
const std::set<std::string>& stopwords();

}  // namespace ragbench

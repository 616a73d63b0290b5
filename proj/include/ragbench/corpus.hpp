#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/tfidf.hpp"

namespace ragbench {

enum class SourceKind { paper, patent, standard, other };
const char* source_kind_name(SourceKind k);
SourceKind source_kind_from_name(const std::string& s);

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    SourceKind source_kind = SourceKind::other;
};

struct Chunk {
    std::string chunk_id;  // "<doc_id>#<4-digit ordinal>"
    std::string doc_id;
    int ordinal = 0;
    std::string text;                 // verbatim substring of the document body
    std::size_t token_begin = 0;      // word-token offsets within the document
    std::size_t token_end = 0;
    std::vector<std::string> tokens;  // normalized word tokens
};

struct ChunkingConfig {
    int window = 512;
    int overlap = 128;
};

// Sliding windows advance by (window - overlap); the final partial window is
// emitted as its own chunk. overlap >= window is a config error.
std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs,
                                const ChunkingConfig& cfg = {});

// Directory of *.txt files (doc_id = file stem) ...
std::vector<Document> load_corpus_dir(const std::filesystem::path& dir);
// ... or one JSON array of {doc_id, title, body, source_kind}.
std::vector<Document> load_corpus_json(const std::filesystem::path& file);

class TfIdfIndex {
public:
    // Sorts chunks by (doc_id, ordinal) and fits the TF-IDF model over them.
    static TfIdfIndex build(std::vector<Chunk> chunks,
                            const ChunkingConfig& cfg = {});

    const std::vector<Chunk>& chunks() const { return chunks_; }
    std::size_t size() const { return chunks_.size(); }
    const tfidf::Model& model() const { return model_; }
    const ChunkingConfig& chunking() const { return chunking_; }
    std::uint64_t content_hash() const { return hash_; }

    bool contains(const std::string& chunk_id) const;
    const Chunk& chunk(const std::string& chunk_id) const;      // LookupError
    const tfidf::SparseVec& vector(const std::string& chunk_id) const;
    const tfidf::SparseVec& vector(std::size_t pos) const { return vectors_[pos]; }
    std::size_t position(const std::string& chunk_id) const;

    double cosine(const std::string& c1, const std::string& c2) const;

    nlohmann::json to_json() const;
    static TfIdfIndex from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& file) const;
    static TfIdfIndex load(const std::filesystem::path& file);

private:
    std::vector<Chunk> chunks_;
    std::vector<tfidf::SparseVec> vectors_;
    std::unordered_map<std::string, std::size_t> by_id_;
    tfidf::Model model_;
    ChunkingConfig chunking_;
    std::uint64_t hash_ = 0;

    void finish();
};

}  // namespace ragbench

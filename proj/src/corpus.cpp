#include "ragbench/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

namespace {
constexpr int kIndexSchemaVersion = 1;

std::string make_chunk_id(const std::string& doc_id, int ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%04d", ordinal);
    return doc_id + buf;
}
}  // namespace

const char* source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::paper: return "paper";
        case SourceKind::patent: return "patent";
        case SourceKind::standard: return "standard";
        case SourceKind::other: return "other";
    }
    return "other";
}

SourceKind source_kind_from_name(const std::string& s) {
    if (s == "paper") return SourceKind::paper;
    if (s == "patent") return SourceKind::patent;
    if (s == "standard") return SourceKind::standard;
    if (s == "other" || s.empty()) return SourceKind::other;
    throw ConfigError("unknown source_kind: " + s);
}

std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs,
                                const ChunkingConfig& cfg) {
    if (cfg.window <= 0) throw ConfigError("chunk window must be positive");
    if (cfg.overlap < 0 || cfg.overlap >= cfg.window)
        throw ConfigError("chunk overlap must satisfy 0 <= overlap < window");
    if (docs.empty()) throw ConfigError("cannot chunk an empty corpus");

    std::set<std::string> ids;
    std::vector<Chunk> out;
    const std::size_t window = static_cast<std::size_t>(cfg.window);
    const std::size_t stride = static_cast<std::size_t>(cfg.window - cfg.overlap);

    for (const auto& doc : docs) {
        if (doc.doc_id.empty()) throw ConfigError("document with empty doc_id");
        if (!ids.insert(doc.doc_id).second)
            throw ConfigError("duplicate doc_id: " + doc.doc_id);
        auto spans = tokenize_spans(doc.body);
        if (spans.empty()) throw ConfigError("document has empty body: " + doc.doc_id);

        std::size_t pos = 0;
        int ordinal = 0;
        while (true) {
            std::size_t end = std::min(pos + window, spans.size());
            Chunk c;
            c.doc_id = doc.doc_id;
            c.ordinal = ordinal;
            c.chunk_id = make_chunk_id(doc.doc_id, ordinal);
            c.token_begin = pos;
            c.token_end = end;
            c.text = doc.body.substr(spans[pos].byte_begin,
                                     spans[end - 1].byte_end - spans[pos].byte_begin);
            c.tokens.reserve(end - pos);
            for (std::size_t i = pos; i < end; ++i) c.tokens.push_back(spans[i].norm);
            out.push_back(std::move(c));
            ++ordinal;
            if (end == spans.size()) break;
            pos += stride;
        }
    }
    return out;
}

std::vector<Document> load_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("corpus path is not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ConfigError("no .txt documents found in " + dir.string());
    std::vector<Document> docs;
    for (const auto& f : files) {
        Document d;
        d.doc_id = f.stem().string();
        d.title = d.doc_id;
        d.body = read_file(f);
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<Document> load_corpus_json(const std::filesystem::path& file) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse corpus file " + file.string() + ": " + e.what());
    }
    if (!arr.is_array() || arr.empty())
        throw ConfigError("corpus file must be a non-empty JSON array");
    std::vector<Document> docs;
    for (const auto& j : arr) {
        Document d;
        d.doc_id = j.at("doc_id").get<std::string>();
        d.title = j.value("title", d.doc_id);
        d.body = j.at("body").get<std::string>();
        d.source_kind = source_kind_from_name(j.value("source_kind", "other"));
        docs.push_back(std::move(d));
    }
    return docs;
}

TfIdfIndex TfIdfIndex::build(std::vector<Chunk> chunks, const ChunkingConfig& cfg) {
    if (chunks.empty()) throw ConfigError("cannot index zero chunks");
    TfIdfIndex idx;
    idx.chunking_ = cfg;
    std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) {
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        return a.ordinal < b.ordinal;
    });
    idx.chunks_ = std::move(chunks);
    std::vector<std::vector<std::string>> docs;
    docs.reserve(idx.chunks_.size());
    for (const auto& c : idx.chunks_) docs.push_back(c.tokens);
    idx.model_ = tfidf::Model::fit(docs);
    idx.finish();
    return idx;
}

void TfIdfIndex::finish() {
    vectors_.clear();
    vectors_.reserve(chunks_.size());
    by_id_.clear();
    std::string canon;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto& c = chunks_[i];
        if (!by_id_.emplace(c.chunk_id, i).second)
            throw ConfigError("duplicate chunk_id: " + c.chunk_id);
        vectors_.push_back(model_.transform(c.tokens));
        canon += c.chunk_id;
        canon.push_back('\x1f');
        canon += c.text;
        canon.push_back('\x1e');
    }
    hash_ = fnv1a64(canon);
}

bool TfIdfIndex::contains(const std::string& chunk_id) const {
    return by_id_.count(chunk_id) != 0;
}

std::size_t TfIdfIndex::position(const std::string& chunk_id) const {
    auto it = by_id_.find(chunk_id);
    if (it == by_id_.end()) throw LookupError("unknown chunk id: " + chunk_id);
    return it->second;
}

const Chunk& TfIdfIndex::chunk(const std::string& chunk_id) const {
    return chunks_[position(chunk_id)];
}

const tfidf::SparseVec& TfIdfIndex::vector(const std::string& chunk_id) const {
    return vectors_[position(chunk_id)];
}

double TfIdfIndex::cosine(const std::string& c1, const std::string& c2) const {
    return tfidf::cosine(vector(c1), vector(c2));
}

nlohmann::json TfIdfIndex::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kIndexSchemaVersion;
    j["window"] = chunking_.window;
    j["overlap"] = chunking_.overlap;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : chunks_) {
        arr.push_back({{"chunk_id", c.chunk_id},
                       {"doc_id", c.doc_id},
                       {"ordinal", c.ordinal},
                       {"token_begin", c.token_begin},
                       {"token_end", c.token_end},
                       {"text", c.text}});
    }
    j["chunks"] = std::move(arr);
    return j;
}

TfIdfIndex TfIdfIndex::from_json(const nlohmann::json& j) {
    int version = j.value("schema_version", -1);
    if (version != kIndexSchemaVersion)
        throw ConfigError("index cache schema_version mismatch (got " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kIndexSchemaVersion) + ")");
    TfIdfIndex idx;
    idx.chunking_.window = j.at("window").get<int>();
    idx.chunking_.overlap = j.at("overlap").get<int>();
    for (const auto& cj : j.at("chunks")) {
        Chunk c;
        c.chunk_id = cj.at("chunk_id").get<std::string>();
        c.doc_id = cj.at("doc_id").get<std::string>();
        c.ordinal = cj.at("ordinal").get<int>();
        c.token_begin = cj.at("token_begin").get<std::size_t>();
        c.token_end = cj.at("token_end").get<std::size_t>();
        c.text = cj.at("text").get<std::string>();
        c.tokens = tokenize(c.text);
        idx.chunks_.push_back(std::move(c));
    }
    if (idx.chunks_.empty()) throw ConfigError("index cache has no chunks");
    std::vector<std::vector<std::string>> docs;
    docs.reserve(idx.chunks_.size());
    for (const auto& c : idx.chunks_) docs.push_back(c.tokens);
    idx.model_ = tfidf::Model::fit(docs);
    idx.finish();
    return idx;
}

void TfIdfIndex::save(const std::filesystem::path& file) const {
    write_file(file, to_json().dump(2) + "\n");
}

TfIdfIndex TfIdfIndex::load(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse index cache " + file.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace ragbench

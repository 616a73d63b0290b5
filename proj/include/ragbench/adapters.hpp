#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/judge.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/synth.hpp"

namespace ragbench {

// What a deployed retrieval system is willing to show us.
struct AdapterCapabilities {
    bool exposes_sources = false;  // returns source attributions
    bool exposes_context = false;  // returns the retrieved passages
};

struct RagQuery {
    std::string qa_id;
    std::string question;
};

struct RagResponse {
    std::string answer;
    std::vector<std::string> sources;
    std::string context;  // retrieved passages, when exposed
};

class RagAdapter {
public:
    virtual ~RagAdapter() = default;
    virtual RagResponse query(const RagQuery& q) = 0;
    virtual const std::string& name() const = 0;
    virtual AdapterCapabilities capabilities() const = 0;
};

struct AdapterConfig {
    std::string name;
    std::string kind = "openai_compat";  // or "stub"
    std::string provider;                // provider name for openai_compat
    bool exposes_sources = false;
    bool exposes_context = false;
    std::string system_prompt;
    nlohmann::json script;  // stub only
    std::string script_path;

    static AdapterConfig from_json(const std::string& name, const nlohmann::json& j);
};

struct AdapterRegistry {
    std::map<std::string, AdapterConfig> adapters;
    static AdapterRegistry from_json(const nlohmann::json& j);
    const AdapterConfig& require(const std::string& name) const;
};

// Fronts any OpenAI-style chat endpoint as the system under test. Sources and
// context are only reported if the endpoint returns them in the message.
class OpenAiCompatAdapter : public RagAdapter {
public:
    OpenAiCompatAdapter(AdapterConfig config, std::unique_ptr<ChatClient> client);
    RagResponse query(const RagQuery& q) override;
    const std::string& name() const override { return config_.name; }
    AdapterCapabilities capabilities() const override;

private:
    AdapterConfig config_;
    std::unique_ptr<ChatClient> client_;
};

// Scripted adapter for tests and offline demos. Rules fire top-down on a
// question substring match; "{question}" in the answer template is replaced.
class StubRagAdapter : public RagAdapter {
public:
    StubRagAdapter(std::string name, nlohmann::json script,
                   AdapterCapabilities caps);
    RagResponse query(const RagQuery& q) override;
    const std::string& name() const override { return name_; }
    AdapterCapabilities capabilities() const override { return caps_; }

private:
    std::string name_;
    AdapterCapabilities caps_;
    nlohmann::json rules_;
    mutable std::mutex mu_;
    int calls_ = 0;
};

std::unique_ptr<RagAdapter> make_adapter(const AdapterConfig& config,
                                         const ProviderRegistry& providers,
                                         const std::filesystem::path& base_dir = {});

// One adapter call plus the bookkeeping evaluation needs.
struct AdapterResult {
    RagQuery query;
    RagResponse response;
    bool ok = true;
    std::string error;
    bool context_available = false;  // retrieved context usable for judging
    bool heuristic_used = false;     // opaque system: context use inferred
    ContextDetection heuristic;
};

// Queries the system under test; provider failures become failure records
// instead of aborting the run. For systems exposing neither sources nor
// context, context use is inferred from the answer text itself.
AdapterResult query_rag(RagAdapter& adapter, const RagQuery& q,
                        const KnowledgeBase* kb, const ContextHeuristic& h = {});

// ---- gold-context injection (reference mode) ---------------------------------

struct GoldContext {
    std::string text;
    int tokens = 0;
    int dropped_segments = 0;
    std::string warning;
};

// Rebuilds the bundle text under a token ceiling by dropping distractor
// segments from the end; evidence segments are never dropped, even if that
// leaves the text over the ceiling (which is flagged in the warning).
GoldContext inject_gold_context(const ContextBundle& bundle, int max_tokens);

// Prompt for answering from injected gold context with a plain chat model.
std::string render_gold_prompt(const std::string& question,
                               const std::string& context_text);

}  // namespace ragbench

#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ragbench {

struct ProviderConfig {
    std::string name;
    std::string kind = "openai_compat";  // or "mock"
    std::string base_url;
    std::string model;
    std::string api_key_env;  // env var holding the bearer token; empty = no auth
    bool supports_logprobs = false;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 250;
    int concurrency_limit = 4;
    nlohmann::json script;  // mock only: inline rule script
    std::string script_path;

    static ProviderConfig from_json(const std::string& name, const nlohmann::json& j);
};

struct ProviderRegistry {
    std::map<std::string, ProviderConfig> providers;
    static ProviderRegistry from_json(const nlohmann::json& j);
    const ProviderConfig& require(const std::string& name) const;
};

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    double top_p = 1.0;
    int max_tokens = 1024;
    bool want_logprobs = false;
};

// Probability attached to one integer score value (from token logprobs).
struct ScoreCandidate {
    int value = 0;
    double probability = 0.0;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct CompletionResponse {
    std::string text;
    std::string finish_reason;
    TokenUsage usage;
    std::vector<ScoreCandidate> score_candidates;  // empty unless logprobs parsed
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
    virtual const std::string& name() const = 0;
    virtual bool supports_logprobs() const = 0;
};

// One-shot HTTP client for OpenAI-style /chat/completions endpoints. Maps
// status codes onto the error taxonomy; performs no retries itself.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ProviderConfig config);
    CompletionResponse complete(const CompletionRequest& req) override;
    const std::string& name() const override { return config_.name; }
    bool supports_logprobs() const override { return config_.supports_logprobs; }

private:
    ProviderConfig config_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // path portion of base_url
};

// Decorator that retries rate-limit, server, and transport failures with
// exponential backoff. Auth and malformed-response errors surface immediately.
class RetryingChatClient : public ChatClient {
public:
    RetryingChatClient(std::unique_ptr<ChatClient> inner, int max_retries,
                       int backoff_ms);
    CompletionResponse complete(const CompletionRequest& req) override;
    const std::string& name() const override { return inner_->name(); }
    bool supports_logprobs() const override { return inner_->supports_logprobs(); }
    int retries_used() const { return retries_used_.load(); }

private:
    std::unique_ptr<ChatClient> inner_;
    int max_retries_;
    int backoff_ms_;
    std::atomic<int> retries_used_{0};
};

// Scripted stand-in for a chat endpoint. The script is an ordered rule list;
// each call walks the rules top-down and the first live, matching rule fires.
//
// Rule fields:
//   kind:  "fixed"      -> returns "text"
//          "sequence"   -> returns next entry of "texts" (exhausts at the end
//                          unless "cycle": true)
//          "unique_qa"  -> fabricates a fresh grounded question/answer JSON
//                          object from the context in the prompt
//          "judge_score"-> reads "METRIC: <name>" from the prompt and answers
//                          "SCORE: <k>" per "scores" (number or {score: prob}
//                          map; key "*" is the fallback metric entry)
//          "fail"       -> throws "error": auth | rate_limit | server |
//                          transport | malformed
//   match: optional substring the last user message must contain
//   uses:  optional max number of firings (default: unlimited; "fail" also
//          honors "times" as an alias)
//   score_candidates: optional {score: prob} map attached to the response
class MockChatClient : public ChatClient {
public:
    MockChatClient(std::string name, nlohmann::json script);
    CompletionResponse complete(const CompletionRequest& req) override;
    const std::string& name() const override { return name_; }
    bool supports_logprobs() const override { return supports_logprobs_; }

    std::vector<CompletionRequest> calls() const;

private:
    struct Rule {
        nlohmann::json spec;
        int uses_left = -1;  // -1 = unlimited
        std::size_t sequence_pos = 0;
    };

    CompletionResponse fire(Rule& rule, const CompletionRequest& req);

    std::string name_;
    bool supports_logprobs_ = false;
    std::vector<Rule> rules_;
    std::vector<CompletionRequest> calls_;
    int unique_counter_ = 0;
    mutable std::mutex mu_;
};

// Builds the client a provider config describes; HTTP providers are wrapped
// in the retry decorator. `base_dir` anchors relative mock script paths.
std::unique_ptr<ChatClient> make_client(const ProviderConfig& config,
                                        const std::filesystem::path& base_dir = {});

}  // namespace ragbench

#include "ragbench/llm.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "ragbench/errors.hpp"
#include "ragbench/text.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

// ---- configuration ---------------------------------------------------------

ProviderConfig ProviderConfig::from_json(const std::string& name,
                                         const nlohmann::json& j) {
    ProviderConfig c;
    c.name = name;
    try {
        c.kind = j.value("kind", std::string("openai_compat"));
        c.base_url = j.value("base_url", std::string());
        c.model = j.value("model", std::string());
        c.api_key_env = j.value("api_key_env", std::string());
        c.supports_logprobs = j.value("supports_logprobs", false);
        c.timeout_ms = j.value("timeout_ms", 30000);
        c.max_retries = j.value("max_retries", 3);
        c.backoff_ms = j.value("backoff_ms", 250);
        c.concurrency_limit = j.value("concurrency_limit", 4);
        if (j.contains("script")) c.script = j.at("script");
        c.script_path = j.value("script_path", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad provider config '" + name + "': " + e.what());
    }
    if (c.kind != "openai_compat" && c.kind != "mock")
        throw ConfigError("provider '" + name + "': unknown kind '" + c.kind + "'");
    if (c.kind == "openai_compat" && c.base_url.empty())
        throw ConfigError("provider '" + name + "' needs a base_url");
    if (c.kind == "mock" && c.script.is_null() && c.script_path.empty())
        throw ConfigError("provider '" + name + "' needs a script or script_path");
    if (c.timeout_ms <= 0 || c.max_retries < 0 || c.backoff_ms < 0 ||
        c.concurrency_limit <= 0)
        throw ConfigError("provider '" + name + "' has out-of-range limits");
    return c;
}

ProviderRegistry ProviderRegistry::from_json(const nlohmann::json& j) {
    ProviderRegistry r;
    if (!j.is_object()) throw ConfigError("provider registry must be a JSON object");
    const nlohmann::json& root = j.contains("providers") ? j.at("providers") : j;
    if (!root.is_object())
        throw ConfigError("\"providers\" must be a JSON object");
    for (const auto& [name, spec] : root.items())
        r.providers.emplace(name, ProviderConfig::from_json(name, spec));
    return r;
}

const ProviderConfig& ProviderRegistry::require(const std::string& name) const {
    auto it = providers.find(name);
    if (it == providers.end()) throw LookupError("unknown provider: " + name);
    return it->second;
}

// ---- HTTP client ------------------------------------------------------------

namespace {

// "http://host:port/v1" -> ("http://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("base_url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

bool parse_score_token(const std::string& raw, int& out) {
    std::size_t b = 0, e = raw.size();
    while (b < e && !std::isdigit(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && !std::isdigit(static_cast<unsigned char>(raw[e - 1]))) --e;
    if (b == e || e - b > 2) return false;
    for (std::size_t i = b; i < e; ++i)
        if (!std::isdigit(static_cast<unsigned char>(raw[i]))) return false;
    // Reject tokens like "a1b" where digits are interior decoration.
    for (std::size_t i = 0; i < b; ++i)
        if (std::isalnum(static_cast<unsigned char>(raw[i]))) return false;
    for (std::size_t i = e; i < raw.size(); ++i)
        if (std::isalnum(static_cast<unsigned char>(raw[i]))) return false;
    int v = std::stoi(raw.substr(b, e - b));
    if (v < 0 || v > 10) return false;
    out = v;
    return true;
}

// Pull a probability distribution over integer scores from the logprobs of
// the last score-like token in the completion.
std::vector<ScoreCandidate> candidates_from_logprobs(const nlohmann::json& choice) {
    if (!choice.contains("logprobs") || choice.at("logprobs").is_null()) return {};
    const auto& lp = choice.at("logprobs");
    if (!lp.contains("content") || !lp.at("content").is_array()) return {};
    const auto& content = lp.at("content");
    for (auto it = content.rbegin(); it != content.rend(); ++it) {
        int score = 0;
        std::string tok = it->value("token", std::string());
        if (!parse_score_token(tok, score)) continue;
        std::vector<ScoreCandidate> out;
        double total = 0.0;
        if (it->contains("top_logprobs") && it->at("top_logprobs").is_array()) {
            for (const auto& alt : it->at("top_logprobs")) {
                int v = 0;
                if (!parse_score_token(alt.value("token", std::string()), v)) continue;
                double p = std::exp(alt.value("logprob", -1e9));
                bool merged = false;
                for (auto& c : out)
                    if (c.value == v) { c.probability += p; merged = true; break; }
                if (!merged) out.push_back({v, p});
                total += p;
            }
        }
        if (out.empty()) return {{score, 1.0}};
        for (auto& c : out) c.probability /= total;
        return out;
    }
    return {};
}

}  // namespace

HttpChatClient::HttpChatClient(ProviderConfig config) : config_(std::move(config)) {
    std::tie(host_, path_prefix_) = split_base_url(config_.base_url);
}

CompletionResponse HttpChatClient::complete(const CompletionRequest& req) {
    std::string token;
    if (!config_.api_key_env.empty()) {
        const char* v = std::getenv(config_.api_key_env.c_str());
        if (!v || !*v)
            throw AuthError("API key environment variable '" + config_.api_key_env +
                            "' is not set");
        token = v;
    }

    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json body = {{"model", config_.model},
                           {"messages", std::move(messages)},
                           {"temperature", req.temperature},
                           {"top_p", req.top_p},
                           {"max_tokens", req.max_tokens}};
    bool want_lp = req.want_logprobs && config_.supports_logprobs;
    if (want_lp) {
        body["logprobs"] = true;
        body["top_logprobs"] = 10;
    }

    httplib::Client cli(host_);
    cli.set_connection_timeout(config_.timeout_ms / 1000,
                               (config_.timeout_ms % 1000) * 1000);
    cli.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    cli.set_write_timeout(config_.timeout_ms / 1000,
                          (config_.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                        "application/json");
    if (!res)
        throw TransportError("no response from " + host_ + " (" +
                             httplib::to_string(res.error()) + ")");

    const int status = res->status;
    auto snippet = [&res]() {
        std::string s = res->body.substr(0, 200);
        for (char& ch : s)
            if (ch == '\n' || ch == '\r') ch = ' ';
        return s;
    };
    if (status == 401 || status == 403)
        throw AuthError("provider rejected credentials (HTTP " +
                            std::to_string(status) + "): " + snippet(),
                        status);
    if (status == 429)
        throw RateLimitError("provider rate limit (HTTP 429): " + snippet(), status);
    if (status >= 500)
        throw ServerError("provider server error (HTTP " + std::to_string(status) +
                              "): " + snippet(),
                          status);
    if (status != 200)
        throw LlmError("unexpected HTTP status " + std::to_string(status) + ": " +
                           snippet(),
                       status);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what(),
                                     res->body);
    }
    try {
        const auto& choices = j.at("choices");
        if (!choices.is_array() || choices.empty())
            throw MalformedResponseError("response has no choices", res->body);
        const auto& choice = choices.at(0);
        CompletionResponse out;
        out.text = choice.at("message").at("content").get<std::string>();
        out.finish_reason = choice.value("finish_reason", std::string());
        if (j.contains("usage")) {
            out.usage.prompt_tokens = j.at("usage").value("prompt_tokens", 0);
            out.usage.completion_tokens = j.at("usage").value("completion_tokens", 0);
        }
        if (want_lp) out.score_candidates = candidates_from_logprobs(choice);
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponseError(
            std::string("response missing required fields: ") + e.what(), res->body);
    }
}

// ---- retry decorator --------------------------------------------------------

RetryingChatClient::RetryingChatClient(std::unique_ptr<ChatClient> inner,
                                       int max_retries, int backoff_ms)
    : inner_(std::move(inner)), max_retries_(max_retries), backoff_ms_(backoff_ms) {}

CompletionResponse RetryingChatClient::complete(const CompletionRequest& req) {
    for (int attempt = 0;; ++attempt) {
        try {
            return inner_->complete(req);
        } catch (const AuthError&) {
            throw;
        } catch (const MalformedResponseError&) {
            throw;
        } catch (const RateLimitError&) {
            if (attempt >= max_retries_) throw;
        } catch (const ServerError&) {
            if (attempt >= max_retries_) throw;
        } catch (const TransportError&) {
            if (attempt >= max_retries_) throw;
        }
        ++retries_used_;
        if (backoff_ms_ > 0) {
            auto delay = std::chrono::milliseconds(backoff_ms_ << attempt);
            std::this_thread::sleep_for(delay);
        }
    }
}

// ---- scripted mock ----------------------------------------------------------

namespace {

const char* kNato[] = {"alfa",    "bravo",   "charlie", "delta",  "echo",
                       "foxtrot", "golf",    "hotel",   "india",  "juliett",
                       "kilo",    "lima",    "mike",    "november", "oscar",
                       "papa",    "quebec",  "romeo",   "sierra", "tango",
                       "uniform", "victor",  "whiskey", "xray",   "yankee",
                       "zulu"};

std::string last_user_content(const CompletionRequest& req) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it)
        if (it->role == "user") return it->content;
    return req.messages.empty() ? std::string() : req.messages.back().content;
}

std::string context_of(const std::string& prompt) {
    const std::string start = "--- CONTEXT START ---";
    const std::string end = "--- CONTEXT END ---";
    auto b = prompt.find(start);
    auto e = prompt.rfind(end);
    if (b == std::string::npos || e == std::string::npos || e <= b) return prompt;
    b += start.size();
    return prompt.substr(b, e - b);
}

int approx_tokens(const std::string& s) {
    return static_cast<int>(tokenize(s).size());
}

std::vector<ScoreCandidate> candidates_from_spec(const nlohmann::json& spec) {
    std::vector<ScoreCandidate> out;
    if (spec.is_number()) {
        double t = spec.get<double>();
        int f = static_cast<int>(std::floor(t));
        double frac = t - f;
        if (frac < 1e-12) return {{f, 1.0}};
        return {{f, 1.0 - frac}, {f + 1, frac}};
    }
    if (spec.is_object()) {
        for (const auto& [k, v] : spec.items())
            out.push_back({std::stoi(k), v.get<double>()});
        return out;
    }
    throw MockScriptError("score spec must be a number or an object");
}

int argmax_score(const std::vector<ScoreCandidate>& cands) {
    int best = 0;
    double best_p = -1.0;
    for (const auto& c : cands)
        if (c.probability > best_p ||
            (c.probability == best_p && c.value > best)) {
            best_p = c.probability;
            best = c.value;
        }
    return best;
}

}  // namespace

MockChatClient::MockChatClient(std::string name, nlohmann::json script)
    : name_(std::move(name)) {
    if (script.is_array()) script = nlohmann::json{{"rules", script}};
    if (!script.is_object() || !script.contains("rules") ||
        !script.at("rules").is_array())
        throw ConfigError("mock script for '" + name_ +
                          "' must contain a \"rules\" array");
    supports_logprobs_ = script.value("supports_logprobs", false);
    for (const auto& spec : script.at("rules")) {
        Rule r;
        r.spec = spec;
        std::string kind = spec.value("kind", std::string());
        if (kind == "fail")
            r.uses_left = spec.value("times", spec.value("uses", 1));
        else
            r.uses_left = spec.value("uses", -1);
        rules_.push_back(std::move(r));
    }
}

std::vector<CompletionRequest> MockChatClient::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

CompletionResponse MockChatClient::complete(const CompletionRequest& req) {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back(req);
    const std::string prompt = last_user_content(req);
    for (auto& rule : rules_) {
        if (rule.uses_left == 0) continue;
        std::string kind = rule.spec.value("kind", std::string());
        if (kind == "sequence") {
            const auto& texts = rule.spec.at("texts");
            if (rule.sequence_pos >= texts.size() && !rule.spec.value("cycle", false))
                continue;
        }
        if (rule.spec.contains("match") &&
            prompt.find(rule.spec.at("match").get<std::string>()) == std::string::npos)
            continue;
        if (rule.uses_left > 0) --rule.uses_left;
        return fire(rule, req);
    }
    throw MockScriptError("mock '" + name_ + "' has no rule for request (call " +
                          std::to_string(calls_.size()) + ")");
}

CompletionResponse MockChatClient::fire(Rule& rule, const CompletionRequest& req) {
    const std::string kind = rule.spec.value("kind", std::string());
    const std::string prompt = last_user_content(req);
    CompletionResponse out;
    out.finish_reason = rule.spec.value("finish_reason", std::string("stop"));
    out.usage.prompt_tokens = approx_tokens(prompt);

    if (kind == "fixed") {
        out.text = rule.spec.value("text", std::string());
    } else if (kind == "sequence") {
        const auto& texts = rule.spec.at("texts");
        std::size_t i = rule.sequence_pos % texts.size();
        ++rule.sequence_pos;
        out.text = texts.at(i).get<std::string>();
    } else if (kind == "unique_qa") {
        int n = unique_counter_++;
        std::string context = context_of(prompt);
        auto toks = tokenize(context);
        std::vector<std::string> words;
        std::set<std::string> seen;
        for (const auto& t : toks) {
            if (stopwords().count(t) || t.size() < 3) continue;
            if (seen.insert(t).second) words.push_back(t);
        }
        if (words.empty()) words.push_back("context");
        std::vector<std::string> w;
        std::set<std::string> picked;
        for (std::size_t j = 0; w.size() < 4; ++j) {
            const std::string& cand = words[(static_cast<std::size_t>(n) * 7 + j) %
                                            words.size()];
            if (picked.insert(cand).second) w.push_back(cand);
            if (j > words.size() + 8) break;
        }
        while (w.size() < 4) w.push_back(w.empty() ? "context" : w.front());
        std::string nato = kNato[n % 26];
        std::string tag = "q" + std::to_string(n + 1);
        std::string question;
        if (prompt.find("Fill-in-blank") != std::string::npos) {
            question = "The passage pairs " + w[0] + " with ____ (" + nato + " " +
                       tag + ").";
        } else if (prompt.find("Multiple choice") != std::string::npos) {
            question = "Which term accompanies " + w[0] + "? (A) " + w[1] + " (B) " +
                       w[2] + " (C) " + w[3] + " (D) unrelated (" + nato + " " + tag +
                       ")?";
        } else if (prompt.find("True/False") != std::string::npos) {
            question = "True or false: the passage treats " + w[0] +
                       " together with " + w[1] + " (" + nato + " " + tag + ")?";
        } else if (prompt.find("STYLE: Math") != std::string::npos) {
            question = "How does the passage combine " + w[0] + " with " + w[1] +
                       " (" + nato + " " + tag + ")?";
        } else {
            static const char* stems[] = {"What does the passage say about ",
                                          "Why does the passage relate ",
                                          "How are the mentions of "};
            question = std::string(stems[n % 3]) + w[0] + " and " + w[1] + " (" +
                       nato + " " + tag + ")?";
        }
        std::string gt = "It concerns " + w[0] + " " + w[1] + " " + w[2] + " " + w[3] + ".";
        out.text = nlohmann::json{{"question", question}, {"ground_truth", gt}}.dump();
    } else if (kind == "judge_score") {
        std::string metric;
        auto mpos = prompt.find("METRIC:");
        if (mpos != std::string::npos) {
            mpos += 7;
            while (mpos < prompt.size() && prompt[mpos] == ' ') ++mpos;
            auto endpos = prompt.find_first_of(" \r\n", mpos);
            metric = prompt.substr(mpos, endpos == std::string::npos
                                             ? std::string::npos
                                             : endpos - mpos);
        }
        const auto& scores = rule.spec.at("scores");
        const nlohmann::json* spec = nullptr;
        if (!metric.empty() && scores.contains(metric)) spec = &scores.at(metric);
        else if (scores.contains("*")) spec = &scores.at("*");
        if (!spec)
            throw MockScriptError("mock '" + name_ + "' has no score for metric '" +
                                  metric + "'");
        auto cands = candidates_from_spec(*spec);
        out.score_candidates = cands;
        out.text = "SCORE: " + std::to_string(argmax_score(cands));
    } else if (kind == "fail") {
        std::string err = rule.spec.value("error", std::string("server"));
        int status = rule.spec.value("status", 0);
        if (err == "auth") throw AuthError("mock auth failure", status ? status : 401);
        if (err == "rate_limit")
            throw RateLimitError("mock rate limit", status ? status : 429);
        if (err == "server") throw ServerError("mock server error", status ? status : 500);
        if (err == "transport") throw TransportError("mock transport failure");
        if (err == "malformed")
            throw MalformedResponseError("mock malformed response",
                                         rule.spec.value("body", std::string("{")));
        throw MockScriptError("mock '" + name_ + "': unknown error kind '" + err + "'");
    } else {
        throw MockScriptError("mock '" + name_ + "': unknown rule kind '" + kind + "'");
    }

    if (rule.spec.contains("score_candidates") && out.score_candidates.empty())
        out.score_candidates = candidates_from_spec(rule.spec.at("score_candidates"));
    out.usage.completion_tokens = approx_tokens(out.text);
    return out;
}

// ---- factory ----------------------------------------------------------------

std::unique_ptr<ChatClient> make_client(const ProviderConfig& config,
                                        const std::filesystem::path& base_dir) {
    if (config.kind == "mock") {
        nlohmann::json script = config.script;
        if (script.is_null()) {
            std::filesystem::path p = config.script_path;
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            try {
                script = nlohmann::json::parse(read_file(p));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("mock script " + p.string() + " is not valid JSON: " +
                                  e.what());
            }
        }
        return std::make_unique<MockChatClient>(config.name, std::move(script));
    }
    auto http = std::make_unique<HttpChatClient>(config);
    return std::make_unique<RetryingChatClient>(std::move(http), config.max_retries,
                                                config.backoff_ms);
}

}  // namespace ragbench

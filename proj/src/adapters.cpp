#include "ragbench/adapters.hpp"

#include <algorithm>

#include "ragbench/errors.hpp"
#include "ragbench/util.hpp"

namespace ragbench {

AdapterConfig AdapterConfig::from_json(const std::string& name,
                                       const nlohmann::json& j) {
    AdapterConfig c;
    c.name = name;
    try {
        c.kind = j.value("kind", std::string("openai_compat"));
        c.provider = j.value("provider", std::string());
        c.exposes_sources = j.value("exposes_sources", false);
        c.exposes_context = j.value("exposes_context", false);
        c.system_prompt = j.value("system_prompt", std::string());
        if (j.contains("script")) c.script = j.at("script");
        c.script_path = j.value("script_path", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad adapter config '" + name + "': " + e.what());
    }
    if (c.kind != "openai_compat" && c.kind != "stub")
        throw ConfigError("adapter '" + name + "': unknown kind '" + c.kind + "'");
    if (c.kind == "openai_compat" && c.provider.empty())
        throw ConfigError("adapter '" + name + "' needs a provider");
    if (c.kind == "stub" && c.script.is_null() && c.script_path.empty())
        throw ConfigError("adapter '" + name + "' needs a script or script_path");
    return c;
}

AdapterRegistry AdapterRegistry::from_json(const nlohmann::json& j) {
    AdapterRegistry r;
    if (!j.is_object()) throw ConfigError("adapter registry must be a JSON object");
    const nlohmann::json& root = j.contains("adapters") ? j.at("adapters") : j;
    if (!root.is_object()) throw ConfigError("\"adapters\" must be a JSON object");
    for (const auto& [name, spec] : root.items())
        r.adapters.emplace(name, AdapterConfig::from_json(name, spec));
    return r;
}

const AdapterConfig& AdapterRegistry::require(const std::string& name) const {
    auto it = adapters.find(name);
    if (it == adapters.end()) throw LookupError("unknown adapter: " + name);
    return it->second;
}

// ---- OpenAI-compatible adapter ------------------------------------------------

OpenAiCompatAdapter::OpenAiCompatAdapter(AdapterConfig config,
                                         std::unique_ptr<ChatClient> client)
    : config_(std::move(config)), client_(std::move(client)) {}

AdapterCapabilities OpenAiCompatAdapter::capabilities() const {
    return {config_.exposes_sources, config_.exposes_context};
}

RagResponse OpenAiCompatAdapter::query(const RagQuery& q) {
    CompletionRequest req;
    if (!config_.system_prompt.empty())
        req.messages.push_back({"system", config_.system_prompt});
    req.messages.push_back({"user", q.question});
    req.temperature = 0.2;
    req.top_p = 1.0;
    req.max_tokens = 1024;
    CompletionResponse resp = client_->complete(req);

    RagResponse out;
    out.answer = resp.text;
    // Some gateways append structured attributions as a trailing JSON object.
    if (config_.exposes_sources || config_.exposes_context) {
        auto b = resp.text.rfind("\n{");
        if (b != std::string::npos) {
            try {
                nlohmann::json extra = nlohmann::json::parse(resp.text.substr(b + 1));
                out.answer = resp.text.substr(0, b);
                if (config_.exposes_sources && extra.contains("sources"))
                    out.sources = extra.at("sources").get<std::vector<std::string>>();
                if (config_.exposes_context && extra.contains("context"))
                    out.context = extra.at("context").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                // trailing braces were part of the prose; keep the full text
            }
        }
    }
    return out;
}

// ---- scripted stub --------------------------------------------------------------

namespace {

std::string replace_placeholder(std::string s, const std::string& key,
                                const std::string& value) {
    std::size_t pos = 0;
    while ((pos = s.find(key, pos)) != std::string::npos) {
        s.replace(pos, key.size(), value);
        pos += value.size();
    }
    return s;
}

}  // namespace

StubRagAdapter::StubRagAdapter(std::string name, nlohmann::json script,
                               AdapterCapabilities caps)
    : name_(std::move(name)), caps_(caps) {
    if (script.is_array()) script = nlohmann::json{{"rules", script}};
    if (!script.is_object() || !script.contains("rules") ||
        !script.at("rules").is_array())
        throw ConfigError("stub adapter '" + name_ +
                          "' script must contain a \"rules\" array");
    rules_ = script.at("rules");
}

RagResponse StubRagAdapter::query(const RagQuery& q) {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
    for (const auto& rule : rules_) {
        if (rule.contains("match") &&
            q.question.find(rule.at("match").get<std::string>()) == std::string::npos)
            continue;
        if (rule.contains("error")) {
            std::string err = rule.at("error").get<std::string>();
            if (err == "transport") throw TransportError("stub transport failure");
            if (err == "server") throw ServerError("stub server error", 500);
            throw LlmError("stub failure: " + err);
        }
        RagResponse out;
        out.answer = replace_placeholder(rule.value("answer", std::string()),
                                         "{question}", q.question);
        out.answer = replace_placeholder(std::move(out.answer), "{qa_id}", q.qa_id);
        if (rule.contains("sources"))
            out.sources = rule.at("sources").get<std::vector<std::string>>();
        out.context = rule.value("context", std::string());
        return out;
    }
    throw MockScriptError("stub adapter '" + name_ + "' has no rule for question: " +
                          q.question.substr(0, 80));
}

std::unique_ptr<RagAdapter> make_adapter(const AdapterConfig& config,
                                         const ProviderRegistry& providers,
                                         const std::filesystem::path& base_dir) {
    if (config.kind == "stub") {
        nlohmann::json script = config.script;
        if (script.is_null()) {
            std::filesystem::path p = config.script_path;
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            try {
                script = nlohmann::json::parse(read_file(p));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("stub script " + p.string() + " is not valid JSON: " +
                                  e.what());
            }
        }
        return std::make_unique<StubRagAdapter>(
            config.name, std::move(script),
            AdapterCapabilities{config.exposes_sources, config.exposes_context});
    }
    auto client = make_client(providers.require(config.provider), base_dir);
    return std::make_unique<OpenAiCompatAdapter>(config, std::move(client));
}

AdapterResult query_rag(RagAdapter& adapter, const RagQuery& q,
                        const KnowledgeBase* kb, const ContextHeuristic& h) {
    AdapterResult r;
    r.query = q;
    try {
        r.response = adapter.query(q);
    } catch (const LlmError& e) {
        r.ok = false;
        r.error = e.what();
        return r;
    } catch (const MockScriptError& e) {
        r.ok = false;
        r.error = e.what();
        return r;
    }
    AdapterCapabilities caps = adapter.capabilities();
    r.context_available = caps.exposes_context && !r.response.context.empty();
    if (!caps.exposes_sources && !caps.exposes_context && kb) {
        r.heuristic_used = true;
        r.heuristic = detect_context_use(*kb, r.response.answer, h);
    }
    return r;
}

// ---- gold-context injection ------------------------------------------------------

GoldContext inject_gold_context(const ContextBundle& bundle, int max_tokens) {
    if (max_tokens <= 0) throw ConfigError("gold context token ceiling must be positive");

    std::vector<const BundleSegment*> kept;
    int total = 0;
    for (const auto& s : bundle.segments) {
        kept.push_back(&s);
        total += s.tokens;
    }

    GoldContext out;
    // Walk distractors from the back until the ceiling is met.
    while (total > max_tokens) {
        bool dropped = false;
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
            if ((*it)->evidence) continue;
            total -= (*it)->tokens;
            kept.erase(std::next(it).base());
            ++out.dropped_segments;
            dropped = true;
            break;
        }
        if (!dropped) break;  // only evidence left
    }
    if (total > max_tokens)
        out.warning = "evidence alone exceeds the gold-context ceiling (" +
                      std::to_string(total) + " > " + std::to_string(max_tokens) +
                      " tokens); kept in full";
    else if (out.dropped_segments > 0)
        out.warning = "dropped " + std::to_string(out.dropped_segments) +
                      " distractor segment(s) to fit the gold-context ceiling";

    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i) out.text += "\n\n";
        out.text += kept[i]->text;
    }
    out.tokens = total;
    return out;
}

std::string render_gold_prompt(const std::string& question,
                               const std::string& context_text) {
    std::string out =
        "Answer the question using only the context below. If the context lacks "
        "the needed information, say so.\n\n";
    out += "--- CONTEXT START ---\n" + context_text + "\n--- CONTEXT END ---\n\n";
    out += "QUESTION: " + question + "\n\n";
    out += "Answer precisely and quote the relevant values from the context.";
    return out;
}

}  // namespace ragbench

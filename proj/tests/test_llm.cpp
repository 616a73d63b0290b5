#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ragbench/errors.hpp"
#include "ragbench/llm.hpp"

using namespace ragbench;
using nlohmann::json;

namespace {

CompletionRequest user_prompt(const std::string& text) {
    CompletionRequest req;
    req.messages.push_back({"user", text});
    return req;
}

}  // namespace

TEST_CASE("provider config validation") {
    auto ok = ProviderConfig::from_json(
        "api", json{{"base_url", "https://api.example.com/v1"}, {"model", "m-1"}});
    CHECK(ok.kind == "openai_compat");
    CHECK(ok.max_retries == 3);
    CHECK(ok.backoff_ms == 250);
    CHECK(ok.timeout_ms == 30000);
    CHECK_FALSE(ok.supports_logprobs);

    // openai_compat without a URL is useless.
    CHECK_THROWS_AS(ProviderConfig::from_json("api", json{{"model", "m"}}),
                    ConfigError);
    // mocks need something to execute.
    CHECK_THROWS_AS(ProviderConfig::from_json("m", json{{"kind", "mock"}}),
                    ConfigError);
    CHECK_THROWS_AS(
        ProviderConfig::from_json("x", json{{"kind", "telepathy"}}), ConfigError);
    CHECK_THROWS_AS(
        ProviderConfig::from_json(
            "api", json{{"base_url", "http://h"}, {"timeout_ms", 0}}),
        ConfigError);
    CHECK_THROWS_AS(
        ProviderConfig::from_json(
            "api", json{{"base_url", "http://h"}, {"max_retries", -1}}),
        ConfigError);
}

TEST_CASE("provider registry accepts both wrapped and bare objects") {
    json wrapped = {{"providers",
                     {{"a", {{"kind", "mock"}, {"script", json::array()}}},
                      {"b", {{"base_url", "http://x"}}}}}};
    auto reg = ProviderRegistry::from_json(wrapped);
    CHECK(reg.providers.size() == 2);
    CHECK(reg.require("a").kind == "mock");
    CHECK_THROWS_AS(reg.require("zzz"), LookupError);

    auto bare = ProviderRegistry::from_json(
        json{{"solo", {{"kind", "mock"}, {"script", json::array()}}}});
    CHECK(bare.providers.count("solo") == 1);

    CHECK_THROWS_AS(ProviderRegistry::from_json(json::array()), ConfigError);
}

TEST_CASE("mock fixed rules and match routing") {
    MockChatClient mock("m", json::array({
                                 json{{"kind", "fixed"},
                                      {"match", "banana"},
                                      {"text", "yellow"}},
                                 json{{"kind", "fixed"}, {"text", "fallback"}},
                             }));
    CHECK(mock.complete(user_prompt("rate the banana please")).text == "yellow");
    CHECK(mock.complete(user_prompt("rate the apple please")).text == "fallback");

    // Matching looks at the last *user* message even when an assistant
    // message follows it.
    CompletionRequest req;
    req.messages.push_back({"user", "banana context"});
    req.messages.push_back({"assistant", "noted"});
    CHECK(mock.complete(req).text == "yellow");

    CHECK(mock.calls().size() == 3);
    CHECK(mock.calls()[0].messages[0].content == "rate the banana please");
}

TEST_CASE("mock uses countdown and sequence rules") {
    MockChatClient mock("m", json::array({
                                 json{{"kind", "fixed"}, {"text", "a"}, {"uses", 2}},
                                 json{{"kind", "sequence"},
                                      {"texts", {"x", "y"}}},
                                 json{{"kind", "fixed"}, {"text", "tail"}},
                             }));
    CHECK(mock.complete(user_prompt("1")).text == "a");
    CHECK(mock.complete(user_prompt("2")).text == "a");
    CHECK(mock.complete(user_prompt("3")).text == "x");
    CHECK(mock.complete(user_prompt("4")).text == "y");
    // The sequence is exhausted; the rule goes silent instead of wrapping.
    CHECK(mock.complete(user_prompt("5")).text == "tail");

    MockChatClient cyc("c", json::array({json{{"kind", "sequence"},
                                              {"texts", {"x", "y"}},
                                              {"cycle", true}}}));
    CHECK(cyc.complete(user_prompt("1")).text == "x");
    CHECK(cyc.complete(user_prompt("2")).text == "y");
    CHECK(cyc.complete(user_prompt("3")).text == "x");

    MockChatClient empty("e", json::array());
    CHECK_THROWS_AS(empty.complete(user_prompt("anything")), MockScriptError);
}

TEST_CASE("mock failure rules throw the full error taxonomy") {
    MockChatClient mock(
        "m", json::array({
                 json{{"kind", "fail"}, {"error", "auth"}},
                 json{{"kind", "fail"}, {"error", "rate_limit"}},
                 json{{"kind", "fail"}, {"error", "server"}, {"status", 503}},
                 json{{"kind", "fail"}, {"error", "transport"}},
                 json{{"kind", "fail"}, {"error", "malformed"}, {"body", "<html>"}},
                 json{{"kind", "fixed"}, {"text", "alive"}},
             }));
    auto req = user_prompt("go");
    CHECK_THROWS_AS(mock.complete(req), AuthError);
    CHECK_THROWS_AS(mock.complete(req), RateLimitError);
    try {
        mock.complete(req);
        FAIL("expected ServerError");
    } catch (const ServerError& e) {
        CHECK(e.status() == 503);
    }
    CHECK_THROWS_AS(mock.complete(req), TransportError);
    try {
        mock.complete(req);
        FAIL("expected MalformedResponseError");
    } catch (const MalformedResponseError& e) {
        CHECK(e.body() == "<html>");
    }
    // Each failure rule fires once by default, so the line recovers.
    CHECK(mock.complete(req).text == "alive");
}

TEST_CASE("mock judge scores carry a probability split") {
    MockChatClient mock(
        "judge", json{{"supports_logprobs", true},
                      {"rules",
                       json::array({json{
                           {"kind", "judge_score"},
                           {"scores",
                            {{"factuality", 6.26},
                             {"relevance", 7},
                             {"spread", {{"4", 0.3}, {"7", 0.7}}},
                             {"*", 3}}}}})}});
    CHECK(mock.supports_logprobs());

    auto r = mock.complete(user_prompt("METRIC: factuality\nrate it"));
    CHECK(r.text == "SCORE: 6");
    REQUIRE(r.score_candidates.size() == 2);
    CHECK(r.score_candidates[0].value == 6);
    CHECK(r.score_candidates[1].value == 7);
    double mean = 0.0;
    for (const auto& c : r.score_candidates) mean += c.value * c.probability;
    CHECK(mean == doctest::Approx(6.26).epsilon(1e-12));

    // Integral spec: single certain candidate.
    auto r2 = mock.complete(user_prompt("METRIC: relevance\nrate it"));
    CHECK(r2.text == "SCORE: 7");
    REQUIRE(r2.score_candidates.size() == 1);
    CHECK(r2.score_candidates[0].value == 7);
    CHECK(r2.score_candidates[0].probability == 1.0);

    // Explicit distribution: text reports the argmax.
    auto r3 = mock.complete(user_prompt("METRIC: spread\nrate it"));
    CHECK(r3.text == "SCORE: 7");

    // Unknown metric falls back to "*".
    CHECK(mock.complete(user_prompt("METRIC: novelty\nrate it")).text == "SCORE: 3");

    MockChatClient strict(
        "s", json::array({json{{"kind", "judge_score"},
                               {"scores", {{"factuality", 5}}}}}));
    CHECK_THROWS_AS(strict.complete(user_prompt("METRIC: novelty\n")),
                    MockScriptError);
}

TEST_CASE("mock unique_qa invents grounded, distinct questions") {
    MockChatClient mock("gen", json::array({json{{"kind", "unique_qa"}}}));
    std::string prompt =
        "QUESTION STYLE: Fill-in-blank. etc\n"
        "--- CONTEXT START ---\n"
        "The etch chamber pressure drifted while the loadlock valve cycled "
        "during overnight maintenance.\n"
        "--- CONTEXT END ---\n"
        "REQUIRED FORMAT: json";

    auto r1 = mock.complete(user_prompt(prompt));
    auto j1 = json::parse(r1.text);
    std::string q1 = j1.at("question").get<std::string>();
    std::string gt1 = j1.at("ground_truth").get<std::string>();
    CHECK(q1.find("____") != std::string::npos);
    CHECK(q1.find("(alfa q1)") != std::string::npos);
    CHECK(gt1.rfind("It concerns ", 0) == 0);
    // Every content word in the answer comes from the supplied context.
    for (const auto& w : {"etch", "chamber", "pressure", "drifted"})
        CHECK(gt1.find(w) != std::string::npos);

    auto r2 = mock.complete(user_prompt(prompt));
    auto j2 = json::parse(r2.text);
    std::string q2 = j2.at("question").get<std::string>();
    CHECK(q2.find("(bravo q2)") != std::string::npos);
    CHECK(q1 != q2);
}

TEST_CASE("fixed rules can attach score candidates") {
    MockChatClient mock(
        "m", json::array({json{{"kind", "fixed"},
                               {"text", "SCORE: 8"},
                               {"score_candidates", {{"8", 0.9}, {"7", 0.1}}}}}));
    auto r = mock.complete(user_prompt("x"));
    REQUIRE(r.score_candidates.size() == 2);
    CHECK(r.usage.completion_tokens == 2);
}

TEST_CASE("retry decorator") {
    auto transient = std::make_unique<MockChatClient>(
        "m", json::array({
                 json{{"kind", "fail"}, {"error", "rate_limit"}, {"times", 2}},
                 json{{"kind", "fixed"}, {"text", "finally"}},
             }));
    RetryingChatClient retry(std::move(transient), 3, 1);
    CHECK(retry.complete(user_prompt("x")).text == "finally");
    CHECK(retry.retries_used() == 2);

    auto locked = std::make_unique<MockChatClient>(
        "m", json::array({json{{"kind", "fail"}, {"error", "auth"}}}));
    RetryingChatClient no_retry(std::move(locked), 3, 1);
    CHECK_THROWS_AS(no_retry.complete(user_prompt("x")), AuthError);
    CHECK(no_retry.retries_used() == 0);

    auto garbled = std::make_unique<MockChatClient>(
        "m", json::array({json{{"kind", "fail"}, {"error", "malformed"}}}));
    RetryingChatClient no_retry2(std::move(garbled), 3, 1);
    CHECK_THROWS_AS(no_retry2.complete(user_prompt("x")), MalformedResponseError);
    CHECK(no_retry2.retries_used() == 0);

    auto hopeless = std::make_unique<MockChatClient>(
        "m", json::array({json{{"kind", "fail"}, {"error", "server"}, {"times", 10}}}));
    RetryingChatClient exhausted(std::move(hopeless), 2, 1);
    CHECK_THROWS_AS(exhausted.complete(user_prompt("x")), ServerError);
    CHECK(exhausted.retries_used() == 2);
}

TEST_CASE("client factory") {
    ProviderConfig mock_cfg;
    mock_cfg.name = "m";
    mock_cfg.kind = "mock";
    mock_cfg.script = json::array({json{{"kind", "fixed"}, {"text", "hi"}}});
    auto c = make_client(mock_cfg);
    CHECK(c->name() == "m");
    CHECK(c->complete(user_prompt("x")).text == "hi");

    // Relative script paths resolve against the supplied base directory.
    auto dir = std::filesystem::temp_directory_path() / "ragbench_llm_scripts";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "s.json");
        out << R"([{"kind":"fixed","text":"from file"}])";
    }
    ProviderConfig file_cfg;
    file_cfg.name = "f";
    file_cfg.kind = "mock";
    file_cfg.script_path = "s.json";
    auto fc = make_client(file_cfg, dir);
    CHECK(fc->complete(user_prompt("x")).text == "from file");

    {
        std::ofstream out(dir / "bad.json");
        out << "not json at all {";
    }
    ProviderConfig bad_cfg = file_cfg;
    bad_cfg.script_path = "bad.json";
    CHECK_THROWS_AS(make_client(bad_cfg, dir), ConfigError);
    std::filesystem::remove_all(dir);
}

// ---- live HTTP path against an in-process server ---------------------------

namespace {

struct TestServer {
    httplib::Server svr;
    std::thread th;
    int port = 0;
    std::atomic<int> hits{0};
    json last_body;
    std::string last_auth;

    TestServer() {
        svr.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                     ++hits;
                     last_body = json::parse(req.body, nullptr, false);
                     last_auth = req.get_header_value("Authorization");
                     std::string model =
                         last_body.is_object() ? last_body.value("model", "") : "";
                     if (model == "fail-401") {
                         res.status = 401;
                         res.set_content("{\"error\":\"bad key\"}", "application/json");
                         return;
                     }
                     if (model == "fail-429") {
                         res.status = 429;
                         res.set_content("slow down", "text/plain");
                         return;
                     }
                     if (model == "fail-500") {
                         res.status = 500;
                         res.set_content("boom", "text/plain");
                         return;
                     }
                     if (model == "fail-418") {
                         res.status = 418;
                         res.set_content("teapot", "text/plain");
                         return;
                     }
                     if (model == "not-json") {
                         res.status = 200;
                         res.set_content("<html>totally not json</html>",
                                         "text/html");
                         return;
                     }
                     if (model == "no-choices") {
                         res.status = 200;
                         res.set_content(R"({"choices":[]})", "application/json");
                         return;
                     }
                     json reply = {
                         {"choices",
                          json::array(
                              {{{"message", {{"role", "assistant"},
                                             {"content", "SCORE: 7"}}},
                                {"finish_reason", "stop"},
                                {"logprobs",
                                 {{"content",
                                   json::array(
                                       {{{"token", "SCORE"}, {"logprob", -0.01}},
                                        {{"token", " 7"},
                                         {"logprob", -0.35667},
                                         {"top_logprobs",
                                          json::array(
                                              {{{"token", " 7"},
                                                {"logprob", std::log(0.7)}},
                                               {{"token", " 6"},
                                                {"logprob", std::log(0.3)}},
                                               {{"token", " the"},
                                                {"logprob", std::log(0.01)}}})}}})}}}}})},
                         {"usage",
                          {{"prompt_tokens", 11}, {"completion_tokens", 2}}}};
                     res.status = 200;
                     res.set_content(reply.dump(), "application/json");
                 });
        port = svr.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~TestServer() {
        svr.stop();
        th.join();
    }

    ProviderConfig cfg(const std::string& model) const {
        ProviderConfig c;
        c.name = "live";
        c.kind = "openai_compat";
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        c.model = model;
        c.supports_logprobs = true;
        c.timeout_ms = 5000;
        return c;
    }
};

}  // namespace

TEST_CASE("http client round trip with logprob score parsing") {
    TestServer server;
    ::setenv("RAGBENCH_TEST_KEY", "sekret", 1);
    auto cfg = server.cfg("good-model");
    cfg.api_key_env = "RAGBENCH_TEST_KEY";
    HttpChatClient client(cfg);

    CompletionRequest req = user_prompt("METRIC: factuality\nrate this");
    req.messages.insert(req.messages.begin(), {"system", "be terse"});
    req.temperature = 0.3;
    req.top_p = 0.95;
    req.max_tokens = 64;
    req.want_logprobs = true;

    auto resp = client.complete(req);
    CHECK(resp.text == "SCORE: 7");
    CHECK(resp.finish_reason == "stop");
    CHECK(resp.usage.prompt_tokens == 11);
    CHECK(resp.usage.completion_tokens == 2);
    REQUIRE(resp.score_candidates.size() == 2);
    // " the" is not a score token; 0.7 / 0.3 renormalize over themselves.
    CHECK(resp.score_candidates[0].value == 7);
    CHECK(resp.score_candidates[0].probability == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(resp.score_candidates[1].value == 6);
    CHECK(resp.score_candidates[1].probability == doctest::Approx(0.3).epsilon(1e-9));

    // The wire request carried everything the config and request specified.
    CHECK(server.last_auth == "Bearer sekret");
    CHECK(server.last_body.at("model") == "good-model");
    CHECK(server.last_body.at("temperature").get<double>() ==
          doctest::Approx(0.3).epsilon(1e-12));
    CHECK(server.last_body.at("top_p").get<double>() ==
          doctest::Approx(0.95).epsilon(1e-12));
    CHECK(server.last_body.at("max_tokens") == 64);
    CHECK(server.last_body.at("logprobs") == true);
    CHECK(server.last_body.at("messages").size() == 2);
    CHECK(server.last_body.at("messages")[0].at("role") == "system");
}

TEST_CASE("http client maps status codes onto the error taxonomy") {
    TestServer server;

    auto attempt = [&](const std::string& model) {
        HttpChatClient client(server.cfg(model));
        return client.complete(user_prompt("x"));
    };

    CHECK_THROWS_AS(attempt("fail-401"), AuthError);
    CHECK_THROWS_AS(attempt("fail-429"), RateLimitError);
    CHECK_THROWS_AS(attempt("fail-500"), ServerError);
    CHECK_THROWS_AS(attempt("not-json"), MalformedResponseError);
    CHECK_THROWS_AS(attempt("no-choices"), MalformedResponseError);
    try {
        attempt("fail-418");
        FAIL("expected LlmError");
    } catch (const AuthError&) {
        FAIL("418 is not an auth failure");
    } catch (const RateLimitError&) {
        FAIL("418 is not a rate limit");
    } catch (const ServerError&) {
        FAIL("418 is not a server error");
    } catch (const LlmError& e) {
        CHECK(e.status() == 418);
    }
}

TEST_CASE("missing api key fails before any network traffic") {
    TestServer server;
    ::unsetenv("RAGBENCH_TEST_KEY_ABSENT");
    auto cfg = server.cfg("good-model");
    cfg.api_key_env = "RAGBENCH_TEST_KEY_ABSENT";
    HttpChatClient client(cfg);
    int hits_before = server.hits.load();
    CHECK_THROWS_AS(client.complete(user_prompt("x")), AuthError);
    CHECK(server.hits.load() == hits_before);
}

TEST_CASE("unreachable host is a transport error") {
    ProviderConfig cfg;
    cfg.name = "dead";
    cfg.kind = "openai_compat";
    cfg.base_url = "http://127.0.0.1:1/v1";  // nothing listens on port 1
    cfg.model = "m";
    cfg.timeout_ms = 2000;
    HttpChatClient client(cfg);
    CHECK_THROWS_AS(client.complete(user_prompt("x")), TransportError);
}

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "formeval/criteria.hpp"
#include "formeval/errors.hpp"
#include "formeval/judges.hpp"

using namespace formeval;

namespace {

constexpr const char* kVerdictContent =
    "%%%%%%%%%%\nExplanation: served by the test server\nJudgement: True\n%%%%%%%%%%\n";

std::string chat_response(const std::string& content) {
    nlohmann::json message;
    message["role"] = "assistant";
    message["content"] = content;
    nlohmann::json body;
    body["choices"] = nlohmann::json::array({nlohmann::json{{"message", message}}});
    return body.dump();
}

// In-process chat-completions endpoint with scriptable failure behavior.
class TestServer {
public:
    TestServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                last_body_ = req.body;
                last_auth_ = req.get_header_value("Authorization");
            }
            requests_.fetch_add(1);
            const int mode = take_mode();
            switch (mode) {
            case 500:
                res.status = 500;
                res.set_content("upstream exploded", "text/plain");
                return;
            case 404:
                res.status = 404;
                res.set_content("no such route", "text/plain");
                return;
            case 1: // 200 but not JSON
                res.set_content("<html>definitely not json</html>", "text/html");
                return;
            case 2: // 200, JSON, but no choices
                res.set_content("{\"object\": \"chat.completion\"}", "application/json");
                return;
            default:
                res.set_content(chat_response(kVerdictContent), "application/json");
                return;
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~TestServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }

    // Queue a one-shot response mode (500/404/1/2); 0 = normal success.
    void push_mode(int mode) {
        std::lock_guard<std::mutex> lock(mutex_);
        modes_.push_back(mode);
    }

    int requests() const { return requests_.load(); }

    std::string last_body() {
        std::lock_guard<std::mutex> lock(mutex_);
        return last_body_;
    }
    std::string last_auth() {
        std::lock_guard<std::mutex> lock(mutex_);
        return last_auth_;
    }

private:
    int take_mode() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (modes_.empty()) return 0;
        const int mode = modes_.front();
        modes_.erase(modes_.begin());
        return mode;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mutex_;
    std::vector<int> modes_;
    std::string last_body_;
    std::string last_auth_;
    std::atomic<int> requests_{0};
};

HttpJudgeBackend make_client(const TestServer& server, int attempts = 3) {
    HttpBackendOptions options;
    options.endpoint = server.endpoint();
    options.api_key = "test-secret";
    options.transport_attempts = attempts;
    options.backoff_base_seconds = 0.01;
    return HttpJudgeBackend(std::move(options), /*request_timeout_seconds=*/5.0);
}

JudgeRequest sample_request() {
    JudgeRequest request;
    request.prompt = "Evaluate this candidate.";
    request.criterion_id = "Concept";
    request.model = "judge-model-x";
    request.temperature = 0.4;
    return request;
}

} // namespace

TEST_CASE("http backend round trip: payload, auth header, and content") {
    TestServer server;
    HttpJudgeBackend backend = make_client(server);

    const BackendResult result = backend.complete(sample_request());
    REQUIRE(result.ok);
    CHECK(result.raw == kVerdictContent);
    CHECK(server.requests() == 1);
    CHECK(server.last_auth() == "Bearer test-secret");

    const nlohmann::json body = nlohmann::json::parse(server.last_body());
    CHECK(body.at("model") == "judge-model-x");
    CHECK(body.at("temperature").get<double>() == doctest::Approx(0.4));
    REQUIRE(body.at("messages").is_array());
    CHECK(body.at("messages").at(0).at("role") == "user");
    CHECK(body.at("messages").at(0).at("content") == "Evaluate this candidate.");

    CHECK(backend.id() == "http:" + server.endpoint());
    CHECK_FALSE(backend.deterministic());
}

TEST_CASE("http backend retries 5xx and then succeeds") {
    TestServer server;
    server.push_mode(500);
    server.push_mode(500);
    HttpJudgeBackend backend = make_client(server, /*attempts=*/3);

    const BackendResult result = backend.complete(sample_request());
    REQUIRE(result.ok);
    CHECK(result.raw == kVerdictContent);
    CHECK(server.requests() == 3); // two failures + the success
}

TEST_CASE("http backend gives up after exhausting transport attempts") {
    TestServer server;
    server.push_mode(500);
    server.push_mode(500);
    HttpJudgeBackend backend = make_client(server, /*attempts=*/2);

    const BackendResult result = backend.complete(sample_request());
    CHECK_FALSE(result.ok);
    CHECK(result.error.find("HTTP 500") != std::string::npos);
    CHECK(server.requests() == 2);
}

TEST_CASE("http backend fails 4xx immediately without retrying") {
    TestServer server;
    server.push_mode(404);
    HttpJudgeBackend backend = make_client(server, /*attempts=*/3);

    const BackendResult result = backend.complete(sample_request());
    CHECK_FALSE(result.ok);
    CHECK(result.error.find("HTTP 404") != std::string::npos);
    CHECK(server.requests() == 1);
}

TEST_CASE("http backend rejects malformed response bodies") {
    TestServer server;
    HttpJudgeBackend backend = make_client(server);

    server.push_mode(1); // non-JSON body
    const BackendResult bad_json = backend.complete(sample_request());
    CHECK_FALSE(bad_json.ok);
    CHECK(bad_json.error.find("not valid JSON") != std::string::npos);

    server.push_mode(2); // JSON without choices
    const BackendResult no_choices = backend.complete(sample_request());
    CHECK_FALSE(no_choices.ok);
    CHECK(no_choices.error.find("choices") != std::string::npos);
}

TEST_CASE("http backend reports unreachable endpoints as transport errors") {
    HttpBackendOptions options;
    options.endpoint = "http://127.0.0.1:1/v1/chat/completions"; // nothing listens there
    options.api_key = "k";
    options.transport_attempts = 2;
    options.backoff_base_seconds = 0.01;
    HttpJudgeBackend backend(std::move(options), 1.0);

    const BackendResult result = backend.complete(sample_request());
    CHECK_FALSE(result.ok);
    CHECK_FALSE(result.error.empty());
}

TEST_CASE("http backend validates its configuration") {
    HttpBackendOptions no_scheme;
    no_scheme.endpoint = "localhost:8000/api";
    CHECK_THROWS_AS(HttpJudgeBackend(std::move(no_scheme), 5.0), ConfigError);

    HttpBackendOptions zero_attempts;
    zero_attempts.endpoint = "http://x/api";
    zero_attempts.transport_attempts = 0;
    CHECK_THROWS_AS(HttpJudgeBackend(std::move(zero_attempts), 5.0), ConfigError);
}

TEST_CASE("judge_one works end to end over HTTP via make_backend") {
    TestServer server;
    setenv("FORMEVAL_API_KEY", "env-secret", 1);
    JudgeConfig config;
    config.endpoint = server.endpoint();
    config.model_name = "judge-model-x";

    const auto backend = make_backend("http", config);
    const JudgeResult result =
        judge_one(*backend, config, CriteriaRegistry::builtin().oap_criterion(OapId::Concept),
                  FormalLanguage::lean4(), "Squares are nonnegative.",
                  "theorem sq_nonneg (x : R) : 0 <= x^2");
    REQUIRE(result.outcome == JudgeOutcome::Ok);
    CHECK(result.verdict->judgment == 1);
    CHECK(result.verdict->explanation == "served by the test server");
    CHECK(server.last_auth() == "Bearer env-secret");

    // The full rendered prompt is what goes over the wire.
    const nlohmann::json body = nlohmann::json::parse(server.last_body());
    const std::string sent = body.at("messages").at(0).at("content").get<std::string>();
    CHECK(sent.find("Squares are nonnegative.") != std::string::npos);
    CHECK(sent.find("theorem sq_nonneg") != std::string::npos);
    CHECK(sent.find("Lean4") != std::string::npos);
    unsetenv("FORMEVAL_API_KEY");
}

#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fractal/error.hpp"
#include "fractal/remote.hpp"
#include "fractal/series.hpp"

using namespace fractal;
using json = nlohmann::json;

namespace {

// Owns a mock completions server on an ephemeral port.
class MockScorer {
public:
    explicit MockScorer(httplib::Server::Handler handler) {
        server_.Post("/v1/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockScorer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions";
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string echo_body(const std::vector<std::string>& tokens, const std::vector<json>& logprobs) {
    json response;
    response["choices"] = json::array();
    response["choices"].push_back({{"logprobs", {{"tokens", tokens},
                                                 {"token_logprobs", logprobs}}}});
    return response.dump();
}

ScoreConfig base_config(const std::string& endpoint) {
    ScoreConfig config;
    config.endpoint = endpoint;
    config.model = "test-model";
    config.backoff_initial_ms = 1;
    return config;
}

}  // namespace

TEST_CASE("score_remote converts echoed logprobs to a document") {
    std::string seen_auth;
    std::string seen_body;
    MockScorer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        res.set_content(echo_body({"a", "b"}, {-1.0, -2.0}), "application/json");
    });

    auto config = base_config(server.endpoint());
    config.api_key = "secret-key";
    const auto scored = score_remote(config, "doc-1", "testdom", "ab");

    CHECK(scored.retries == 0);
    CHECK(scored.http_status == 200);
    CHECK(scored.doc.doc_id == "doc-1");
    CHECK(scored.doc.domain == "testdom");
    CHECK(scored.doc.logprob_base == LogBase::natural);
    REQUIRE(scored.doc.tokens.size() == 2);
    CHECK(scored.doc.token_bytes == std::vector<std::int64_t>{1, 1});

    const auto bits = to_bits(scored.doc.logprobs, scored.doc.logprob_base);
    CHECK(bits[0] == doctest::Approx(1.4427).epsilon(1e-4));
    CHECK(bits[1] == doctest::Approx(2.8854).epsilon(1e-4));

    CHECK(seen_auth == "Bearer secret-key");
    const auto request = json::parse(seen_body);
    CHECK(request["prompt"] == "ab");
    CHECK(request["echo"] == true);
    CHECK(request["max_tokens"] == 0);
    CHECK(request["logprobs"] == 1);
    CHECK(request["model"] == "test-model");
}

TEST_CASE("score_remote retries through 429 responses") {
    std::atomic<int> calls{0};
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++calls;
        if (n <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        res.set_content(echo_body({"x"}, {-0.5}), "application/json");
    });

    const auto scored = score_remote(base_config(server.endpoint()), "d", "dom", "x");
    CHECK(scored.retries == 2);
    CHECK(calls.load() == 3);
}

TEST_CASE("score_remote drops a null first logprob") {
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(echo_body({"<s>", "a"}, {nullptr, -1.5}), "application/json");
    });
    const auto scored = score_remote(base_config(server.endpoint()), "d", "dom", "a");
    REQUIRE(scored.doc.tokens.size() == 1);
    CHECK(scored.doc.tokens[0] == "a");
    CHECK(scored.doc.logprobs[0] == -1.5);
}

TEST_CASE("score_remote rejects mismatched arrays") {
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(echo_body({"a", "b"}, {-1.0}), "application/json");
    });
    CHECK_THROWS_AS(score_remote(base_config(server.endpoint()), "d", "dom", "ab"),
                    ProtocolError);
}

TEST_CASE("score_remote rejects interior null logprobs") {
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(echo_body({"a", "b", "c"}, {-1.0, nullptr, -1.0}), "application/json");
    });
    CHECK_THROWS_AS(score_remote(base_config(server.endpoint()), "d", "dom", "abc"),
                    ProtocolError);
}

TEST_CASE("score_remote surfaces persistent failures with status and body") {
    std::atomic<int> calls{0};
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    auto config = base_config(server.endpoint());
    config.max_attempts = 2;
    try {
        score_remote(config, "d", "dom", "x");
        FAIL("expected ScoringError");
    } catch (const ScoringError& e) {
        CHECK(e.status == 503);
        CHECK(e.body_excerpt == "overloaded");
        CHECK(calls.load() == 2);
    }
}

TEST_CASE("non-transient HTTP errors do not retry") {
    std::atomic<int> calls{0};
    MockScorer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    CHECK_THROWS_AS(score_remote(base_config(server.endpoint()), "d", "dom", "x"), ScoringError);
    CHECK(calls.load() == 1);
}

TEST_CASE("rate limiter spaces request slots") {
    RateLimiter limiter(200.0);  // 5ms interval
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 4; ++i) limiter.acquire();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() >= 14);

    RateLimiter unlimited(0.0);
    unlimited.acquire();  // no-op
}

#include "fractal/remote.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fractal/error.hpp"

namespace fractal {

namespace {

using json = nlohmann::json;

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/completions
};

SplitUrl split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidInputError("endpoint must include a scheme: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 256;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

Document parse_scored_response(const std::string& body, const std::string& doc_id,
                               const std::string& domain) {
    json obj;
    try {
        obj = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("scoring response is not JSON: ") + e.what());
    }

    const json* lp = nullptr;
    try {
        lp = &obj.at("choices").at(0).at("logprobs");
    } catch (const json::exception&) {
        throw ProtocolError("scoring response missing choices[0].logprobs");
    }

    std::vector<std::string> tokens;
    std::vector<json> raw_logprobs;
    try {
        tokens = lp->at("tokens").get<std::vector<std::string>>();
        raw_logprobs = lp->at("token_logprobs").get<std::vector<json>>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("scoring response logprobs malformed: ") + e.what());
    }
    if (tokens.size() != raw_logprobs.size()) {
        throw ProtocolError("scoring response: tokens and token_logprobs lengths differ (" +
                            std::to_string(tokens.size()) + " vs " +
                            std::to_string(raw_logprobs.size()) + ")");
    }
    if (tokens.empty()) {
        throw ProtocolError("scoring response contains no tokens");
    }

    Document doc;
    doc.doc_id = doc_id;
    doc.domain = domain;
    doc.logprob_base = LogBase::natural;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (raw_logprobs[i].is_null()) {
            if (i == 0) continue;  // first echoed token has no prefix
            throw ProtocolError("scoring response: null logprob at token " + std::to_string(i));
        }
        if (!raw_logprobs[i].is_number()) {
            throw ProtocolError("scoring response: non-numeric logprob at token " +
                                std::to_string(i));
        }
        const double lp_value = raw_logprobs[i].get<double>();
        if (!std::isfinite(lp_value) || lp_value > 0.0) {
            throw ProtocolError("scoring response: logprob at token " + std::to_string(i) +
                                " must be finite and <= 0");
        }
        doc.tokens.push_back(tokens[i]);
        doc.logprobs.push_back(lp_value);
    }
    if (doc.tokens.empty()) {
        throw ProtocolError("scoring response: no usable tokens after dropping null logprobs");
    }
    doc.token_bytes = utf8_byte_counts(doc.tokens);
    return doc;
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_second) {
    if (requests_per_second > 0.0) {
        unlimited_ = false;
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second));
        next_slot_ = std::chrono::steady_clock::now();
    }
}

void RateLimiter::acquire() {
    if (unlimited_) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(next_slot_, now);
        next_slot_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

ScoredDocument score_remote(const ScoreConfig& config, const std::string& doc_id,
                            const std::string& domain, const std::string& text,
                            RateLimiter* limiter) {
    if (config.endpoint.empty()) {
        throw InvalidInputError("score_remote: endpoint is empty");
    }
    const SplitUrl url = split_endpoint(config.endpoint);

    json request;
    request["model"] = config.model;
    request["prompt"] = text;
    request["max_tokens"] = 0;
    request["echo"] = true;
    request["logprobs"] = 1;
    const std::string body = request.dump();

    httplib::Client client(url.base);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
    }

    int last_status = 0;
    std::string last_body = "connection failure";
    const int attempts = std::max(config.max_attempts, 1);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long>(config.backoff_initial_ms) * (1L << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
        if (limiter != nullptr) limiter->acquire();

        auto response = client.Post(url.path, headers, body, "application/json");
        if (!response) {
            last_status = 0;
            last_body = "connection failure: " + httplib::to_string(response.error());
            continue;
        }
        last_status = response->status;
        last_body = response->body;
        if (response->status >= 200 && response->status < 300) {
            ScoredDocument scored;
            scored.doc = parse_scored_response(response->body, doc_id, domain);
            scored.retries = attempt;
            scored.http_status = response->status;
            return scored;
        }
        if (!transient_status(response->status)) break;
    }

    throw ScoringError("scoring failed for document '" + doc_id + "' (status " +
                           std::to_string(last_status) + "): " + excerpt(last_body),
                       last_status, excerpt(last_body));
}

}  // namespace fractal

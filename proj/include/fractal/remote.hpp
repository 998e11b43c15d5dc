#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>

#include "fractal/corpus.hpp"

namespace fractal {

struct ScoreConfig {
    std::string endpoint;  // e.g. http://host:port/v1/completions
    std::string api_key;   // sent as a bearer token when non-empty
    std::string model;
    std::size_t max_tokens = 2048;     // prompt cap advertised to the server
    int max_attempts = 3;              // total tries per document
    int backoff_initial_ms = 250;      // doubles per retry
    double requests_per_second = 0.0;  // 0 = unlimited
    int timeout_seconds = 120;
};

struct ScoredDocument {
    Document doc;
    int retries = 0;  // attempts beyond the first
    int http_status = 0;
};

// Paces request starts to a fixed rate. The one piece of shared mutable
// state in the scoring path; internally synchronized.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    void acquire();

private:
    std::chrono::steady_clock::duration interval_{};
    std::chrono::steady_clock::time_point next_slot_;
    std::mutex mutex_;
    bool unlimited_ = true;
};

// Scores one document via a completions-style HTTP API that echoes the
// prompt with per-token log-probabilities. Transient failures (connection
// errors, 429, 5xx) are retried with exponential backoff; anything still
// failing raises ScoringError. Shape violations raise ProtocolError.
//
// A null log-probability on the first echoed token (no prefix to condition
// on) drops that token; nulls anywhere else are protocol errors.
ScoredDocument score_remote(const ScoreConfig& config, const std::string& doc_id,
                            const std::string& domain, const std::string& text,
                            RateLimiter* limiter = nullptr);

}  // namespace fractal

#pragma once

#include <chrono>
#include <optional>
#include <string>

#include <json.hpp>

#include "citerank/scorer.hpp"

namespace citerank {

struct HttpScorerConfig {
    std::string endpoint;              // e.g. http://127.0.0.1:8000 (an optional path prefix is kept)
    std::optional<std::string> token;  // sent as "Authorization: Bearer <token>"
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{200};  // doubled after every retry
};

/// JSON body for POST /v1/logprob.
nlohmann::json logprob_request_body(const ScoreRequest& request);

/// Client for the logprob wire protocol:
///
///   POST {endpoint}/v1/logprob
///   {"sentences": [{"id": int, "text": str}, ...], "query": str, "history": str, "target": str}
///   200 -> {"logprob": float}, 400 -> invalid request, 503 -> busy
///
/// Timeouts, connection failures and 5xx responses are retried with
/// exponential backoff; a 400 is not.
class HttpScorer final : public Scorer {
public:
    explicit HttpScorer(HttpScorerConfig config);

    LogProb score(const ScoreRequest& request) const override;

    const HttpScorerConfig& config() const noexcept { return config_; }

private:
    LogProb score_once(const std::string& body) const;

    HttpScorerConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace citerank

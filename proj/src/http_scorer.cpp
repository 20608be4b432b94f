#include "citerank/http_scorer.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>

#include "citerank/error.hpp"

namespace citerank {

nlohmann::json logprob_request_body(const ScoreRequest& request) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const SentenceId id : request.retained) sentences.push_back({{"id", id}, {"text", request.ctx[id].text}});
    return {{"sentences", std::move(sentences)},
            {"query", request.query},
            {"history", request.history},
            {"target", request.target}};
}

HttpScorer::HttpScorer(HttpScorerConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InvalidArgument("endpoint must be an http(s) URL: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_begin);
    std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/v1/logprob";
    if (config_.max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
}

LogProb HttpScorer::score(const ScoreRequest& request) const {
    validate_request(request);
    const std::string body = logprob_request_body(request).dump();
    auto backoff = config_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return score_once(body);
        } catch (const ScorerError& e) {
            if (!e.retryable() || attempt >= config_.max_retries) throw;
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
    }
}

LogProb HttpScorer::score_once(const std::string& body) const {
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (config_.token) headers.emplace("Authorization", "Bearer " + *config_.token);

    const auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
        const auto err = res.error();
        const auto kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout)
                              ? ScorerError::Kind::BackendTimeout
                              : ScorerError::Kind::BackendUnavailable;
        throw ScorerError(kind, "logprob request failed: " + httplib::to_string(err));
    }
    if (res->status == 400)
        throw ScorerError(ScorerError::Kind::InvalidRequest, "backend rejected request: " + res->body);
    if (res->status != 200)
        throw ScorerError(ScorerError::Kind::BackendUnavailable, "backend returned HTTP " + std::to_string(res->status));

    const auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("logprob") || !parsed["logprob"].is_number())
        throw ScorerError(ScorerError::Kind::BackendUnavailable, "malformed logprob response: " + res->body);
    const double value = parsed["logprob"].get<double>();
    if (!std::isfinite(value)) throw ScorerError(ScorerError::Kind::BackendUnavailable, "non-finite logprob");
    return {value};
}

}  // namespace citerank

#include "citerank/candidate_source.hpp"

#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "citerank/error.hpp"

namespace citerank {

StaticCandidateSource::StaticCandidateSource(std::map<std::string, std::vector<std::vector<std::string>>> table)
    : table_(std::move(table)) {}

StaticCandidateSource StaticCandidateSource::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open candidate file " + path.string());
    StaticCandidateSource source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            source.add(j.at("doc_id").get<std::string>(), j.at("candidates").get<std::vector<std::vector<std::string>>>());
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return source;
}

void StaticCandidateSource::add(const std::string& doc_id, std::vector<std::vector<std::string>> per_statement) {
    table_[doc_id] = std::move(per_statement);
}

std::vector<std::string> StaticCandidateSource::candidates(const CandidateRequest& request) const {
    const auto it = table_.find(request.doc_id);
    if (it == table_.end() || request.statement_index >= it->second.size()) return {};
    return it->second[request.statement_index];
}

HttpCandidateSource::HttpCandidateSource(SamplingConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InvalidArgument("endpoint must be an http(s) URL: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_begin);
    std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/v1/completions";
}

std::string HttpCandidateSource::build_prompt(const CandidateRequest& request) {
    return render_prompt_context(request.ctx) + "\n\n" + request.query + "\n\n" + request.history + "<statement>" +
           request.statement + "<cite>";
}

std::vector<std::string> HttpCandidateSource::candidates(const CandidateRequest& request) const {
    nlohmann::json body = {{"prompt", build_prompt(request)},
                           {"n", request.n},
                           {"top_p", config_.top_p},
                           {"temperature", config_.temperature},
                           {"max_tokens", config_.max_tokens},
                           {"stop", {"</cite>"}}};
    if (config_.model) body["model"] = *config_.model;

    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    httplib::Headers headers;
    if (config_.token) headers.emplace("Authorization", "Bearer " + *config_.token);
    const auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw ScorerError(ScorerError::Kind::BackendUnavailable, "sampling request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw ScorerError(ScorerError::Kind::BackendUnavailable, "sampling endpoint returned HTTP " + std::to_string(res->status));

    const auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array())
        throw ScorerError(ScorerError::Kind::BackendUnavailable, "malformed completions response");
    std::vector<std::string> out;
    for (const auto& choice : parsed["choices"]) {
        std::string text = choice.value("text", "");
        if (const auto close = text.find("</cite>"); close != std::string::npos) text.resize(close);
        out.push_back(std::move(text));
    }
    return out;
}

}  // namespace citerank

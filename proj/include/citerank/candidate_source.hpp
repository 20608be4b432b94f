#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citerank/segmenter.hpp"

namespace citerank {

/// What a candidate source is asked for: n alternative citation strings for
/// one statement of one response.
struct CandidateRequest {
    const std::string& doc_id;
    const SegmentedContext& ctx;
    const std::string& query;
    const std::string& history;  // serialized statements before this one
    const std::string& statement;
    std::size_t statement_index;
    std::size_t n;
};

/// Supplies citation candidates (bodies like "[1-2][5-5]", with or without
/// <cite> tags). May return fewer or more than n; callers use the first n.
class CandidateSource {
public:
    virtual ~CandidateSource() = default;
    virtual std::vector<std::string> candidates(const CandidateRequest& request) const = 0;
};

/// Pre-sampled candidates keyed by document id and statement index.
///
/// File format, one JSON object per line:
///   {"doc_id": str, "candidates": [[str, ...], ...]}   // one list per statement
class StaticCandidateSource final : public CandidateSource {
public:
    StaticCandidateSource() = default;
    explicit StaticCandidateSource(std::map<std::string, std::vector<std::vector<std::string>>> table);

    static StaticCandidateSource load(const std::filesystem::path& path);

    void add(const std::string& doc_id, std::vector<std::vector<std::string>> per_statement);
    std::vector<std::string> candidates(const CandidateRequest& request) const override;

private:
    std::map<std::string, std::vector<std::vector<std::string>>> table_;
};

/// Wraps a callable; used for synthetic enumerators in tests.
class FunctionCandidateSource final : public CandidateSource {
public:
    using Fn = std::function<std::vector<std::string>(const CandidateRequest&)>;
    explicit FunctionCandidateSource(Fn fn) : fn_(std::move(fn)) {}
    std::vector<std::string> candidates(const CandidateRequest& request) const override { return fn_(request); }

private:
    Fn fn_;
};

struct SamplingConfig {
    std::string endpoint;  // base URL of an OpenAI-compatible completions server
    std::optional<std::string> model;
    std::optional<std::string> token;
    double top_p = 0.9;
    double temperature = 1.2;
    int max_tokens = 64;
    std::chrono::milliseconds timeout{60000};
};

/// Samples candidates live via POST {endpoint}/v1/completions with n, top_p,
/// temperature and stop=["</cite>"]. The prompt is the rendered context, the
/// query, the history and the open statement up to its <cite> tag.
class HttpCandidateSource final : public CandidateSource {
public:
    explicit HttpCandidateSource(SamplingConfig config);
    std::vector<std::string> candidates(const CandidateRequest& request) const override;

    /// Prompt sent for a request; exposed for inspection.
    static std::string build_prompt(const CandidateRequest& request);

private:
    SamplingConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace citerank

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "citerank/bon_reranker.hpp"
#include "citerank/candidate_source.hpp"
#include "citerank/contextcite.hpp"
#include "citerank/pref_builder.hpp"
#include "citerank/scorer.hpp"
#include "citerank/segmenter.hpp"

namespace citerank {

enum class Command { segment, reward, rerank, build_prefs, perturb, contextcite, sft_filter };

const char* to_string(Command command);
Command parse_command(std::string_view name);

enum ExitStatus : int { exit_ok = 0, exit_config = 1, exit_input = 2, exit_backend = 3 };

struct ScorerSettings {
    std::string spec;  // "oracle:<path>" or an http(s) URL
    std::optional<std::string> token;
    std::size_t timeout_ms = 30000;
    int retries = 3;
};

struct CandidateSettings {
    std::string source;  // a JSONL file or an http(s) URL
    std::optional<std::string> model;
    std::optional<std::string> token;
    double top_p = 0.9;
    double temperature = 1.2;
    int max_tokens = 64;
};

struct ContextCiteSettings {
    std::size_t calls = 256;
    double lambda = 0.01;
    double epsilon = 1e-9;
    ExtractionConfig extraction;
};

struct PipelineConfig {
    Command command = Command::segment;
    std::filesystem::path input;
    std::filesystem::path output;
    // Side outputs; default to "<output>.audit.jsonl", ".weights.jsonl", ".dropped.jsonl".
    std::optional<std::filesystem::path> audit;    // rerank: per-candidate audit
    std::optional<std::filesystem::path> weights;  // contextcite: surrogate weights
    std::optional<std::filesystem::path> dropped;  // build-prefs: dropped records
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    LanguageHint language = LanguageHint::automatic;
    bool strict = false;  // strict response parsing

    ScorerSettings scorer;
    CandidateSettings candidates;
    RerankConfig rerank;
    BalanceWindow window;
    std::size_t truncation_budget = 25600;  // 0 disables truncation
    ShiftRange shift;
    ContextCiteSettings contextcite;
    double max_empty_ratio = 0.30;

    /// Settings that affect output bytes, in a canonical layout (no paths,
    /// worker counts or secrets). Its digest is the config hash.
    nlohmann::json canonical() const;
    std::string hash() const;

    /// Throws ConfigError for missing or out-of-range settings.
    void validate() const;
};

/// Context of an input record: "sentences" (list of strings, used verbatim)
/// or "text" (segmented with `hint`). Throws InputError.
SegmentedContext context_from_record(const nlohmann::json& record, LanguageHint hint);

/// Response of an input record: "response" (tagged string) or "statements"
/// ([{"text": str, "citation": "[a-b]..."}]). Throws InputError.
StructuredResponse response_from_record(const nlohmann::json& record, bool strict);

std::unique_ptr<Scorer> make_scorer(const ScorerSettings& settings);
std::unique_ptr<CandidateSource> make_candidate_source(const CandidateSettings& settings);

/// Path of the manifest written next to an output file.
std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Runs one command end to end. Outputs are staged under ".partial" names and
/// renamed on success; a manifest (config hash, seeds, input and output
/// digests) is written last. Returns an ExitStatus; diagnostics go to `log`.
int run_pipeline(const PipelineConfig& config, std::ostream& log);

}  // namespace citerank

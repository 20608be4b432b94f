#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "citerank/scorer.hpp"

namespace citerank {

/// Deterministic test double: each statement has a planted support set S and
///
///   log p = -alpha * |S \ retained|
///           - alpha * sum over non-support j outside retained of neighbor_decay^dist(j, S)
///           - distractor_penalty * |retained \ S|
///
/// With both extensions at 0 (the default) this is the plain support oracle.
/// neighbor_decay gives sentences near the support partial relevance;
/// distractor_penalty makes irrelevant retained sentences cost probability.
struct SupportOracleSpec {
    std::map<std::string, IdSet> support;  // statement text -> S
    double alpha = 1.0;
    double neighbor_decay = 0.0;      // in [0, 1)
    double distractor_penalty = 0.0;  // >= 0
};

/// Reads {"alpha", "neighbor_decay"?, "distractor_penalty"?, "support": {text: [ids]}}.
SupportOracleSpec oracle_spec_from_json(const nlohmann::json& j);
nlohmann::json oracle_spec_to_json(const SupportOracleSpec& spec);
SupportOracleSpec load_oracle_spec(const std::filesystem::path& path);

class OracleScorer final : public Scorer {
public:
    /// Throws InvalidArgument for alpha <= 0 or out-of-range extension parameters.
    explicit OracleScorer(SupportOracleSpec spec);

    /// Throws ScorerError(UnknownStatement) when the target has no support
    /// entry and ScorerError(InvalidRequest) when S exceeds the context.
    LogProb score(const ScoreRequest& request) const override;

    const SupportOracleSpec& spec() const noexcept { return spec_; }

private:
    SupportOracleSpec spec_;
};

}  // namespace citerank

#include "citerank/oracle_scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "citerank/error.hpp"

namespace citerank {

SupportOracleSpec oracle_spec_from_json(const nlohmann::json& j) {
    SupportOracleSpec spec;
    spec.alpha = j.value("alpha", 1.0);
    spec.neighbor_decay = j.value("neighbor_decay", 0.0);
    spec.distractor_penalty = j.value("distractor_penalty", 0.0);
    for (const auto& [text, ids] : j.at("support").items()) {
        IdSet s = ids.get<IdSet>();
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        spec.support.emplace(text, std::move(s));
    }
    return spec;
}

nlohmann::json oracle_spec_to_json(const SupportOracleSpec& spec) {
    nlohmann::json j;
    j["alpha"] = spec.alpha;
    j["neighbor_decay"] = spec.neighbor_decay;
    j["distractor_penalty"] = spec.distractor_penalty;
    j["support"] = nlohmann::json::object();
    for (const auto& [text, ids] : spec.support) j["support"][text] = ids;
    return j;
}

SupportOracleSpec load_oracle_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open oracle spec " + path.string());
    try {
        return oracle_spec_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("bad oracle spec " + path.string() + ": " + e.what());
    }
}

OracleScorer::OracleScorer(SupportOracleSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.alpha > 0.0) || !std::isfinite(spec_.alpha)) throw InvalidArgument("oracle alpha must be > 0");
    if (!(spec_.neighbor_decay >= 0.0 && spec_.neighbor_decay < 1.0))
        throw InvalidArgument("oracle neighbor_decay must be in [0, 1)");
    if (!(spec_.distractor_penalty >= 0.0) || !std::isfinite(spec_.distractor_penalty))
        throw InvalidArgument("oracle distractor_penalty must be >= 0");
}

LogProb OracleScorer::score(const ScoreRequest& request) const {
    validate_request(request);
    const auto it = spec_.support.find(request.target);
    if (it == spec_.support.end())
        throw ScorerError(ScorerError::Kind::UnknownStatement, "no support entry for statement: " + request.target);
    const IdSet& support = it->second;
    if (!support.empty() && support.back() >= request.ctx.size())
        throw ScorerError(ScorerError::Kind::InvalidRequest, "support set exceeds context size");

    const auto& kept = request.retained;
    std::size_t missing = 0;
    for (const SentenceId s : support)
        if (!std::binary_search(kept.begin(), kept.end(), s)) ++missing;

    double value = -spec_.alpha * static_cast<double>(missing);

    if (spec_.neighbor_decay > 0.0 && !support.empty()) {
        double lost = 0.0;
        for (SentenceId j = 0; j < request.ctx.size(); ++j) {
            if (std::binary_search(kept.begin(), kept.end(), j) || std::binary_search(support.begin(), support.end(), j))
                continue;
            const auto nearest = std::lower_bound(support.begin(), support.end(), j);
            std::int64_t dist = std::numeric_limits<std::int64_t>::max();
            if (nearest != support.end()) dist = static_cast<std::int64_t>(*nearest) - j;
            if (nearest != support.begin()) dist = std::min<std::int64_t>(dist, j - static_cast<std::int64_t>(*(nearest - 1)));
            lost += std::pow(spec_.neighbor_decay, static_cast<double>(dist));
        }
        value -= spec_.alpha * lost;
    }

    if (spec_.distractor_penalty > 0.0) {
        std::size_t extra = 0;
        for (const SentenceId k : kept)
            if (!std::binary_search(support.begin(), support.end(), k)) ++extra;
        value -= spec_.distractor_penalty * static_cast<double>(extra);
    }
    return {value};
}

}  // namespace citerank

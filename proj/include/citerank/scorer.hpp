#pragma once

#include <string>

#include "citerank/segmenter.hpp"

namespace citerank {

/// One probability query: log p(target | retained context, query, history).
struct ScoreRequest {
    const SegmentedContext& ctx;
    IdSet retained;       // sorted subset of ctx ids
    std::string query;
    std::string history;  // serialized prior statements with their citations
    std::string target;   // statement text to score
};

/// Sum of target-token log-probabilities.
struct LogProb {
    double value = 0.0;
};

/// Probability backend. Implementations must be safe to call concurrently and
/// must return equal values for equal requests.
class Scorer {
public:
    virtual ~Scorer() = default;

    /// Throws ScorerError.
    virtual LogProb score(const ScoreRequest& request) const = 0;
};

/// Throws ScorerError(InvalidRequest) if the retained ids are unsorted,
/// duplicated or out of range, or the target is empty.
void validate_request(const ScoreRequest& request);

/// The context block the backend conditions on: render_prompt_context over the
/// retained ids, original tags kept.
std::string render_conditioning(const ScoreRequest& request);

}  // namespace citerank

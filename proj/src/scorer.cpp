#include "citerank/scorer.hpp"

#include "citerank/error.hpp"

namespace citerank {

void validate_request(const ScoreRequest& request) {
    if (request.target.empty()) throw ScorerError(ScorerError::Kind::InvalidRequest, "empty target");
    for (std::size_t k = 0; k < request.retained.size(); ++k) {
        if (request.retained[k] >= request.ctx.size())
            throw ScorerError(ScorerError::Kind::InvalidRequest,
                              "retained id " + std::to_string(request.retained[k]) + " out of range");
        if (k > 0 && request.retained[k] <= request.retained[k - 1])
            throw ScorerError(ScorerError::Kind::InvalidRequest, "retained ids must be strictly increasing");
    }
}

std::string render_conditioning(const ScoreRequest& request) {
    return render_prompt_context(request.ctx, request.retained);
}

}  // namespace citerank

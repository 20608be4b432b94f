#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citerank/citation_format.hpp"
#include "citerank/error.hpp"
#include "citerank/scorer.hpp"

namespace citerank {

/// bits[i] == true keeps sentence i in the context.
struct AblationVector {
    std::vector<bool> bits;

    IdSet kept() const;
};

struct AblationSample {
    AblationVector v;
    double g_value = 0.0;  // logit of the clamped response probability
};

struct AblationConfig {
    double epsilon = 1e-9;  // probability clamp [eps, 1 - eps] before the logit
    std::size_t max_in_flight = 4;
};

/// logit(clamp(exp(logprob), eps, 1 - eps)), computed in log space.
double clamped_logit(double logprob, double epsilon);

/// Draws n ablation vectors uniformly from {0,1}^|C| with Rng(seed) and scores
/// each kept set. Deterministic for a fixed seed.
std::vector<AblationSample> sample_ablations(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                                             const std::string& history, const std::string& statement, std::size_t n,
                                             std::uint64_t seed, const AblationConfig& cfg = {});

/// Linear surrogate g(v) ~ weights . v + bias.
struct SurrogateModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
    std::size_t n_samples = 0;
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t support_size() const;
    double predict(const AblationVector& v) const;
};

struct LassoOptions {
    double tolerance = 1e-8;  // stop when the largest coefficient change is below this
    std::size_t max_iterations = 10000;
};

/// Raised when coordinate descent hits the iteration cap; carries the last iterate.
class DidNotConverge : public Error {
public:
    explicit DidNotConverge(SurrogateModel best)
        : Error("lasso did not converge after " + std::to_string(best.iterations) + " sweeps"), best_(std::move(best)) {}

    const SurrogateModel& best() const noexcept { return best_; }

private:
    SurrogateModel best_;
};

/// Minimizes (1/n) sum (g_i - w.v_i - b)^2 + lambda * |w|_1 by cyclic
/// coordinate descent on centered data; the bias is unpenalized.
/// Needs at least 2 samples of equal length. Throws DidNotConverge.
SurrogateModel fit_surrogate(const std::vector<AblationSample>& samples, double lambda, const LassoOptions& options = {});

struct ExtractionConfig {
    double t = 1.5;  // weight threshold
    double p = 0.7;  // cumulative softmax mass
    std::size_t k = 4;

    void validate() const;
};

struct ScoredSpan {
    CitationSpan span;
    double score = 0.0;       // max member weight
    double normalized = 0.0;  // softmax over all surviving spans
    bool selected = false;
};

struct ExtractionTrace {
    std::vector<ScoredSpan> spans;  // every above-threshold span, document order
    std::size_t above_threshold = 0;
};

/// Threshold, merge adjacent survivors into spans scored by their max weight,
/// softmax the span scores, add spans by descending mass until the total
/// reaches p (the first span always goes in), then keep the k best. Selected
/// spans are returned in document order.
CitationSequence extract_citations(const SurrogateModel& model, const ExtractionConfig& cfg,
                                   ExtractionTrace* trace = nullptr);

struct AttributedStatement {
    std::string text;
    CitationSequence citation;
    std::size_t above_threshold = 0;  // ids whose weight survived t
};

struct AttributedResponse {
    std::string doc_id;
    std::string query;
    std::vector<AttributedStatement> statements;

    StructuredResponse to_structured() const;
};

/// True when more than `max_empty_ratio` of the statements have no id above
/// the threshold.
bool should_discard(const AttributedResponse& response, double max_empty_ratio = 0.30);

std::vector<AttributedResponse> sft_filter(std::vector<AttributedResponse> dataset, double max_empty_ratio = 0.30);

}  // namespace citerank

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "citerank/bon_reranker.hpp"
#include "citerank/citation_format.hpp"
#include "citerank/tokenizer.hpp"

namespace citerank {

/// One citation edit made while balancing a rejected response.
struct BalanceEdit {
    enum class Op { insert, remove };

    std::size_t statement = 0;
    Op op = Op::insert;
    CitationSpan span;
    std::size_t position = 0;  // index in the statement's span list at the time of the edit

    bool operator==(const BalanceEdit&) const = default;
};

struct PreferencePair {
    std::string doc_id;
    std::string query;
    StructuredResponse chosen;
    StructuredResponse rejected;
    std::uint64_t seed = 0;
    std::vector<BalanceEdit> balancing_log;
    std::vector<SentenceId> truncated_ids;  // context sentences dropped to fit the budget
};

/// {"doc_id","query","chosen","rejected","meta":{"seed","edits":[...],"truncated_ids":[...]}}
nlohmann::json to_json(const PreferencePair& pair);

/// Sentence-index distance band for inserted citations.
struct BalanceWindow {
    std::size_t min_distance = 5;
    std::size_t max_distance = 10;
};

/// Edits the rejected citations so that every statement covers exactly as
/// many sentences as the chosen one.
///
/// Too few: single-sentence spans are inserted at uncited ids whose distance
/// to some originally cited id of the rejected statement lies in the window
/// (the chosen citation's ids when the rejected statement cited nothing).
/// Too many: randomly picked spans are removed until coverage is at or below
/// the target, then the gap is filled by insertion.
///
/// Statement i draws from Rng(derive_seed(seed, i)). Throws
/// BalancingInfeasible when the window has too few free ids.
PreferencePair balance_lengths(PreferencePair pair, const SegmentedContext& ctx, const BalanceWindow& window,
                               std::uint64_t seed);

struct ShiftRange {
    std::int64_t min_shift = 3;
    std::int64_t max_shift = 10;
};

/// Translates a span by delta, keeping its width where the context allows and
/// clamping it into [0, num_sentences).
CitationSpan shift_span(CitationSpan span, std::int64_t delta, std::size_t num_sentences);

struct PerturbResult {
    StructuredResponse response;
    std::vector<std::vector<std::int64_t>> deltas;  // per statement, per span
};

/// Shifts every span by a delta drawn uniformly from +-[min_shift, max_shift].
/// Statement texts are untouched; empty citations stay empty.
PerturbResult perturb_citations(const StructuredResponse& response, const SegmentedContext& ctx,
                                const ShiftRange& range, std::uint64_t seed);

struct TruncationPlan {
    std::size_t budget_tokens = 25600;
    IdSet keep_anchors;
    std::vector<SentenceId> removed_ids;  // in removal order
    std::size_t tokens_before = 0;
    std::size_t tokens_after = 0;
};

/// Farthest-first truncation: repeatedly drops the non-anchor sentence with
/// the largest index distance to its nearest anchor (ties: larger id) until
/// the context fits the budget. Throws AnchorsExceedBudget when the anchors
/// alone do not fit.
TruncationPlan plan_truncation(const SegmentedContext& ctx, const IdSet& anchors, std::size_t budget_tokens,
                               const Tokenizer& tok = default_tokenizer());

/// Ids kept by a plan, ascending.
IdSet retained_ids(const SegmentedContext& ctx, const TruncationPlan& plan);

struct PrefRecord {
    std::string doc_id;
    SegmentedContext ctx;
    std::string query;
    StructuredResponse response;  // direct-sampled response, becomes `rejected`
};

struct PrefBuildConfig {
    RerankConfig rerank;
    BalanceWindow window;
    std::uint64_t seed = 0;
    std::optional<std::size_t> truncation_budget;
};

struct PrefOutcome {
    std::optional<PreferencePair> pair;
    std::string drop_reason;  // set when pair is empty
    ResponseRerank rerank;
};

/// Seed used for a record: derive_seed(base, fnv1a64(doc_id)).
std::uint64_t record_seed(std::uint64_t base, const std::string& doc_id);

/// Builds one pair: rejected = original, chosen = best-of-N rerank, then
/// length balancing. Pairs whose citations are already identical are dropped.
PrefOutcome build_preference_pair(const PrefRecord& record, const Scorer& scorer, const CandidateSource& source,
                                  const PrefBuildConfig& cfg);

struct DropRecord {
    std::string doc_id;
    std::string reason;
};

/// Runs build_preference_pair over a corpus; per-record failures are logged
/// through `dropped` and skipped.
void build_pref_dataset(const std::vector<PrefRecord>& corpus, const Scorer& scorer, const CandidateSource& source,
                        const PrefBuildConfig& cfg, const std::function<void(const PreferencePair&)>& emit,
                        const std::function<void(const DropRecord&)>& dropped);

}  // namespace citerank

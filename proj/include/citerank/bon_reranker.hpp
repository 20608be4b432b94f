#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citerank/ablation_reward.hpp"
#include "citerank/candidate_source.hpp"
#include "citerank/citation_format.hpp"
#include "citerank/tokenizer.hpp"

namespace citerank {

enum class InvalidReason { none, over_length, malformed, scoring_failed };

const char* to_string(InvalidReason reason);

/// How candidates are ranked. reward uses the ablation reward; the others
/// are the comparison rankers (log-prob of the citation string, longest cited
/// text, and either half of the reward alone).
enum class Selector { reward, lm_logprob, max_length, prob_drop_only, prob_hold_only };

const char* to_string(Selector selector);
Selector parse_selector(std::string_view name);

enum class TieBreak { first_seen };

struct RerankConfig {
    std::size_t n = 10;
    std::size_t l_max_tokens = 384;
    bool dedup = true;
    TieBreak tie_break = TieBreak::first_seen;
    Selector selector = Selector::reward;
    std::size_t max_in_flight = 4;
    std::shared_ptr<const Tokenizer> tokenizer;  // null: default_tokenizer()

    const Tokenizer& tok() const { return tokenizer ? *tokenizer : default_tokenizer(); }
    void validate() const;
};

struct Candidate {
    std::string raw_string;
    CitationSequence seq;
    IdSet cited;                  // resolved, clipped to the context
    std::size_t cited_tokens = 0;
    bool is_original = false;
    bool valid = false;
    InvalidReason invalid_reason = InvalidReason::malformed;
    std::optional<RewardBreakdown> reward;  // set for valid candidates under reward-based selectors
    std::optional<double> score;            // selector value; set iff valid after scoring
    std::string error;
};

/// Parses a candidate string (with or without <cite> tags). A parse failure
/// yields an invalid candidate with reason `malformed`.
Candidate make_candidate(std::string_view raw, const SegmentedContext& ctx, const Tokenizer& tok = default_tokenizer());
Candidate make_candidate(const CitationSequence& seq, const SegmentedContext& ctx,
                         const Tokenizer& tok = default_tokenizer());

/// Length guard: a parsed candidate stays valid iff its cited text has at
/// most l_max_tokens tokens or it cites exactly one sentence.
Candidate filter_candidate(Candidate cand, const SegmentedContext& ctx, const RerankConfig& cfg);

/// Keeps the first candidate for every distinct resolved cited set.
/// Unparseable candidates are compared by raw string.
std::vector<Candidate> dedup_candidates(std::vector<Candidate> cands);

struct StatementRerank {
    CitationSequence best;
    std::optional<std::size_t> best_index;  // into audit; empty when falling back
    bool fell_back = false;                 // no valid candidate: original kept
    std::size_t duplicates_removed = 0;
    std::vector<Candidate> audit;           // audit[0] is the original citation
};

/// Best-of-N selection for one statement. The original citation is always
/// candidate 0, followed by the first cfg.n entries of `candidates`.
/// Throws AllScoringFailed if every scorer call for a valid candidate failed.
StatementRerank rerank_statement(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                                 const std::string& history, const Statement& statement,
                                 const std::vector<std::string>& candidates, const RerankConfig& cfg);

struct ResponseRerank {
    StructuredResponse response;
    std::vector<StatementRerank> statements;
};

/// Reranks every statement in order. History for statement i is the
/// serialization of statements 0..i-1 with their original citations.
ResponseRerank rerank_response(const Scorer& scorer, const SegmentedContext& ctx, const std::string& doc_id,
                               const std::string& query, const StructuredResponse& response,
                               const CandidateSource& source, const RerankConfig& cfg);

/// Serialized statements [0, index) used as conditioning history.
std::string history_prefix(const StructuredResponse& response, std::size_t index);

}  // namespace citerank

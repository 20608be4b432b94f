#include "citerank/bon_reranker.hpp"

#include <algorithm>
#include <set>

#include "citerank/error.hpp"
#include "citerank/parallel.hpp"

namespace citerank {

const char* to_string(InvalidReason reason) {
    switch (reason) {
        case InvalidReason::none: return "none";
        case InvalidReason::over_length: return "over_length";
        case InvalidReason::malformed: return "malformed";
        case InvalidReason::scoring_failed: return "scoring_failed";
    }
    return "unknown";
}

const char* to_string(Selector selector) {
    switch (selector) {
        case Selector::reward: return "reward";
        case Selector::lm_logprob: return "lm_logprob";
        case Selector::max_length: return "max_length";
        case Selector::prob_drop_only: return "prob_drop_only";
        case Selector::prob_hold_only: return "prob_hold_only";
    }
    return "unknown";
}

Selector parse_selector(std::string_view name) {
    for (const Selector s : {Selector::reward, Selector::lm_logprob, Selector::max_length, Selector::prob_drop_only,
                             Selector::prob_hold_only}) {
        if (name == to_string(s)) return s;
    }
    throw InvalidArgument("unknown selector '" + std::string(name) + "'");
}

void RerankConfig::validate() const {
    if (n < 1) throw InvalidArgument("rerank n must be >= 1");
    if (l_max_tokens < 1) throw InvalidArgument("rerank l_max_tokens must be >= 1");
    if (max_in_flight < 1) throw InvalidArgument("rerank max_in_flight must be >= 1");
}

Candidate make_candidate(const CitationSequence& seq, const SegmentedContext& ctx, const Tokenizer& tok) {
    Candidate c;
    c.raw_string = serialize_citation(seq);
    c.seq = seq;
    c.cited = resolve_cited_sentences(seq, ctx).ids;
    c.cited_tokens = count_tokens(c.cited, ctx, tok);
    c.valid = true;
    c.invalid_reason = InvalidReason::none;
    return c;
}

Candidate make_candidate(std::string_view raw, const SegmentedContext& ctx, const Tokenizer& tok) {
    try {
        Candidate c = make_candidate(parse_citation(raw), ctx, tok);
        c.raw_string = std::string(raw);
        return c;
    } catch (const ParseError& e) {
        Candidate c;
        c.raw_string = std::string(raw);
        c.valid = false;
        c.invalid_reason = InvalidReason::malformed;
        c.error = e.what();
        return c;
    }
}

Candidate filter_candidate(Candidate cand, const SegmentedContext&, const RerankConfig& cfg) {
    if (cand.invalid_reason == InvalidReason::malformed) return cand;
    const bool within_cap = cand.cited_tokens <= cfg.l_max_tokens;
    const bool single_sentence = cand.cited.size() == 1;
    if (within_cap || single_sentence) {
        cand.valid = true;
        cand.invalid_reason = InvalidReason::none;
    } else {
        cand.valid = false;
        cand.invalid_reason = InvalidReason::over_length;
    }
    return cand;
}

std::vector<Candidate> dedup_candidates(std::vector<Candidate> cands) {
    std::set<IdSet> seen_sets;
    std::set<std::string> seen_malformed;
    std::vector<Candidate> out;
    out.reserve(cands.size());
    for (auto& c : cands) {
        const bool fresh = c.invalid_reason == InvalidReason::malformed ? seen_malformed.insert(c.raw_string).second
                                                                        : seen_sets.insert(c.cited).second;
        if (fresh) out.push_back(std::move(c));
    }
    return out;
}

namespace {

void score_candidate(Candidate& c, const StatementRewarder& rewarder, const Scorer& scorer, const SegmentedContext& ctx,
                     const std::string& query, const std::string& history, const Statement& statement,
                     Selector selector) {
    switch (selector) {
        case Selector::reward:
        case Selector::prob_drop_only:
        case Selector::prob_hold_only: {
            const RewardBreakdown r = rewarder.reward(c.cited);
            c.reward = r;
            c.score = selector == Selector::reward           ? r.reward
                      : selector == Selector::prob_drop_only ? r.prob_drop
                                                              : r.prob_hold;
            return;
        }
        case Selector::lm_logprob: {
            ScoreRequest req{ctx, ctx.all_ids(), query, history + "<statement>" + statement.text,
                             "<cite>" + serialize_citation(c.seq) + "</cite>"};
            c.score = scorer.score(req).value;
            return;
        }
        case Selector::max_length:
            c.score = static_cast<double>(c.cited_tokens);
            return;
    }
}

}  // namespace

StatementRerank rerank_statement(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                                 const std::string& history, const Statement& statement,
                                 const std::vector<std::string>& candidates, const RerankConfig& cfg) {
    cfg.validate();
    const Tokenizer& tok = cfg.tok();

    std::vector<Candidate> cands;
    cands.reserve(1 + std::min(cfg.n, candidates.size()));
    Candidate original = make_candidate(statement.citation, ctx, tok);
    original.is_original = true;
    cands.push_back(filter_candidate(std::move(original), ctx, cfg));
    for (std::size_t k = 0; k < candidates.size() && k < cfg.n; ++k)
        cands.push_back(filter_candidate(make_candidate(candidates[k], ctx, tok), ctx, cfg));

    StatementRerank out;
    if (cfg.dedup) {
        const std::size_t before = cands.size();
        cands = dedup_candidates(std::move(cands));
        out.duplicates_removed = before - cands.size();
    }

    std::vector<std::size_t> valid;
    for (std::size_t k = 0; k < cands.size(); ++k)
        if (cands[k].valid) valid.push_back(k);

    const StatementRewarder rewarder(scorer, ctx, query, history, statement.text);
    parallel_for(valid.size(), cfg.max_in_flight, [&](std::size_t i) {
        Candidate& c = cands[valid[i]];
        try {
            score_candidate(c, rewarder, scorer, ctx, query, history, statement, cfg.selector);
        } catch (const Error& e) {
            c.valid = false;
            c.invalid_reason = InvalidReason::scoring_failed;
            c.reward.reset();
            c.score.reset();
            c.error = e.what();
        }
    });

    if (!valid.empty() && std::none_of(valid.begin(), valid.end(), [&](std::size_t k) { return cands[k].valid; })) {
        throw AllScoringFailed("every candidate failed to score for statement: " + statement.text + " (" +
                               cands[valid.front()].error + ")");
    }

    for (std::size_t k = 0; k < cands.size(); ++k) {
        if (!cands[k].valid) continue;
        if (!out.best_index || *cands[k].score > *cands[*out.best_index].score) out.best_index = k;
    }
    if (out.best_index) {
        out.best = cands[*out.best_index].seq;
    } else {
        out.best = statement.citation;
        out.fell_back = true;
    }
    out.audit = std::move(cands);
    return out;
}

std::string history_prefix(const StructuredResponse& response, std::size_t index) {
    std::string out;
    for (std::size_t k = 0; k < index && k < response.statements.size(); ++k)
        out += serialize_statement(response.statements[k]);
    return out;
}

ResponseRerank rerank_response(const Scorer& scorer, const SegmentedContext& ctx, const std::string& doc_id,
                               const std::string& query, const StructuredResponse& response,
                               const CandidateSource& source, const RerankConfig& cfg) {
    cfg.validate();
    ResponseRerank out;
    out.response = response;
    out.statements.reserve(response.statements.size());
    for (std::size_t i = 0; i < response.statements.size(); ++i) {
        const Statement& st = response.statements[i];
        const std::string history = history_prefix(response, i);
        const std::vector<std::string> pool =
            source.candidates(CandidateRequest{doc_id, ctx, query, history, st.text, i, cfg.n});
        StatementRerank r = rerank_statement(scorer, ctx, query, history, st, pool, cfg);
        out.response.statements[i].citation = r.best;
        out.statements.push_back(std::move(r));
    }
    return out;
}

}  // namespace citerank

#include "citerank/ablation_reward.hpp"

#include "citerank/error.hpp"

namespace citerank {

RewardBreakdown make_breakdown(double logp_full, double logp_without, double logp_only) {
    RewardBreakdown b;
    b.logp_full = logp_full;
    b.logp_without = logp_without;
    b.logp_only = logp_only;
    b.prob_drop = logp_full - logp_without;
    b.prob_hold = logp_only - logp_full;
    b.reward = logp_only - logp_without;
    return b;
}

StatementRewarder::StatementRewarder(const Scorer& scorer, const SegmentedContext& ctx, std::string query,
                                     std::string history, std::string statement)
    : scorer_(scorer),
      ctx_(ctx),
      query_(std::move(query)),
      history_(std::move(history)),
      statement_(std::move(statement)) {}

double StatementRewarder::logp_given(IdSet retained) const {
    ++calls_;
    return scorer_.score(ScoreRequest{ctx_, std::move(retained), query_, history_, statement_}).value;
}

double StatementRewarder::logp_full() const {
    std::call_once(full_once_, [this] { full_ = logp_given(ctx_.all_ids()); });
    return full_;
}

void StatementRewarder::check_cited(const IdSet& cited) const {
    for (std::size_t k = 0; k < cited.size(); ++k) {
        if (cited[k] >= ctx_.size()) throw InvalidArgument("cited id " + std::to_string(cited[k]) + " out of range");
        if (k > 0 && cited[k] <= cited[k - 1]) throw InvalidArgument("cited ids must be sorted and unique");
    }
}

IdSet StatementRewarder::complement(const IdSet& cited) const {
    IdSet rest;
    rest.reserve(ctx_.size() - cited.size());
    std::size_t k = 0;
    for (SentenceId id = 0; id < ctx_.size(); ++id) {
        if (k < cited.size() && cited[k] == id) {
            ++k;
            continue;
        }
        rest.push_back(id);
    }
    return rest;
}

double StatementRewarder::prob_drop(const IdSet& cited) const {
    check_cited(cited);
    return logp_full() - logp_given(complement(cited));
}

double StatementRewarder::prob_hold(const IdSet& cited) const {
    check_cited(cited);
    return logp_given(cited) - logp_full();
}

RewardBreakdown StatementRewarder::reward(const IdSet& cited) const {
    check_cited(cited);
    const double full = logp_full();
    const double without = logp_given(complement(cited));
    const double only = logp_given(cited);
    return make_breakdown(full, without, only);
}

double prob_drop(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query, const std::string& history,
                 const std::string& statement, const IdSet& cited) {
    return StatementRewarder(scorer, ctx, query, history, statement).prob_drop(cited);
}

double prob_hold(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query, const std::string& history,
                 const std::string& statement, const IdSet& cited) {
    return StatementRewarder(scorer, ctx, query, history, statement).prob_hold(cited);
}

RewardBreakdown reward(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                       const std::string& history, const std::string& statement, const IdSet& cited) {
    return StatementRewarder(scorer, ctx, query, history, statement).reward(cited);
}

}  // namespace citerank

#pragma once

#include <atomic>
#include <mutex>
#include <string>

#include "citerank/scorer.hpp"

namespace citerank {

/// Context-ablation reward for one (statement, cited set) pair.
///
///   prob_drop = logp_full - logp_without   (necessity)
///   prob_hold = logp_only - logp_full      (sufficiency)
///   reward    = logp_only - logp_without   (= prob_drop + prob_hold)
///
/// where logp_full conditions on every sentence, logp_without on every sentence
/// except the cited ones and logp_only on the cited ones alone. Neither term is
/// clamped; both may be negative.
struct RewardBreakdown {
    double prob_drop = 0.0;
    double prob_hold = 0.0;
    double reward = 0.0;
    double logp_full = 0.0;
    double logp_without = 0.0;
    double logp_only = 0.0;
};

RewardBreakdown make_breakdown(double logp_full, double logp_without, double logp_only);

/// Scores ablations of one statement. logp_full is computed once on first use
/// and shared by every later call, so N candidates cost 2N + 1 scorer calls.
/// Safe for concurrent use.
class StatementRewarder {
public:
    StatementRewarder(const Scorer& scorer, const SegmentedContext& ctx, std::string query, std::string history,
                      std::string statement);

    StatementRewarder(const StatementRewarder&) = delete;
    StatementRewarder& operator=(const StatementRewarder&) = delete;

    double logp_full() const;
    double logp_given(IdSet retained) const;

    /// `cited` must be a sorted, duplicate-free subset of the context ids.
    double prob_drop(const IdSet& cited) const;
    double prob_hold(const IdSet& cited) const;
    RewardBreakdown reward(const IdSet& cited) const;

    std::size_t scorer_calls() const noexcept { return calls_.load(); }

private:
    void check_cited(const IdSet& cited) const;
    IdSet complement(const IdSet& cited) const;

    const Scorer& scorer_;
    const SegmentedContext& ctx_;
    std::string query_;
    std::string history_;
    std::string statement_;

    mutable std::once_flag full_once_;
    mutable double full_ = 0.0;
    mutable std::atomic<std::size_t> calls_{0};
};

double prob_drop(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query, const std::string& history,
                 const std::string& statement, const IdSet& cited);

double prob_hold(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query, const std::string& history,
                 const std::string& statement, const IdSet& cited);

RewardBreakdown reward(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                       const std::string& history, const std::string& statement, const IdSet& cited);

}  // namespace citerank

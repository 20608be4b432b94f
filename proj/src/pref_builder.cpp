#include "citerank/pref_builder.hpp"

#include <algorithm>
#include <limits>

#include "citerank/error.hpp"
#include "citerank/rng.hpp"

namespace citerank {

nlohmann::json to_json(const PreferencePair& pair) {
    nlohmann::json edits = nlohmann::json::array();
    for (const auto& e : pair.balancing_log) {
        edits.push_back({{"statement", e.statement},
                         {"op", e.op == BalanceEdit::Op::insert ? "insert" : "remove"},
                         {"start", e.span.start_id},
                         {"end", e.span.end_id},
                         {"position", e.position}});
    }
    nlohmann::json meta = {{"seed", pair.seed}, {"edits", std::move(edits)}};
    if (!pair.truncated_ids.empty()) meta["truncated_ids"] = pair.truncated_ids;
    return {{"doc_id", pair.doc_id},
            {"query", pair.query},
            {"chosen", serialize_response(pair.chosen)},
            {"rejected", serialize_response(pair.rejected)},
            {"meta", std::move(meta)}};
}

namespace {

bool contains(const IdSet& set, SentenceId id) { return std::binary_search(set.begin(), set.end(), id); }

// Uncited ids within the distance band of some anchor.
IdSet insertion_pool(const IdSet& anchors, const IdSet& excluded, std::size_t n, const BalanceWindow& w) {
    IdSet pool;
    for (SentenceId j = 0; j < n; ++j) {
        if (contains(excluded, j)) continue;
        const bool near = std::any_of(anchors.begin(), anchors.end(), [&](SentenceId a) {
            const std::size_t d = a > j ? a - j : j - a;
            return d >= w.min_distance && d <= w.max_distance;
        });
        if (near) pool.push_back(j);
    }
    return pool;
}

void balance_statement(std::size_t index, const Statement& chosen, Statement& rejected, const SegmentedContext& ctx,
                       const BalanceWindow& window, std::uint64_t seed, std::vector<BalanceEdit>& log) {
    const std::size_t n = ctx.size();
    const std::size_t target = coverage(chosen.citation, n);
    auto& spans = rejected.citation.spans;
    const IdSet original = resolve_cited_sentences(rejected.citation, n).ids;
    std::size_t current = original.size();
    if (current == target) return;

    Rng rng(seed);
    while (current > target && !spans.empty()) {
        const auto k = static_cast<std::size_t>(rng.below(spans.size()));
        log.push_back({index, BalanceEdit::Op::remove, spans[k], k});
        spans.erase(spans.begin() + static_cast<std::ptrdiff_t>(k));
        current = coverage(rejected.citation, n);
    }
    if (current == target) return;

    const IdSet anchors = original.empty() ? resolve_cited_sentences(chosen.citation, n).ids : original;
    IdSet pool = insertion_pool(anchors, original, n, window);
    const std::size_t need = target - current;
    if (pool.size() < need) {
        throw BalancingInfeasible("statement " + std::to_string(index) + ": need " + std::to_string(need) +
                                  " insertions but only " + std::to_string(pool.size()) + " ids are available");
    }
    for (std::size_t k = 0; k < need; ++k) {
        const auto pick = static_cast<std::size_t>(rng.below(pool.size()));
        const SentenceId id = pool[pick];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto at = std::find_if(spans.begin(), spans.end(), [&](const CitationSpan& s) { return s.start_id > id; });
        const auto position = static_cast<std::size_t>(at - spans.begin());
        spans.insert(at, CitationSpan{id, id});
        log.push_back({index, BalanceEdit::Op::insert, CitationSpan{id, id}, position});
    }
}

}  // namespace

PreferencePair balance_lengths(PreferencePair pair, const SegmentedContext& ctx, const BalanceWindow& window,
                               std::uint64_t seed) {
    if (window.min_distance > window.max_distance) throw InvalidArgument("balance window min exceeds max");
    if (pair.chosen.statements.size() != pair.rejected.statements.size())
        throw InvalidArgument("chosen and rejected have different statement counts");
    for (std::size_t i = 0; i < pair.chosen.statements.size(); ++i) {
        if (pair.chosen.statements[i].text != pair.rejected.statements[i].text)
            throw InvalidArgument("statement " + std::to_string(i) + " text differs between chosen and rejected");
    }
    pair.seed = seed;
    for (std::size_t i = 0; i < pair.chosen.statements.size(); ++i) {
        balance_statement(i, pair.chosen.statements[i], pair.rejected.statements[i], ctx, window, derive_seed(seed, i),
                          pair.balancing_log);
    }
    return pair;
}

CitationSpan shift_span(CitationSpan span, std::int64_t delta, std::size_t num_sentences) {
    const auto last = static_cast<std::int64_t>(num_sentences) - 1;
    const std::int64_t width = static_cast<std::int64_t>(span.end_id) - span.start_id;
    std::int64_t start = static_cast<std::int64_t>(span.start_id) + delta;
    std::int64_t end = static_cast<std::int64_t>(span.end_id) + delta;
    if (start < 0) {
        start = 0;
        end = width;
    }
    if (end > last) {
        end = last;
        start = std::max<std::int64_t>(0, last - width);
    }
    return {static_cast<SentenceId>(start), static_cast<SentenceId>(end)};
}

PerturbResult perturb_citations(const StructuredResponse& response, const SegmentedContext& ctx,
                                const ShiftRange& range, std::uint64_t seed) {
    if (range.min_shift < 0 || range.min_shift > range.max_shift) throw InvalidArgument("invalid shift range");
    PerturbResult out;
    out.response = response;
    out.deltas.resize(response.statements.size());
    for (std::size_t i = 0; i < out.response.statements.size(); ++i) {
        Rng rng(derive_seed(seed, i));
        for (auto& span : out.response.statements[i].citation.spans) {
            const bool negative = rng.coin();
            const std::int64_t magnitude = rng.between(range.min_shift, range.max_shift);
            const std::int64_t delta = negative ? -magnitude : magnitude;
            span = shift_span(span, delta, ctx.size());
            out.deltas[i].push_back(delta);
        }
    }
    return out;
}

TruncationPlan plan_truncation(const SegmentedContext& ctx, const IdSet& anchors, std::size_t budget_tokens,
                               const Tokenizer& tok) {
    TruncationPlan plan;
    plan.budget_tokens = budget_tokens;
    plan.keep_anchors = anchors;
    std::vector<std::size_t> tokens(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) tokens[i] = tok.count(ctx[i].text);

    std::size_t anchor_tokens = 0;
    for (const SentenceId a : anchors) {
        if (a >= ctx.size()) throw InvalidArgument("anchor " + std::to_string(a) + " out of range");
        anchor_tokens += tokens[a];
    }
    for (const std::size_t t : tokens) plan.tokens_before += t;
    plan.tokens_after = plan.tokens_before;
    if (plan.tokens_before <= budget_tokens) return plan;
    if (anchor_tokens > budget_tokens) {
        throw AnchorsExceedBudget("anchors need " + std::to_string(anchor_tokens) + " tokens, budget is " +
                                  std::to_string(budget_tokens));
    }

    // Anchor distances are fixed, so the greedy order is a sort by (distance desc, id desc).
    constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
    std::vector<std::pair<std::size_t, SentenceId>> order;
    for (SentenceId j = 0; j < ctx.size(); ++j) {
        if (contains(anchors, j)) continue;
        std::size_t dist = kFar;
        const auto nearest = std::lower_bound(anchors.begin(), anchors.end(), j);
        if (nearest != anchors.end()) dist = *nearest - j;
        if (nearest != anchors.begin()) dist = std::min<std::size_t>(dist, j - *(nearest - 1));
        order.emplace_back(dist, j);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second > b.second;
    });
    for (const auto& [dist, id] : order) {
        if (plan.tokens_after <= budget_tokens) break;
        plan.removed_ids.push_back(id);
        plan.tokens_after -= tokens[id];
    }
    return plan;
}

IdSet retained_ids(const SegmentedContext& ctx, const TruncationPlan& plan) {
    IdSet removed(plan.removed_ids.begin(), plan.removed_ids.end());
    std::sort(removed.begin(), removed.end());
    IdSet kept;
    for (SentenceId j = 0; j < ctx.size(); ++j)
        if (!contains(removed, j)) kept.push_back(j);
    return kept;
}

std::uint64_t record_seed(std::uint64_t base, const std::string& doc_id) { return derive_seed(base, fnv1a64(doc_id)); }

PrefOutcome build_preference_pair(const PrefRecord& record, const Scorer& scorer, const CandidateSource& source,
                                  const PrefBuildConfig& cfg) {
    PrefOutcome out;
    out.rerank = rerank_response(scorer, record.ctx, record.doc_id, record.query, record.response, source, cfg.rerank);

    bool differs = false;
    for (std::size_t i = 0; i < record.response.statements.size(); ++i) {
        const std::size_t n = record.ctx.size();
        if (resolve_cited_sentences(record.response.statements[i].citation, n).ids !=
            resolve_cited_sentences(out.rerank.response.statements[i].citation, n).ids) {
            differs = true;
            break;
        }
    }
    if (!differs) {
        out.drop_reason = "chosen and rejected citations are identical";
        return out;
    }

    PreferencePair pair;
    pair.doc_id = record.doc_id;
    pair.query = record.query;
    pair.chosen = out.rerank.response;
    pair.rejected = record.response;
    try {
        pair = balance_lengths(std::move(pair), record.ctx, cfg.window, record_seed(cfg.seed, record.doc_id));
    } catch (const BalancingInfeasible& e) {
        out.drop_reason = std::string("balancing infeasible: ") + e.what();
        return out;
    }

    if (cfg.truncation_budget) {
        IdSet anchors;
        for (const auto* resp : {&pair.chosen, &pair.rejected})
            for (const auto& st : resp->statements) {
                const IdSet ids = resolve_cited_sentences(st.citation, record.ctx).ids;
                anchors.insert(anchors.end(), ids.begin(), ids.end());
            }
        std::sort(anchors.begin(), anchors.end());
        anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
        try {
            pair.truncated_ids = plan_truncation(record.ctx, anchors, *cfg.truncation_budget, cfg.rerank.tok()).removed_ids;
        } catch (const AnchorsExceedBudget& e) {
            out.drop_reason = std::string("truncation infeasible: ") + e.what();
            return out;
        }
    }
    out.pair = std::move(pair);
    return out;
}

void build_pref_dataset(const std::vector<PrefRecord>& corpus, const Scorer& scorer, const CandidateSource& source,
                        const PrefBuildConfig& cfg, const std::function<void(const PreferencePair&)>& emit,
                        const std::function<void(const DropRecord&)>& dropped) {
    for (const auto& record : corpus) {
        try {
            PrefOutcome outcome = build_preference_pair(record, scorer, source, cfg);
            if (outcome.pair)
                emit(*outcome.pair);
            else
                dropped({record.doc_id, outcome.drop_reason});
        } catch (const Error& e) {
            dropped({record.doc_id, e.what()});
        }
    }
}

}  // namespace citerank

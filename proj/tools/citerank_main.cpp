// citerank: citation reward, reranking and preference-data pipelines over JSONL corpora.

#include <algorithm>
#include <cctype>
#include <iostream>

#include <CLI11.hpp>

#include "citerank/error.hpp"
#include "citerank/parallel.hpp"
#include "citerank/pipeline.hpp"

using namespace citerank;

namespace {

std::string env_name(std::string option) {
    std::transform(option.begin(), option.end(), option.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
    });
    return "CITERANK_" + option;
}

template <class T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& value, const std::string& help) {
    return app->add_option("--" + name, value, help)->envname(env_name(name))->capture_default_str();
}

struct Cli {
    PipelineConfig cfg;
    std::string language = "auto";
    std::string selector = "reward";
    std::string input, output, audit, weights, dropped;
    bool no_dedup = false;

    void io(CLI::App* sub) {
        opt(sub, "input", input, "input JSONL")->required();
        opt(sub, "output", output, "output JSONL")->required();
        opt(sub, "language", language, "segmentation hint: latin, cjk or auto");
        sub->add_flag("--strict", cfg.strict, "reject stray text in responses")->envname(env_name("strict"));
    }

    void scorer(CLI::App* sub) {
        opt(sub, "scorer", cfg.scorer.spec, "oracle:<spec.json> or http(s)://host:port of a logprob server");
        opt(sub, "scorer-token", cfg.scorer.token, "bearer token for the scorer");
        opt(sub, "timeout-ms", cfg.scorer.timeout_ms, "scorer request timeout");
        opt(sub, "retries", cfg.scorer.retries, "scorer retries on backend errors");
        opt(sub, "max-in-flight", cfg.rerank.max_in_flight, "concurrent scorer calls per document");
    }

    void candidates(CLI::App* sub) {
        opt(sub, "candidates", cfg.candidates.source, "candidate JSONL file or http(s) completions endpoint");
        opt(sub, "n", cfg.rerank.n, "candidates per statement");
        opt(sub, "lmax", cfg.rerank.l_max_tokens, "token cap on cited text");
        opt(sub, "selector", selector, "reward, lm_logprob, max_length, prob_drop_only or prob_hold_only");
        sub->add_flag("--no-dedup", no_dedup, "keep duplicate cited sets")->envname(env_name("no-dedup"));
        opt(sub, "top-p", cfg.candidates.top_p, "sampling top-p");
        opt(sub, "temperature", cfg.candidates.temperature, "sampling temperature");
        opt(sub, "max-tokens", cfg.candidates.max_tokens, "sampling length limit");
        opt(sub, "model", cfg.candidates.model, "model name sent to the sampling endpoint");
        opt(sub, "sampler-token", cfg.candidates.token, "bearer token for the sampling endpoint");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citerank: citation rewards, best-of-N reranking and preference data"};
    app.set_config("--config", "", "TOML or INI config file; [subcommand] sections set subcommand options");
    app.require_subcommand(1);

    Cli cli;
    cli.cfg.workers = default_workers();
    opt(&app, "seed", cli.cfg.seed, "base random seed");
    opt(&app, "workers", cli.cfg.workers, "documents processed in parallel");

    auto* seg = app.add_subcommand("segment", "split documents into tagged sentences");
    cli.io(seg);

    auto* rew = app.add_subcommand("reward", "ablation reward for every cited statement");
    cli.io(rew);
    cli.scorer(rew);

    auto* rr = app.add_subcommand("rerank", "best-of-N citation reranking");
    cli.io(rr);
    cli.scorer(rr);
    cli.candidates(rr);
    opt(rr, "audit", cli.audit, "per-candidate audit JSONL (default <output>.audit.jsonl)");

    auto* bp = app.add_subcommand("build-prefs", "preference pairs: reranked vs original citations");
    cli.io(bp);
    cli.scorer(bp);
    cli.candidates(bp);
    opt(bp, "min-distance", cli.cfg.window.min_distance, "nearest distance for inserted citations");
    opt(bp, "max-distance", cli.cfg.window.max_distance, "farthest distance for inserted citations");
    opt(bp, "truncate-budget", cli.cfg.truncation_budget, "context token budget, 0 disables");
    opt(bp, "dropped", cli.dropped, "dropped-record JSONL (default <output>.dropped.jsonl)");

    auto* pt = app.add_subcommand("perturb", "pairs with randomly shifted citations");
    cli.io(pt);
    opt(pt, "min-shift", cli.cfg.shift.min_shift, "smallest shift");
    opt(pt, "max-shift", cli.cfg.shift.max_shift, "largest shift");

    auto* cc = app.add_subcommand("contextcite", "citations from a sparse linear surrogate over ablations");
    cli.io(cc);
    cli.scorer(cc);
    opt(cc, "calls", cli.cfg.contextcite.calls, "ablation samples per statement");
    opt(cc, "lambda", cli.cfg.contextcite.lambda, "L1 penalty");
    opt(cc, "epsilon", cli.cfg.contextcite.epsilon, "probability clamp before the logit");
    opt(cc, "t", cli.cfg.contextcite.extraction.t, "weight threshold");
    opt(cc, "p", cli.cfg.contextcite.extraction.p, "cumulative mass cutoff");
    opt(cc, "k", cli.cfg.contextcite.extraction.k, "maximum spans");
    opt(cc, "weights", cli.weights, "surrogate weights JSONL (default <output>.weights.jsonl)");

    auto* sf = app.add_subcommand("sft-filter", "drop attributed responses with too many uncited statements");
    cli.io(sf);
    opt(sf, "max-empty-ratio", cli.cfg.max_empty_ratio, "largest tolerated share of empty statements");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }

    PipelineConfig& cfg = cli.cfg;
    try {
        cfg.command = parse_command(app.get_subcommands().front()->get_name());
        cfg.language = parse_language_hint(cli.language);
        cfg.rerank.selector = parse_selector(cli.selector);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    cfg.rerank.dedup = !cli.no_dedup;
    cfg.input = cli.input;
    cfg.output = cli.output;
    if (!cli.audit.empty()) cfg.audit = cli.audit;
    if (!cli.weights.empty()) cfg.weights = cli.weights;
    if (!cli.dropped.empty()) cfg.dropped = cli.dropped;
    return run_pipeline(cfg, std::cerr);
}

#include "citerank/pipeline.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <ostream>

#include "citerank/ablation_reward.hpp"
#include "citerank/digest.hpp"
#include "citerank/error.hpp"
#include "citerank/http_scorer.hpp"
#include "citerank/jsonl.hpp"
#include "citerank/oracle_scorer.hpp"
#include "citerank/parallel.hpp"
#include "citerank/rng.hpp"

namespace citerank {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Command command) {
    switch (command) {
        case Command::segment: return "segment";
        case Command::reward: return "reward";
        case Command::rerank: return "rerank";
        case Command::build_prefs: return "build-prefs";
        case Command::perturb: return "perturb";
        case Command::contextcite: return "contextcite";
        case Command::sft_filter: return "sft-filter";
    }
    return "unknown";
}

Command parse_command(std::string_view name) {
    for (const Command c : {Command::segment, Command::reward, Command::rerank, Command::build_prefs, Command::perturb,
                            Command::contextcite, Command::sft_filter}) {
        if (name == to_string(c)) return c;
    }
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

namespace {

const char* language_name(LanguageHint hint) {
    switch (hint) {
        case LanguageHint::latin: return "latin";
        case LanguageHint::cjk: return "cjk";
        case LanguageHint::automatic: return "auto";
    }
    return "auto";
}

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

bool needs_scorer(Command c) {
    return c == Command::reward || c == Command::rerank || c == Command::build_prefs || c == Command::contextcite;
}

bool needs_candidates(Command c) { return c == Command::rerank || c == Command::build_prefs; }

}  // namespace

json PipelineConfig::canonical() const {
    json j;
    j["command"] = to_string(command);
    j["seed"] = seed;
    j["language"] = language_name(language);
    j["strict"] = strict;
    // File-backed sources are identified by their digests in the manifest, not by path.
    if (needs_scorer(command))
        j["scorer"] = is_url(scorer.spec) ? json{{"kind", "http"}, {"endpoint", scorer.spec}} : json{{"kind", "oracle"}};
    if (needs_candidates(command)) {
        j["candidates"] = is_url(candidates.source) ? json{{"kind", "http"}, {"endpoint", candidates.source}}
                                                    : json{{"kind", "file"}};
        if (is_url(candidates.source)) {
            j["candidates"]["top_p"] = candidates.top_p;
            j["candidates"]["temperature"] = candidates.temperature;
            j["candidates"]["max_tokens"] = candidates.max_tokens;
            j["candidates"]["model"] = candidates.model.value_or("");
        }
        j["rerank"] = {{"n", rerank.n},
                       {"l_max_tokens", rerank.l_max_tokens},
                       {"dedup", rerank.dedup},
                       {"selector", to_string(rerank.selector)},
                       {"tie_break", "first_seen"}};
    }
    if (command == Command::build_prefs) {
        j["balance"] = {{"min_distance", window.min_distance}, {"max_distance", window.max_distance}};
        j["truncation_budget"] = truncation_budget;
    }
    if (command == Command::perturb) j["shift"] = {{"min", shift.min_shift}, {"max", shift.max_shift}};
    if (command == Command::contextcite) {
        j["contextcite"] = {{"calls", contextcite.calls},
                            {"lambda", contextcite.lambda},
                            {"epsilon", contextcite.epsilon},
                            {"t", contextcite.extraction.t},
                            {"p", contextcite.extraction.p},
                            {"k", contextcite.extraction.k}};
    }
    if (command == Command::sft_filter) j["max_empty_ratio"] = max_empty_ratio;
    return j;
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical().dump()); }

void PipelineConfig::validate() const {
    if (input.empty()) throw ConfigError("no input file given");
    if (output.empty()) throw ConfigError("no output file given");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (needs_scorer(command) && scorer.spec.empty()) throw ConfigError("--scorer is required for this command");
    if (needs_candidates(command) && candidates.source.empty())
        throw ConfigError("--candidates is required for this command");
    try {
        rerank.validate();
        contextcite.extraction.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (window.min_distance > window.max_distance) throw ConfigError("balance window min exceeds max");
    if (shift.min_shift < 0 || shift.min_shift > shift.max_shift) throw ConfigError("invalid shift range");
    if (contextcite.calls < 2) throw ConfigError("contextcite needs at least 2 calls");
    if (!(contextcite.lambda >= 0.0) || !std::isfinite(contextcite.lambda)) throw ConfigError("lambda must be >= 0");
    if (!(contextcite.epsilon > 0.0 && contextcite.epsilon < 0.5)) throw ConfigError("epsilon must be in (0, 0.5)");
    if (!(max_empty_ratio >= 0.0 && max_empty_ratio <= 1.0)) throw ConfigError("max_empty_ratio must be in [0, 1]");
    if (!(candidates.top_p > 0.0 && candidates.top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (!(candidates.temperature > 0.0)) throw ConfigError("temperature must be > 0");
}

SegmentedContext context_from_record(const json& record, LanguageHint hint) {
    try {
        if (record.contains("sentences")) {
            const auto texts = record.at("sentences").get<std::vector<std::string>>();
            if (texts.empty()) throw InputError("record has an empty sentence list");
            return SegmentedContext::from_texts(texts);
        }
        if (record.contains("text")) return segment(record.at("text").get<std::string>(), hint);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad context field: ") + e.what());
    } catch (const EmptyDocument& e) {
        throw InputError(e.what());
    }
    throw InputError("record has neither \"sentences\" nor \"text\"");
}

StructuredResponse response_from_record(const json& record, bool strict) {
    try {
        if (record.contains("response")) return parse_response(record.at("response").get<std::string>(), {strict});
        if (record.contains("statements")) {
            StructuredResponse r;
            for (const auto& st : record.at("statements")) {
                Statement s;
                s.text = st.at("text").get<std::string>();
                if (s.text.empty()) throw InputError("statement with empty text");
                s.citation = parse_citation(st.value("citation", std::string()));
                r.statements.push_back(std::move(s));
            }
            return r;
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad response field: ") + e.what());
    } catch (const ParseError& e) {
        throw InputError(e.what());
    }
    throw InputError("record has neither \"response\" nor \"statements\"");
}

std::unique_ptr<Scorer> make_scorer(const ScorerSettings& settings) {
    if (settings.spec.rfind("oracle:", 0) == 0) {
        try {
            return std::make_unique<OracleScorer>(load_oracle_spec(settings.spec.substr(7)));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    if (is_url(settings.spec)) {
        HttpScorerConfig cfg;
        cfg.endpoint = settings.spec;
        cfg.token = settings.token;
        cfg.timeout = std::chrono::milliseconds(settings.timeout_ms);
        cfg.max_retries = settings.retries;
        try {
            return std::make_unique<HttpScorer>(cfg);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("scorer must be oracle:<spec.json> or an http(s) URL, got '" + settings.spec + "'");
}

std::unique_ptr<CandidateSource> make_candidate_source(const CandidateSettings& settings) {
    if (is_url(settings.source)) {
        SamplingConfig cfg;
        cfg.endpoint = settings.source;
        cfg.model = settings.model;
        cfg.token = settings.token;
        cfg.top_p = settings.top_p;
        cfg.temperature = settings.temperature;
        cfg.max_tokens = settings.max_tokens;
        return std::make_unique<HttpCandidateSource>(cfg);
    }
    if (!fs::exists(settings.source)) throw InputError("candidate file not found: " + settings.source);
    try {
        return std::make_unique<StaticCandidateSource>(StaticCandidateSource::load(settings.source));
    } catch (const InvalidArgument& e) {
        throw InputError(e.what());
    }
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

namespace {

std::string doc_id_of(const json& record) {
    const auto it = record.find("doc_id");
    if (it == record.end() || !it->is_string()) throw InputError("record is missing a string \"doc_id\"");
    return it->get<std::string>();
}

json ids_json(const IdSet& ids) { return json(ids); }

json candidate_json(const Candidate& c) {
    json j = {{"raw", c.raw_string},
              {"cited", ids_json(c.cited)},
              {"cited_tokens", c.cited_tokens},
              {"original", c.is_original},
              {"valid", c.valid},
              {"invalid_reason", to_string(c.invalid_reason)}};
    j["score"] = c.score ? json(*c.score) : json(nullptr);
    if (c.reward) {
        j["prob_drop"] = c.reward->prob_drop;
        j["prob_hold"] = c.reward->prob_hold;
        j["reward"] = c.reward->reward;
    }
    if (!c.error.empty()) j["error"] = c.error;
    return j;
}

struct RecordOutput {
    std::vector<json> main;
    std::vector<json> side;
};

struct Counters {
    std::size_t records = 0;
    std::size_t written = 0;
    std::size_t side_written = 0;
    std::size_t statements = 0;
    std::size_t dropped = 0;
};

using Processor = std::function<RecordOutput(const json&)>;

// Reads records in batches, processes each batch with document-level
// parallelism and writes results in input order. On failure, every record
// before the failing one has been written.
void stream_records(JsonlReader& reader, StagedFile& main, StagedFile* side, std::size_t workers,
                    const Processor& process, Counters& counters) {
    const std::size_t batch_size = std::max<std::size_t>(1, workers * 4);
    std::vector<json> batch;
    std::vector<std::size_t> lines;
    bool more = true;
    while (more) {
        batch.clear();
        lines.clear();
        json record;
        std::exception_ptr read_error;
        try {
            while (batch.size() < batch_size && (more = reader.next(record))) {
                batch.push_back(std::move(record));
                lines.push_back(reader.line());
            }
        } catch (const InputError&) {
            read_error = std::current_exception();
            more = false;
        }

        std::vector<RecordOutput> results(batch.size());
        std::vector<std::exception_ptr> errors(batch.size());
        parallel_for(batch.size(), workers, [&](std::size_t i) {
            try {
                results[i] = process(batch[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (errors[i]) {
                try {
                    std::rethrow_exception(errors[i]);
                } catch (const InputError& e) {
                    throw InputError(reader.path().string() + ":" + std::to_string(lines[i]) + ": " + e.what());
                }
            }
            ++counters.records;
            for (const auto& j : results[i].main) {
                main.write_line(j);
                ++counters.written;
            }
            if (side) {
                for (const auto& j : results[i].side) {
                    side->write_line(j);
                    ++counters.side_written;
                }
            }
        }
        if (read_error) std::rethrow_exception(read_error);
    }
}

struct Runner {
    const PipelineConfig& cfg;
    const Scorer* scorer = nullptr;
    const CandidateSource* source = nullptr;
    std::atomic<std::size_t> statements{0};
    std::atomic<std::size_t> dropped{0};

    RecordOutput segment_record(const json& record) const {
        if (!record.contains("text")) throw InputError("segment needs a \"text\" field");
        const SegmentedContext ctx = context_from_record(record, cfg.language);
        json out = record;
        out.erase("text");
        json sentences = json::array();
        json offsets = json::array();
        for (const auto& u : ctx.sentences()) {
            sentences.push_back(u.text);
            offsets.push_back({u.start, u.end});
        }
        out["sentences"] = std::move(sentences);
        out["offsets"] = std::move(offsets);
        out["source_digest"] = ctx.source_digest();
        return {{std::move(out)}, {}};
    }

    RecordOutput reward_record(const json& record) {
        const std::string doc_id = doc_id_of(record);
        const SegmentedContext ctx = context_from_record(record, cfg.language);
        const std::string query = record.value("query", std::string());
        const StructuredResponse resp = response_from_record(record, cfg.strict);
        json rows = json::array();
        for (std::size_t i = 0; i < resp.statements.size(); ++i) {
            const auto& st = resp.statements[i];
            const IdSet cited = resolve_cited_sentences(st.citation, ctx).ids;
            const RewardBreakdown b = reward(*scorer, ctx, query, history_prefix(resp, i), st.text, cited);
            rows.push_back({{"text", st.text},
                            {"citation", serialize_citation(st.citation)},
                            {"cited_ids", ids_json(cited)},
                            {"prob_drop", b.prob_drop},
                            {"prob_hold", b.prob_hold},
                            {"reward", b.reward},
                            {"logp_full", b.logp_full},
                            {"logp_without", b.logp_without},
                            {"logp_only", b.logp_only}});
        }
        statements += resp.statements.size();
        return {{json{{"doc_id", doc_id}, {"query", query}, {"statements", std::move(rows)}}}, {}};
    }

    RecordOutput rerank_record(const json& record) {
        const std::string doc_id = doc_id_of(record);
        const SegmentedContext ctx = context_from_record(record, cfg.language);
        const std::string query = record.value("query", std::string());
        const StructuredResponse resp = response_from_record(record, cfg.strict);
        const ResponseRerank r = rerank_response(*scorer, ctx, doc_id, query, resp, *source, cfg.rerank);
        RecordOutput out;
        out.main.push_back({{"doc_id", doc_id},
                            {"query", query},
                            {"original", serialize_response(resp)},
                            {"response", serialize_response(r.response)}});
        for (std::size_t i = 0; i < r.statements.size(); ++i) {
            const auto& s = r.statements[i];
            json cands = json::array();
            for (const auto& c : s.audit) cands.push_back(candidate_json(c));
            out.side.push_back({{"doc_id", doc_id},
                                {"statement", i},
                                {"selector", to_string(cfg.rerank.selector)},
                                {"tie_break", "first_seen"},
                                {"best_index", s.best_index ? json(*s.best_index) : json(nullptr)},
                                {"fell_back", s.fell_back},
                                {"duplicates_removed", s.duplicates_removed},
                                {"chosen", serialize_citation(s.best)},
                                {"candidates", std::move(cands)}});
        }
        statements += resp.statements.size();
        return out;
    }

    RecordOutput build_prefs_record(const json& record) {
        PrefRecord rec{doc_id_of(record), context_from_record(record, cfg.language), record.value("query", std::string()),
                       response_from_record(record, cfg.strict)};
        PrefBuildConfig pcfg;
        pcfg.rerank = cfg.rerank;
        pcfg.window = cfg.window;
        pcfg.seed = cfg.seed;
        if (cfg.truncation_budget > 0) pcfg.truncation_budget = cfg.truncation_budget;
        const PrefOutcome outcome = build_preference_pair(rec, *scorer, *source, pcfg);
        statements += rec.response.statements.size();
        if (outcome.pair) return {{to_json(*outcome.pair)}, {}};
        ++dropped;
        return {{}, {json{{"doc_id", rec.doc_id}, {"reason", outcome.drop_reason}}}};
    }

    RecordOutput perturb_record(const json& record) const {
        const std::string doc_id = doc_id_of(record);
        const SegmentedContext ctx = context_from_record(record, cfg.language);
        const StructuredResponse resp = response_from_record(record, cfg.strict);
        const std::uint64_t seed = record_seed(cfg.seed, doc_id);
        const PerturbResult p = perturb_citations(resp, ctx, cfg.shift, seed);
        return {{json{{"doc_id", doc_id},
                      {"query", record.value("query", std::string())},
                      {"chosen", serialize_response(resp)},
                      {"rejected", serialize_response(p.response)},
                      {"meta", {{"seed", seed}, {"deltas", p.deltas}}}}},
                {}};
    }

    RecordOutput contextcite_record(const json& record) {
        const std::string doc_id = doc_id_of(record);
        const SegmentedContext ctx = context_from_record(record, cfg.language);
        const std::string query = record.value("query", std::string());
        const StructuredResponse resp = response_from_record(record, cfg.strict);
        const std::uint64_t base = record_seed(cfg.seed, doc_id);
        const AblationConfig acfg{cfg.contextcite.epsilon, cfg.rerank.max_in_flight};

        AttributedResponse attributed{doc_id, query, {}};
        RecordOutput out;
        for (std::size_t i = 0; i < resp.statements.size(); ++i) {
            const auto& st = resp.statements[i];
            const auto samples = sample_ablations(*scorer, ctx, query, history_prefix(resp, i), st.text,
                                                  cfg.contextcite.calls, derive_seed(base, i), acfg);
            SurrogateModel model;
            try {
                model = fit_surrogate(samples, cfg.contextcite.lambda);
            } catch (const DidNotConverge& e) {
                model = e.best();
            }
            ExtractionTrace trace;
            const CitationSequence seq = extract_citations(model, cfg.contextcite.extraction, &trace);
            attributed.statements.push_back({st.text, seq, trace.above_threshold});
            out.side.push_back({{"doc_id", doc_id},
                                {"statement", i},
                                {"weights", model.weights},
                                {"bias", model.bias},
                                {"lambda", model.lambda},
                                {"n_samples", model.n_samples},
                                {"iterations", model.iterations},
                                {"converged", model.converged}});
        }
        json rows = json::array();
        for (const auto& s : attributed.statements)
            rows.push_back({{"text", s.text}, {"citation", serialize_citation(s.citation)}, {"above_threshold", s.above_threshold}});
        out.main.push_back({{"doc_id", doc_id},
                            {"query", query},
                            {"response", serialize_response(attributed.to_structured())},
                            {"statements", std::move(rows)}});
        statements += resp.statements.size();
        return out;
    }

    RecordOutput sft_filter_record(const json& record) {
        AttributedResponse r;
        r.doc_id = doc_id_of(record);
        try {
            for (const auto& st : record.at("statements"))
                r.statements.push_back({st.at("text").get<std::string>(), parse_citation(st.value("citation", "")),
                                        st.at("above_threshold").get<std::size_t>()});
        } catch (const json::exception& e) {
            throw InputError(std::string("sft-filter needs contextcite output: ") + e.what());
        } catch (const ParseError& e) {
            throw InputError(e.what());
        }
        statements += r.statements.size();
        if (should_discard(r, cfg.max_empty_ratio)) {
            ++dropped;
            return {};
        }
        return {{record}, {}};
    }

    RecordOutput process(const json& record) {
        switch (cfg.command) {
            case Command::segment: return segment_record(record);
            case Command::reward: return reward_record(record);
            case Command::rerank: return rerank_record(record);
            case Command::build_prefs: return build_prefs_record(record);
            case Command::perturb: return perturb_record(record);
            case Command::contextcite: return contextcite_record(record);
            case Command::sft_filter: return sft_filter_record(record);
        }
        return {};
    }
};

fs::path with_suffix(const fs::path& p, const char* suffix) { return fs::path(p.string() + suffix); }

std::optional<fs::path> side_output(const PipelineConfig& cfg) {
    switch (cfg.command) {
        case Command::rerank: return cfg.audit.value_or(with_suffix(cfg.output, ".audit.jsonl"));
        case Command::contextcite: return cfg.weights.value_or(with_suffix(cfg.output, ".weights.jsonl"));
        case Command::build_prefs: return cfg.dropped.value_or(with_suffix(cfg.output, ".dropped.jsonl"));
        default: return std::nullopt;
    }
}

int run(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (!fs::is_regular_file(cfg.input)) throw InputError("input file not found: " + cfg.input.string());

    json inputs = json::array();
    inputs.push_back({{"role", "input"}, {"path", cfg.input.string()}, {"sha256", sha256_file(cfg.input)}});

    std::unique_ptr<Scorer> scorer;
    std::unique_ptr<CandidateSource> source;
    if (needs_scorer(cfg.command)) {
        scorer = make_scorer(cfg.scorer);
        if (cfg.scorer.spec.rfind("oracle:", 0) == 0) {
            const fs::path spec = cfg.scorer.spec.substr(7);
            inputs.push_back({{"role", "oracle_spec"}, {"path", spec.string()}, {"sha256", sha256_file(spec)}});
        }
    }
    if (needs_candidates(cfg.command)) {
        source = make_candidate_source(cfg.candidates);
        if (!is_url(cfg.candidates.source)) {
            inputs.push_back({{"role", "candidates"},
                              {"path", cfg.candidates.source},
                              {"sha256", sha256_file(cfg.candidates.source)}});
        }
    }

    for (const auto& p : {std::optional<fs::path>(cfg.output), side_output(cfg)})
        if (p && p->has_parent_path()) fs::create_directories(p->parent_path());

    JsonlReader reader(cfg.input);
    StagedFile main(cfg.output);
    std::optional<StagedFile> side;
    if (const auto sp = side_output(cfg)) side.emplace(*sp);

    Runner runner{cfg, scorer.get(), source.get()};
    Counters counters;
    stream_records(reader, main, side ? &*side : nullptr, cfg.workers,
                   [&](const json& r) { return runner.process(r); }, counters);

    main.commit();
    json outputs = json::array();
    outputs.push_back({{"role", "output"},
                       {"path", cfg.output.string()},
                       {"sha256", sha256_file(cfg.output)},
                       {"records", counters.written}});
    if (side) {
        side->commit();
        outputs.push_back({{"role", cfg.command == Command::rerank        ? "audit"
                                    : cfg.command == Command::contextcite ? "weights"
                                                                          : "dropped"},
                           {"path", side->path().string()},
                           {"sha256", sha256_file(side->path())},
                           {"records", counters.side_written}});
    }

    json manifest = {{"command", to_string(cfg.command)},
                     {"config_hash", cfg.hash()},
                     {"config", cfg.canonical()},
                     {"seeds", {{"base", cfg.seed}, {"per_record", "derive_seed(base, fnv1a64(doc_id))"}}},
                     {"inputs", std::move(inputs)},
                     {"outputs", std::move(outputs)},
                     {"counts",
                      {{"records", counters.records},
                       {"statements", runner.statements.load()},
                       {"dropped", runner.dropped.load()}}}};
    StagedFile mf(manifest_path(cfg.output));
    mf.write(manifest.dump(2) + "\n");
    mf.commit();

    log << to_string(cfg.command) << ": " << counters.records << " records, " << counters.written << " written";
    if (runner.dropped) log << ", " << runner.dropped.load() << " dropped";
    log << " -> " << cfg.output.string() << " (config " << cfg.hash().substr(0, 12) << ")\n";
    return exit_ok;
}

}  // namespace

int run_pipeline(const PipelineConfig& config, std::ostream& log) {
    try {
        return run(config, log);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ScorerError& e) {
        log << "backend error: " << e.what() << "\n";
        return exit_backend;
    } catch (const AllScoringFailed& e) {
        log << "backend error: " << e.what() << "\n";
        return exit_backend;
    } catch (const Error& e) {
        log << "input error: " << e.what() << "\n";
        return exit_input;
    } catch (const fs::filesystem_error& e) {
        log << "input error: " << e.what() << "\n";
        return exit_input;
    } catch (const json::exception& e) {
        log << "input error: " << e.what() << "\n";
        return exit_input;
    }
}

}  // namespace citerank

#include "citerank/contextcite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "citerank/parallel.hpp"
#include "citerank/rng.hpp"

namespace citerank {

IdSet AblationVector::kept() const {
    IdSet ids;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) ids.push_back(static_cast<SentenceId>(i));
    return ids;
}

double clamped_logit(double logprob, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must be in (0, 0.5)");
    const double lo = std::log(epsilon);
    const double hi = std::log1p(-epsilon);
    const double log_p = std::clamp(logprob, lo, hi);
    return log_p - std::log1p(-std::exp(log_p));
}

std::vector<AblationSample> sample_ablations(const Scorer& scorer, const SegmentedContext& ctx, const std::string& query,
                                             const std::string& history, const std::string& statement, std::size_t n,
                                             std::uint64_t seed, const AblationConfig& cfg) {
    if (n < 1) throw InvalidArgument("need at least one ablation sample");
    Rng rng(seed);
    std::vector<AblationSample> samples(n);
    for (auto& s : samples) {
        s.v.bits.resize(ctx.size());
        for (std::size_t i = 0; i < ctx.size(); ++i) s.v.bits[i] = rng.coin();
    }
    parallel_for(n, cfg.max_in_flight, [&](std::size_t i) {
        const LogProb lp = scorer.score(ScoreRequest{ctx, samples[i].v.kept(), query, history, statement});
        samples[i].g_value = clamped_logit(lp.value, cfg.epsilon);
    });
    return samples;
}

std::size_t SurrogateModel::support_size() const {
    return static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

double SurrogateModel::predict(const AblationVector& v) const {
    double out = bias;
    for (std::size_t i = 0; i < weights.size() && i < v.bits.size(); ++i)
        if (v.bits[i]) out += weights[i];
    return out;
}

SurrogateModel fit_surrogate(const std::vector<AblationSample>& samples, double lambda, const LassoOptions& options) {
    if (samples.size() < 2) throw InvalidArgument("lasso needs at least 2 samples");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a finite value >= 0");
    const std::size_t n = samples.size();
    const std::size_t d = samples.front().v.bits.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Column-major centered design matrix.
    std::vector<double> x_mean(d, 0.0);
    double y_mean = 0.0;
    for (const auto& s : samples) {
        if (s.v.bits.size() != d) throw InvalidArgument("ablation vectors differ in length");
        if (!std::isfinite(s.g_value)) throw InvalidArgument("non-finite ablation target");
        for (std::size_t j = 0; j < d; ++j) x_mean[j] += s.v.bits[j] ? 1.0 : 0.0;
        y_mean += s.g_value;
    }
    for (auto& m : x_mean) m *= inv_n;
    y_mean *= inv_n;

    std::vector<double> xc(n * d);
    std::vector<double> col_sq(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (samples[i].v.bits[j] ? 1.0 : 0.0) - x_mean[j];
            xc[j * n + i] = v;
            col_sq[j] += v * v;
        }
        col_sq[j] *= inv_n;
    }
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = samples[i].g_value - y_mean;

    SurrogateModel model;
    model.weights.assign(d, 0.0);
    model.lambda = lambda;
    model.n_samples = n;
    const double shrink = lambda / 2.0;

    while (model.iterations < options.max_iterations) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (col_sq[j] == 0.0) continue;  // constant column carries no signal
            const double* col = &xc[j * n];
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += col[i] * residual[i];
            rho = rho * inv_n + col_sq[j] * model.weights[j];
            const double updated = rho > shrink ? (rho - shrink) / col_sq[j]
                                   : rho < -shrink ? (rho + shrink) / col_sq[j]
                                                   : 0.0;
            const double delta = updated - model.weights[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * col[i];
                model.weights[j] = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        ++model.iterations;
        if (max_change < options.tolerance) {
            model.converged = true;
            break;
        }
    }
    model.bias = y_mean - std::inner_product(x_mean.begin(), x_mean.end(), model.weights.begin(), 0.0);
    if (!model.converged) throw DidNotConverge(model);
    return model;
}

void ExtractionConfig::validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("extraction p must be in (0, 1]");
    if (k < 1) throw InvalidArgument("extraction k must be >= 1");
    if (!std::isfinite(t)) throw InvalidArgument("extraction t must be finite");
}

CitationSequence extract_citations(const SurrogateModel& model, const ExtractionConfig& cfg, ExtractionTrace* trace) {
    cfg.validate();
    ExtractionTrace local;
    ExtractionTrace& tr = trace ? *trace : local;
    tr = {};

    const auto& w = model.weights;
    for (std::size_t i = 0; i < w.size();) {
        if (!(w[i] >= cfg.t)) {
            ++i;
            continue;
        }
        ScoredSpan s;
        s.span.start_id = static_cast<SentenceId>(i);
        s.score = w[i];
        while (i < w.size() && w[i] >= cfg.t) {
            s.score = std::max(s.score, w[i]);
            s.span.end_id = static_cast<SentenceId>(i);
            ++tr.above_threshold;
            ++i;
        }
        tr.spans.push_back(s);
    }
    if (tr.spans.empty()) return {};

    double top = tr.spans.front().score;
    for (const auto& s : tr.spans) top = std::max(top, s.score);
    double total = 0.0;
    for (auto& s : tr.spans) {
        s.normalized = std::exp(s.score - top);
        total += s.normalized;
    }
    for (auto& s : tr.spans) s.normalized /= total;

    std::vector<std::size_t> order(tr.spans.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tr.spans[a].normalized > tr.spans[b].normalized; });

    std::vector<std::size_t> chosen;
    double mass = 0.0;
    for (const std::size_t idx : order) {
        chosen.push_back(idx);
        mass += tr.spans[idx].normalized;
        if (mass >= cfg.p) break;
    }
    if (chosen.size() > cfg.k) chosen.resize(cfg.k);
    for (const std::size_t idx : chosen) tr.spans[idx].selected = true;

    CitationSequence out;
    for (const auto& s : tr.spans)
        if (s.selected) out.spans.push_back(s.span);
    return out;
}

StructuredResponse AttributedResponse::to_structured() const {
    StructuredResponse r;
    for (const auto& st : statements) r.statements.push_back({st.text, st.citation});
    return r;
}

bool should_discard(const AttributedResponse& response, double max_empty_ratio) {
    if (response.statements.empty()) return true;
    const auto empty = std::count_if(response.statements.begin(), response.statements.end(),
                                     [](const AttributedStatement& s) { return s.above_threshold == 0; });
    return static_cast<double>(empty) / static_cast<double>(response.statements.size()) > max_empty_ratio;
}

std::vector<AttributedResponse> sft_filter(std::vector<AttributedResponse> dataset, double max_empty_ratio) {
    std::erase_if(dataset, [&](const AttributedResponse& r) { return should_discard(r, max_empty_ratio); });
    return dataset;
}

}  // namespace citerank

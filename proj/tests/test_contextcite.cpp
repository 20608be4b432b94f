#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "citerank/contextcite.hpp"
#include "citerank/oracle_scorer.hpp"
#include "test_support.hpp"

using namespace citerank;
namespace ct = citerank::testing;

namespace {

std::vector<AblationSample> linear_samples(std::mt19937_64& rng, std::size_t d, std::size_t n,
                                           const std::vector<double>& w, double b, double noise = 0.0) {
    std::bernoulli_distribution bit(0.5);
    std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
    std::vector<AblationSample> out(n);
    for (auto& s : out) {
        s.v.bits.resize(d);
        double g = b;
        for (std::size_t j = 0; j < d; ++j) {
            s.v.bits[j] = bit(rng);
            if (s.v.bits[j]) g += w[j];
        }
        s.g_value = g + (noise > 0 ? eps(rng) : 0.0);
    }
    return out;
}

// Ordinary least squares with intercept via the normal equations.
Eigen::VectorXd normal_equations(const std::vector<AblationSample>& samples) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(samples.front().v.bits.size());
    Eigen::MatrixXd x(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = samples[i].v.bits[j] ? 1.0 : 0.0;
        x(i, d) = 1.0;
        y(i) = samples[i].g_value;
    }
    return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

SurrogateModel model_with(std::vector<double> w) {
    SurrogateModel m;
    m.weights = std::move(w);
    return m;
}

AttributedResponse with_empty_statements(std::size_t total, std::size_t empty) {
    AttributedResponse r;
    for (std::size_t i = 0; i < total; ++i) r.statements.push_back({"s", {}, i < empty ? 0u : 1u});
    return r;
}

}  // namespace

TEST_CASE("clamped logit") {
    CHECK(clamped_logit(std::log(0.5), 1e-9) == doctest::Approx(0.0));
    CHECK(clamped_logit(std::log(0.25), 1e-9) == doctest::Approx(std::log(0.25 / 0.75)));
    const double top = std::log((1 - 1e-9) / 1e-9);
    CHECK(clamped_logit(0.0, 1e-9) == doctest::Approx(top).epsilon(1e-6));
    CHECK(clamped_logit(-1e6, 1e-9) == doctest::Approx(-top).epsilon(1e-6));
    CHECK(clamped_logit(-INFINITY, 1e-9) == doctest::Approx(-top).epsilon(1e-6));
    CHECK_THROWS_AS(clamped_logit(0.0, 0.0), InvalidArgument);
}

TEST_CASE("ablation sampling is seeded") {
    const auto ctx = ct::make_context(16);
    SupportOracleSpec spec;
    spec.support["r"] = {3};
    const OracleScorer oracle(spec);
    const auto a = sample_ablations(oracle, ctx, "q", "", "r", 32, 9);
    const auto b = sample_ablations(oracle, ctx, "q", "", "r", 32, 9, AblationConfig{.max_in_flight = 1});
    const auto c = sample_ablations(oracle, ctx, "q", "", "r", 32, 10);
    REQUIRE(a.size() == 32);
    bool differs = false;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].v.bits == b[i].v.bits);
        CHECK(a[i].g_value == b[i].g_value);
        differs |= a[i].v.bits != c[i].v.bits;
        ones += static_cast<std::size_t>(std::count(a[i].v.bits.begin(), a[i].v.bits.end(), true));
        const double expected = a[i].v.bits[3] ? clamped_logit(0.0, 1e-9) : clamped_logit(-1.0, 1e-9);
        CHECK(a[i].g_value == expected);
    }
    CHECK(differs);
    CHECK(ones > 32 * 16 / 4);
    CHECK(ones < 32 * 16 * 3 / 4);
    CHECK_THROWS_AS(sample_ablations(oracle, ctx, "q", "", "r", 0, 1), InvalidArgument);
}

TEST_CASE("planted sparse weights are recovered") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> w(20, 0.0);
        std::set<std::size_t> support;
        while (support.size() < 3) support.insert(rng() % 20);
        for (auto j : support) w[j] = (rng() % 2 ? 1.0 : -1.0) * (0.5 + static_cast<double>(rng() % 100) / 25.0);
        const auto samples = linear_samples(rng, 20, 64, w, 0.7);
        const auto m = fit_surrogate(samples, 1e-6);
        CHECK(m.converged);
        CHECK(m.support_size() == 3);
        for (std::size_t j = 0; j < 20; ++j) {
            CHECK((m.weights[j] != 0.0) == (support.count(j) == 1));
            CHECK(std::abs(m.weights[j] - w[j]) <= 1e-4);
        }
        CHECK(std::abs(m.bias - 0.7) <= 1e-4);
    }
}

TEST_CASE("worked planted model") {
    std::mt19937_64 rng(41);
    std::vector<double> w(10, 0.0);
    w[2] = 3.0;
    w[5] = -2.0;
    const auto m = fit_surrogate(linear_samples(rng, 10, 64, w, 1.0), 1e-6);
    CHECK(m.weights[2] == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(m.weights[5] == doctest::Approx(-2.0).epsilon(1e-4));
    CHECK(m.support_size() == 2);
    CHECK(std::abs(m.bias - 1.0) <= 1e-4);
}

TEST_CASE("unregularized fit matches the normal equations") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(6);
        for (auto& x : w) x = static_cast<double>(static_cast<int>(rng() % 200) - 100) / 20.0;
        const auto samples = linear_samples(rng, 6, 48, w, -1.3, 0.5);
        const auto m = fit_surrogate(samples, 0.0, LassoOptions{1e-12, 100000});
        const auto beta = normal_equations(samples);
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(m.weights[j] - beta(static_cast<Eigen::Index>(j))) <= 1e-6);
        CHECK(std::abs(m.bias - beta(6)) <= 1e-6);
    }
}

TEST_CASE("large lambda zeroes every weight and leaves the mean") {
    std::mt19937_64 rng(6);
    const auto samples = linear_samples(rng, 8, 40, {3, -2, 0, 0, 1, 0, 0, 5}, 2.0, 0.1);
    const auto m = fit_surrogate(samples, 1e4);
    CHECK(m.support_size() == 0);
    double mean = 0.0;
    for (const auto& s : samples) mean += s.g_value;
    CHECK(m.bias == doctest::Approx(mean / 40.0));
    CHECK(m.predict(samples[0].v) == doctest::Approx(mean / 40.0));
}

TEST_CASE("support shrinks as lambda grows") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> w(12);
        for (auto& x : w) x = static_cast<double>(static_cast<int>(rng() % 100) - 50) / 10.0;
        const auto samples = linear_samples(rng, 12, 80, w, 0.0, 0.3);
        std::size_t prev = SIZE_MAX;
        for (double lambda : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
            const auto m = fit_surrogate(samples, lambda);
            CHECK(m.support_size() <= prev);
            prev = m.support_size();
        }
        CHECK(prev == 0);
    }
}

TEST_CASE("fit errors") {
    std::mt19937_64 rng(8);
    const auto samples = linear_samples(rng, 6, 30, {1, 2, 3, 4, 5, 6}, 0.0, 1.0);
    CHECK_THROWS_AS(fit_surrogate({samples[0]}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(fit_surrogate(samples, -1.0), InvalidArgument);
    try {
        fit_surrogate(samples, 0.0, LassoOptions{1e-15, 1});
        FAIL("expected DidNotConverge");
    } catch (const DidNotConverge& e) {
        CHECK(e.best().iterations == 1);
        CHECK_FALSE(e.best().converged);
    }
}

TEST_CASE("constant columns get zero weight") {
    std::mt19937_64 rng(9);
    auto samples = linear_samples(rng, 4, 30, {1, 2, 3, 4}, 0.0);
    for (auto& s : samples) s.v.bits[2] = true;
    const auto m = fit_surrogate(samples, 1e-6);
    CHECK(m.weights[2] == 0.0);
}

TEST_CASE("extraction: threshold, merge, softmax, top-p, top-k") {
    SUBCASE("two spans both needed to reach p") {
        const auto m = model_with({0.1, 2.0, 1.6, 1.0, 0.0, 0.0, -3.0, 1.6, 0.2});
        ExtractionTrace trace;
        const auto seq = extract_citations(m, ExtractionConfig{}, &trace);
        CHECK(serialize_citation(seq) == "[1-2][7-7]");
        REQUIRE(trace.spans.size() == 2);
        CHECK(trace.above_threshold == 3);
        CHECK(trace.spans[0].score == 2.0);
        CHECK(trace.spans[0].normalized == doctest::Approx(0.599).epsilon(1e-3));
        CHECK(trace.spans[1].normalized == doctest::Approx(0.401).epsilon(1e-3));
    }
    SUBCASE("first span alone can reach p") {
        const auto m = model_with({5.0, 0.0, 1.6});
        CHECK(serialize_citation(extract_citations(m, ExtractionConfig{})) == "[0-0]");
    }
    SUBCASE("top-k caps the count and output follows document order") {
        const auto m = model_with({1.6, 0, 1.7, 0, 1.8, 0, 1.9, 0, 2.0, 0, 2.1});
        CHECK(serialize_citation(extract_citations(m, ExtractionConfig{.t = 1.5, .p = 1.0, .k = 4})) ==
              "[4-4][6-6][8-8][10-10]");
        CHECK(serialize_citation(extract_citations(m, ExtractionConfig{.t = 1.5, .p = 1.0, .k = 1})) == "[10-10]");
    }
    SUBCASE("nothing above the threshold") {
        ExtractionTrace trace;
        CHECK(extract_citations(model_with({1.0, 1.49, -5}), ExtractionConfig{}, &trace).empty());
        CHECK(trace.above_threshold == 0);
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS(extract_citations(model_with({}), ExtractionConfig{.p = 0.0}), InvalidArgument);
        CHECK_THROWS_AS(extract_citations(model_with({}), ExtractionConfig{.k = 0}), InvalidArgument);
    }
}

TEST_CASE("extraction properties on random weights") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1.0, 4.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> w(1 + rng() % 30);
        for (auto& x : w) x = u(rng);
        const ExtractionConfig cfg{1.5, 0.05 + 0.95 * static_cast<double>(rng() % 100) / 100.0, 1 + rng() % 5};
        ExtractionTrace trace;
        const auto seq = extract_citations(model_with(w), cfg, &trace);
        CHECK(seq.spans.size() <= cfg.k);
        std::size_t above = 0;
        for (double x : w) above += x >= cfg.t;
        CHECK(trace.above_threshold == above);
        CHECK((seq.empty() == (above == 0)));
        for (std::size_t k = 0; k < seq.spans.size(); ++k) {
            if (k) CHECK(seq.spans[k].start_id > seq.spans[k - 1].end_id + 1);
            for (auto id = seq.spans[k].start_id; id <= seq.spans[k].end_id; ++id) CHECK(w[id] >= cfg.t);
        }
        double total = 0.0;
        for (const auto& s : trace.spans) total += s.normalized;
        if (!trace.spans.empty()) CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("end to end attribution recovers the planted support") {
    const auto ctx = ct::make_context(10);
    SupportOracleSpec spec;
    spec.support["r"] = {2, 3};
    spec.alpha = 2.0;
    const OracleScorer oracle(spec);
    const auto samples = sample_ablations(oracle, ctx, "q", "", "r", 256, 3);
    const auto m = fit_surrogate(samples, 0.01);
    const auto seq = extract_citations(m, ExtractionConfig{});
    CHECK(serialize_citation(seq) == "[2-3]");
}

TEST_CASE("training-set filter drops responses with too many empty statements") {
    CHECK_FALSE(should_discard(with_empty_statements(10, 3)));
    CHECK(should_discard(with_empty_statements(10, 4)));
    CHECK_FALSE(should_discard(with_empty_statements(1, 0)));
    CHECK(should_discard(with_empty_statements(1, 1)));
    CHECK(should_discard(AttributedResponse{}));

    std::vector<AttributedResponse> data = {with_empty_statements(10, 3), with_empty_statements(10, 4),
                                            with_empty_statements(5, 0)};
    data[0].doc_id = "a";
    data[2].doc_id = "c";
    const auto kept = sft_filter(data);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].doc_id == "a");
    CHECK(kept[1].doc_id == "c");
    CHECK(kept[0].to_structured().statements.size() == 10);
}

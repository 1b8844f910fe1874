#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "edc/metrics.hpp"
#include "edc/model_io.hpp"
#include "edc/search.hpp"
#include "test_util.hpp"

using namespace edc;
using edc::test::dataset_from;

namespace {

EncodedDataset linear_boundary_data(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
        y[i] = -0.5 + X(i, 0) > 0.0 ? 1.0 : 0.0;  // c0 + c1*x1 rule
    }
    return dataset_from(X, y);
}

EncodedDataset xor_sign_data(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        // centered coordinates rescaled into [0,1]; label from the raw product
        const double a = rng.uniform(-10.0, 10.0);
        const double b = rng.uniform(-10.0, 10.0);
        X(i, 0) = (a + 10.0) / 20.0;
        X(i, 1) = (b + 10.0) / 20.0;
        y[i] = a * b >= 0.0 ? 1.0 : 0.0;
    }
    return dataset_from(X, y);
}

double model_auc(const Equation& eq, const EncodedDataset& data) {
    return auc(evaluate_all(eq, data.X), data.y);
}

// mirrors the documented per-candidate seed derivation
FitResult oracle_fit(const Equation& eq, const EncodedDataset& data, const OptimizerConfig& opt,
                     int restarts, std::uint64_t child_seed) {
    FitResult best;
    for (int r = 0; r < restarts; ++r) {
        OptimizerConfig run = opt;
        run.seed = mix_seed(child_seed, static_cast<std::uint64_t>(r));
        FitResult fit = optimize_constants(eq, data, run);
        if (r == 0 || fit.final_loss < best.final_loss) best = fit;
    }
    return best;
}

}  // namespace

TEST_CASE("separable linear data is fit to near-perfect training AUC") {
    const EncodedDataset data = linear_boundary_data(600, 42);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    SearchConfig cfg;
    cfg.seed = 1;
    cfg.max_depth = 2;
    OptimizerConfig opt;
    const ScoredCandidate best = beam_search(data, grammar, cfg, opt);
    CHECK(model_auc(best.equation, data) >= 0.999);
}

TEST_CASE("sign-of-product labels require a product summand") {
    const EncodedDataset data = xor_sign_data(1200, 7);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    SearchConfig cfg;
    cfg.seed = 3;
    OptimizerConfig opt;
    const ScoredCandidate best = beam_search(data, grammar, cfg, opt);

    CHECK(model_auc(best.equation, data) >= 0.99);
    const bool has_product = std::any_of(
        best.equation.summands.begin(), best.equation.summands.end(),
        [](const Summand& s) { return s.kind == SummandKind::product; });
    CHECK(has_product);
}

TEST_CASE("width-one depth-one search equals greedy enumeration") {
    const EncodedDataset data = linear_boundary_data(300, 5);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    SearchConfig cfg;
    cfg.beam_width = 1;
    cfg.max_depth = 1;
    cfg.seed = 11;
    OptimizerConfig opt;
    const ScoredCandidate got = beam_search(data, grammar, cfg, opt);

    // oracle: root, then every depth-1 child with the same seeds
    FitResult root = oracle_fit(Equation{}, data, opt, cfg.restarts_per_candidate,
                                mix_seed(cfg.seed, 0, 0));
    ScoredCandidate expected{root.equation, root.final_loss, 0};
    const auto children = refinements(Equation{}, grammar);
    REQUIRE(children.size() == 7);
    for (std::size_t i = 0; i < children.size(); ++i) {
        FitResult fit = oracle_fit(children[i], data, opt, cfg.restarts_per_candidate,
                                   mix_seed(cfg.seed, 1, i));
        const ScoredCandidate cand{fit.equation, fit.final_loss,
                                   static_cast<int>(children[i].summands.size())};
        const bool better_loss =
            cand.train_loss < expected.train_loss ||
            (cand.train_loss == expected.train_loss &&
             cand.equation.constant_count() < expected.equation.constant_count());
        if (better_loss) expected = cand;
    }
    CHECK(serialize_equation(got.equation) == serialize_equation(expected.equation));
    CHECK(got.train_loss == expected.train_loss);
}

TEST_CASE("unbounded width at depth one equals brute force over all structures") {
    const EncodedDataset data = xor_sign_data(300, 15);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    SearchConfig cfg;
    cfg.beam_width = 1000;
    cfg.max_depth = 1;
    cfg.seed = 2;
    OptimizerConfig opt;
    const ScoredCandidate got = beam_search(data, grammar, cfg, opt);

    double best_loss = oracle_fit(Equation{}, data, opt, cfg.restarts_per_candidate,
                                  mix_seed(cfg.seed, 0, 0))
                           .final_loss;
    const auto children = refinements(Equation{}, grammar);
    for (std::size_t i = 0; i < children.size(); ++i) {
        best_loss = std::min(best_loss,
                             oracle_fit(children[i], data, opt, cfg.restarts_per_candidate,
                                        mix_seed(cfg.seed, 1, i))
                                 .final_loss);
    }
    CHECK(got.train_loss == best_loss);
}

TEST_CASE("best loss never degrades with depth and duplicates are fit once") {
    const EncodedDataset data = xor_sign_data(400, 23);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    SearchConfig cfg;
    cfg.seed = 9;
    cfg.beam_width = 10;
    cfg.max_depth = 3;
    OptimizerConfig opt;

    std::map<int, double> best_by_depth;
    std::map<int, long> evaluated_by_depth;
    const ScoredCandidate best = beam_search(
        data, grammar, cfg, opt, [&](int depth, long evaluated, double best_loss) {
            best_by_depth[depth] = best_loss;
            evaluated_by_depth[depth] = evaluated;
        });

    REQUIRE(best_by_depth.size() == 4);
    CHECK(best_by_depth[1] <= best_by_depth[0]);
    CHECK(best_by_depth[2] <= best_by_depth[1]);
    CHECK(best_by_depth[3] <= best_by_depth[2]);
    CHECK(best.train_loss == best_by_depth[3]);

    // structure-level deduplication across parents: 7 singles, C(7,2) pairs,
    // C(7,3) triples at most
    CHECK(evaluated_by_depth[1] == 1 + 7);
    CHECK(evaluated_by_depth[2] <= 1 + 7 + 21);
    CHECK(evaluated_by_depth[3] <= 1 + 7 + 21 + 35);
}

TEST_CASE("search results are deterministic across worker counts") {
    const EncodedDataset data = xor_sign_data(300, 33);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    OptimizerConfig opt;
    SearchConfig cfg;
    cfg.seed = 77;
    cfg.max_depth = 2;

    cfg.workers = 1;
    const ScoredCandidate serial = beam_search(data, grammar, cfg, opt);
    cfg.workers = 4;
    const ScoredCandidate parallel = beam_search(data, grammar, cfg, opt);
    cfg.workers = 4;
    const ScoredCandidate again = beam_search(data, grammar, cfg, opt);

    CHECK(serialize_equation(serial.equation) == serialize_equation(parallel.equation));
    CHECK(serialize_equation(serial.equation) == serialize_equation(again.equation));
    CHECK(serial.train_loss == parallel.train_loss);
}

TEST_CASE("single-class data cannot be learned") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 2).cwiseAbs();
    const EncodedDataset data = dataset_from(X, Eigen::VectorXd::Ones(20));
    GrammarConfig grammar;
    grammar.feature_count = 2;
    CHECK_THROWS_WITH_AS(beam_search(data, grammar, SearchConfig{}, OptimizerConfig{}),
                         doctest::Contains("single-class-labels"), Error);
}

TEST_CASE("a grammar with no refinements returns the optimized constant model") {
    const EncodedDataset data = linear_boundary_data(100, 3);
    GrammarConfig grammar;
    grammar.feature_count = 2;
    grammar.max_summands = 0;
    SearchConfig cfg;
    cfg.seed = 5;
    const ScoredCandidate best = beam_search(data, grammar, cfg, OptimizerConfig{});
    CHECK(best.equation.summands.empty());
    CHECK(best.depth == 0);
    CHECK(best.train_loss <= std::log(2.0) + 1e-6);
}

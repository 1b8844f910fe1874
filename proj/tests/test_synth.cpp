#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "edc/metrics.hpp"
#include "edc/synth.hpp"
#include "test_util.hpp"

using namespace edc;

namespace {

GrammarConfig search_grammar() {
    GrammarConfig g;
    g.feature_count = 2;
    return g;
}

}  // namespace

TEST_CASE("zero summands sample to a constant-only equation") {
    Rng rng(1);
    const Equation eq = sample_equation(search_grammar(), rng, 0, 0, 3.0);
    CHECK(eq.summands.empty());
    CHECK(std::abs(eq.intercept) >= 0.1);
    CHECK(std::abs(eq.intercept) <= 3.0);
}

TEST_CASE("single-summand structures are uniform over the seven options") {
    Rng rng(20240917);
    std::map<std::array<int, 4>, long> counts;
    const long draws = 7000;
    for (long i = 0; i < draws; ++i) {
        const Equation eq = sample_equation(search_grammar(), rng, 1, 1, 3.0);
        REQUIRE(eq.summands.size() == 1);
        counts[eq.summands[0].structure()] += 1;
    }
    REQUIRE(counts.size() == 7);
    // chi-square against uniform; 16.812 is the 0.99 quantile at df = 6
    const double expected = draws / 7.0;
    double chi2 = 0.0;
    for (const auto& [key, n] : counts) {
        chi2 += (n - expected) * (n - expected) / expected;
    }
    CHECK(chi2 < 16.812);
}

TEST_CASE("constants respect the magnitude floor and range") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const Equation eq = sample_equation(search_grammar(), rng, 1, 3, 3.0);
        for (double c : constants_of(eq)) {
            CHECK(std::abs(c) >= 0.1);
            CHECK(std::abs(c) <= 3.0);
        }
    }
}

TEST_CASE("the extended grammar emits power summands") {
    GrammarConfig g = search_grammar();
    g.with_power = true;
    Rng rng(6);
    bool saw_power = false;
    for (int i = 0; i < 100 && !saw_power; ++i) {
        const Equation eq = sample_equation(g, rng, 1, 3, 3.0);
        for (const auto& s : eq.summands) saw_power = saw_power || s.kind == SummandKind::power;
    }
    CHECK(saw_power);
}

TEST_CASE("noise-free draws are perfectly separated by their generator") {
    SynthConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.n_points = 500;
    Rng rng(77);
    const SynthDataset ds = gen_boundary_dataset(search_grammar(), cfg, rng);
    REQUIRE(ds.generator.has_value());
    const Eigen::VectorXd f =
        evaluate_all(*ds.generator, boundary_frame_coordinates(ds.points, cfg));
    CHECK(auc(f, ds.labels) == 1.0);
    // sign rule includes the boundary itself
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        CHECK(ds.labels[i] == (f[i] >= 0.0 ? 1.0 : 0.0));
    }
    CHECK(test::bit_equal(ds.points, ds.clean_points));
}

TEST_CASE("noise perturbs coordinates but never labels") {
    SynthConfig cfg;
    cfg.n_points = 400;
    Rng rng(78);
    const SynthDataset ds = gen_boundary_dataset(search_grammar(), cfg, rng);
    CHECK_FALSE(test::bit_equal(ds.points, ds.clean_points));
    const Eigen::VectorXd f_clean =
        evaluate_all(*ds.generator, boundary_frame_coordinates(ds.clean_points, cfg));
    for (Eigen::Index i = 0; i < f_clean.size(); ++i) {
        CHECK(ds.labels[i] == (f_clean[i] >= 0.0 ? 1.0 : 0.0));
    }
    // the pre-noise copy stays perfectly separated
    CHECK(auc(f_clean, ds.labels) == 1.0);
}

TEST_CASE("under noise the generator's own ranking is no longer perfect") {
    SynthConfig cfg;
    cfg.n_points = 2000;
    int below_one = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const SynthDataset ds = gen_boundary_dataset(search_grammar(), cfg, rng);
        const double a =
            auc(evaluate_all(*ds.generator, boundary_frame_coordinates(ds.points, cfg)), ds.labels);
        if (a < 1.0) ++below_one;
    }
    CHECK(below_one == 5);
}

TEST_CASE("class balance always lands inside the acceptance window") {
    SynthConfig cfg;
    cfg.n_points = 300;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed * 13 + 1);
        const SynthDataset ds = gen_boundary_dataset(search_grammar(), cfg, rng);
        const double balance = ds.labels.mean();
        CHECK(balance >= 0.05);
        CHECK(balance <= 0.95);
    }
}

TEST_CASE("beyond-grammar generators always carry a power summand") {
    SynthConfig cfg;
    cfg.n_points = 300;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 100);
        const SynthDataset ds = gen_beyond_dataset(cfg, rng);
        REQUIRE(ds.generator.has_value());
        const bool has_power = std::any_of(
            ds.generator->summands.begin(), ds.generator->summands.end(),
            [](const Summand& s) { return s.kind == SummandKind::power; });
        CHECK(has_power);
    }
}

TEST_CASE("gaussian cluster datasets have an exact one-third prior") {
    SynthConfig cfg;
    Rng rng(9);
    const SynthDataset ds = gen_gaussian_clusters(cfg, rng);
    REQUIRE(ds.clusters.size() == 6);
    CHECK(ds.points.rows() == 1998);  // 2000 rounded down to a multiple of six
    CHECK(ds.labels.sum() == doctest::Approx(1998.0 / 3.0));

    int positive_clusters = 0;
    for (const auto& c : ds.clusters) {
        positive_clusters += c.label;
        // SPD covariance: positive diagonal, symmetric, positive determinant
        CHECK(c.covariance(0, 1) == doctest::Approx(c.covariance(1, 0)).epsilon(1e-12));
        CHECK(c.covariance.determinant() > 0.0);
        CHECK(c.covariance(0, 0) > 0.0);
    }
    CHECK(positive_clusters == 2);
}

TEST_CASE("generators are deterministic under a fixed seed") {
    SynthConfig cfg;
    cfg.n_points = 200;

    Rng a(4242), b(4242);
    const SynthDataset da = gen_boundary_dataset(search_grammar(), cfg, a);
    const SynthDataset db = gen_boundary_dataset(search_grammar(), cfg, b);
    CHECK(test::bit_equal(da.points, db.points));
    CHECK(test::bit_equal(da.labels, db.labels));
    CHECK(test::bit_equal(constants_of(*da.generator), constants_of(*db.generator)));

    Rng c(11), d(11);
    const SynthDataset dc = gen_gaussian_clusters(cfg, c);
    const SynthDataset dd = gen_gaussian_clusters(cfg, d);
    CHECK(test::bit_equal(dc.points, dd.points));
    CHECK(test::bit_equal(dc.labels, dd.labels));
}

TEST_CASE("csv and sidecar files round-trip the dataset") {
    SynthConfig cfg;
    cfg.n_points = 50;
    Rng rng(31);
    const SynthDataset ds = gen_boundary_dataset(search_grammar(), cfg, rng);

    const std::string csv = "./synth_test.csv";
    const std::string sidecar = "./synth_test.txt";
    write_synth_csv(ds, csv);
    write_synth_sidecar(ds, sidecar, "within-noise", 31);

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,label");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 50);

    std::ifstream meta(sidecar);
    std::string all((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
    CHECK(all.find("seed: 31") != std::string::npos);
    CHECK(all.find("boundary:") != std::string::npos);
    std::remove(csv.c_str());
    std::remove(sidecar.c_str());
}

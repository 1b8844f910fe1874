#include "edc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace edc {

namespace {

constexpr double kMinBalance = 0.05;
constexpr double kMaxBalance = 0.95;
constexpr int kMaxRejections = 50;

double sample_constant(Rng& rng, double range) {
    double c;
    do {
        c = rng.uniform(-range, range);
    } while (std::abs(c) < 0.1);
    return c;
}

Eigen::MatrixXd domain_to_unit(const Eigen::MatrixXd& points, const SynthConfig& cfg) {
    Eigen::MatrixXd unit(points.rows(), points.cols());
    for (int j = 0; j < 2; ++j) {
        unit.col(j) = (points.col(j).array() - cfg.domain_min[j]) /
                      (cfg.domain_max[j] - cfg.domain_min[j]);
    }
    return unit;
}

}  // namespace

Eigen::MatrixXd boundary_frame_coordinates(const Eigen::MatrixXd& points, const SynthConfig& cfg) {
    return domain_to_unit(points, cfg);
}

void SynthConfig::validate() const {
    if (n_points < 1) throw_config("invalid-synth", "n_points must be >= 1");
    if (noise_sigma < 0.0) throw_config("invalid-synth", "noise_sigma must be >= 0");
    if ((domain_max - domain_min).minCoeff() <= 0.0) {
        throw_config("invalid-synth", "domain must have positive extent");
    }
    if (min_summands < 0 || max_summands < min_summands) {
        throw_config("invalid-synth", "need 0 <= min_summands <= max_summands");
    }
    if (constant_range <= 0.1) throw_config("invalid-synth", "constant_range must exceed 0.1");
}

Equation sample_equation(const GrammarConfig& g, Rng& rng, int min_summands, int max_summands,
                         double constant_range) {
    g.validate();
    Equation eq;
    eq.intercept = sample_constant(rng, constant_range);
    const int target =
        min_summands + static_cast<int>(rng.uniform_int(
                           static_cast<std::uint64_t>(max_summands - min_summands + 1)));
    for (int i = 0; i < target; ++i) {
        std::vector<Summand> admissible;
        for (const Summand& shape : grammar_structures(g)) {
            const bool dup = std::any_of(eq.summands.begin(), eq.summands.end(),
                                         [&](const Summand& s) { return same_structure(s, shape); });
            if (!dup) admissible.push_back(shape);
        }
        if (admissible.empty()) {
            throw_data("generation-failed", "grammar exhausted before reaching requested size");
        }
        Summand chosen = admissible[rng.uniform_int(admissible.size())];
        chosen.c = sample_constant(rng, constant_range);
        if (chosen.kind == SummandKind::exponential) {
            chosen.c_in = sample_constant(rng, constant_range);
        }
        eq.summands.push_back(chosen);
        eq = canonicalize(eq);
    }
    return eq;
}

std::optional<SynthDataset> try_boundary_draw(const Equation& eq, const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = cfg.n_points;
    SynthDataset ds;
    ds.clean_points.resize(n, 2);
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            ds.clean_points(i, j) = rng.uniform(cfg.domain_min[j], cfg.domain_max[j]);
        }
    }
    // Labels come from the clean coordinates; a point exactly on the boundary
    // is positive. The boundary equation lives on the unit square (the same
    // frame the classifier searches in), so coordinates are rescaled by the
    // domain before evaluation.
    const Eigen::VectorXd values = evaluate_all(eq, domain_to_unit(ds.clean_points, cfg));
    for (int i = 0; i < n; ++i) ds.labels[i] = values[i] >= 0.0 ? 1.0 : 0.0;

    const double balance = ds.labels.mean();
    if (balance < kMinBalance || balance > kMaxBalance) return std::nullopt;

    ds.points = ds.clean_points;
    if (cfg.noise_sigma > 0.0) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 2; ++j) ds.points(i, j) += rng.normal(0.0, cfg.noise_sigma);
        }
    }
    ds.generator = eq;
    return ds;
}

SynthDataset gen_boundary_dataset(const GrammarConfig& g, const SynthConfig& cfg, Rng& rng,
                                  bool require_power) {
    cfg.validate();
    for (int rejections = 0; rejections <= kMaxRejections; ++rejections) {
        Equation eq;
        do {
            eq = sample_equation(g, rng, cfg.min_summands, cfg.max_summands, cfg.constant_range);
        } while (require_power &&
                 std::none_of(eq.summands.begin(), eq.summands.end(),
                              [](const Summand& s) { return s.kind == SummandKind::power; }));
        if (auto ds = try_boundary_draw(eq, cfg, rng)) return std::move(*ds);
    }
    throw_data("generation-failed",
               "no draw reached a class balance in [5%, 95%] after 50 attempts");
}

SynthDataset gen_beyond_dataset(const SynthConfig& cfg, Rng& rng) {
    GrammarConfig extended;
    extended.feature_count = 2;
    extended.max_summands = cfg.max_summands;
    extended.with_power = true;
    return gen_boundary_dataset(extended, cfg, rng, /*require_power=*/true);
}

SynthDataset gen_gaussian_clusters(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    constexpr int kClusters = 6;
    constexpr int kPositive = 2;
    const int per_cluster = cfg.n_points / kClusters;
    if (per_cluster < 1) throw_config("invalid-synth", "n_points must be at least 6");

    SynthDataset ds;
    std::vector<int> cluster_ids(kClusters);
    std::iota(cluster_ids.begin(), cluster_ids.end(), 0);

    for (int c = 0; c < kClusters; ++c) {
        ClusterSpec spec;
        for (int j = 0; j < 2; ++j) spec.mean[j] = rng.uniform(cfg.domain_min[j], cfg.domain_max[j]);
        const double s1 = rng.uniform(0.5, 2.5);
        const double s2 = rng.uniform(0.5, 2.5);
        const double theta = rng.uniform(0.0, 6.283185307179586);
        Eigen::Matrix2d rot;
        rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
        spec.covariance = rot * Eigen::Vector2d(s1 * s1, s2 * s2).asDiagonal() * rot.transpose();
        spec.weight = 1.0 / kClusters;
        ds.clusters.push_back(spec);
    }

    // two clusters drawn for the positive class
    rng.shuffle(cluster_ids);
    for (int i = 0; i < kPositive; ++i) ds.clusters[cluster_ids[i]].label = 1;

    const int n = per_cluster * kClusters;
    ds.clean_points.resize(n, 2);
    ds.labels.resize(n);
    int row = 0;
    for (const auto& spec : ds.clusters) {
        const Eigen::LLT<Eigen::Matrix2d> llt(spec.covariance);
        const Eigen::Matrix2d chol = llt.matrixL();
        for (int i = 0; i < per_cluster; ++i, ++row) {
            const Eigen::Vector2d z(rng.normal(), rng.normal());
            ds.clean_points.row(row) = (spec.mean + chol * z).transpose();
            ds.labels[row] = spec.label;
        }
    }
    ds.points = ds.clean_points;
    return ds;
}

void write_synth_csv(const SynthDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_data("io-error", "cannot write " + path);
    out << "x1,x2,label\n";
    char buf[80];
    for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d", ds.points(i, 0), ds.points(i, 1),
                      ds.labels[i] > 0.5 ? 1 : 0);
        out << buf << "\n";
    }
    if (!out) throw_data("io-error", "write failed for " + path);
}

void write_synth_sidecar(const SynthDataset& ds, const std::string& path, const std::string& protocol,
                         std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw_data("io-error", "cannot write " + path);
    out << "protocol: " << protocol << "\n";
    out << "seed: " << seed << "\n";
    out << "points: " << ds.points.rows() << "\n";
    out << "positive_fraction: " << ds.labels.mean() << "\n";
    if (ds.generator) {
        // u1/u2 are the domain coordinates rescaled to [0,1]
        out << "boundary: " << to_infix(*ds.generator, {"u1", "u2"}, 17) << "\n";
        out << "boundary_frame: unit square; u_j = (x_j - domain_min_j) / (domain_max_j - domain_min_j)\n";
    }
    for (std::size_t c = 0; c < ds.clusters.size(); ++c) {
        const auto& k = ds.clusters[c];
        out << "cluster " << c << ": label=" << k.label << " mean=(" << k.mean[0] << ", " << k.mean[1]
            << ") cov=[[" << k.covariance(0, 0) << ", " << k.covariance(0, 1) << "], ["
            << k.covariance(1, 0) << ", " << k.covariance(1, 1) << "]] weight=" << k.weight << "\n";
    }
    if (!out) throw_data("io-error", "write failed for " + path);
}

}  // namespace edc

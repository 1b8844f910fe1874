#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edc/equation.hpp"
#include "edc/rng.hpp"

namespace edc {

struct SynthConfig {
    int n_points = 2000;
    Eigen::Vector2d domain_min{-10.0, -10.0};
    Eigen::Vector2d domain_max{10.0, 10.0};
    double noise_sigma = 2.0;
    double constant_range = 3.0;  // constants Uniform(+-range), re-drawn while |c| < 0.1
    int min_summands = 1;
    int max_summands = 3;

    void validate() const;
};

struct ClusterSpec {
    Eigen::Vector2d mean;
    Eigen::Matrix2d covariance;  // R diag(s1^2, s2^2) R^T
    int label = 0;
    double weight = 0.0;
};

struct SynthDataset {
    Eigen::MatrixXd points;        // observed coordinates (noise applied)
    Eigen::MatrixXd clean_points;  // coordinates before noise
    Eigen::VectorXd labels;        // assigned before noise, from the clean points
    std::optional<Equation> generator;
    std::vector<ClusterSpec> clusters;  // gaussian protocol only
};

// Random equation from the grammar: summand count uniform in
// [min_summands, max_summands], each summand shape uniform among the shapes
// not yet present, every constant Uniform(+-constant_range) with magnitudes
// below 0.1 re-drawn.
Equation sample_equation(const GrammarConfig& g, Rng& rng, int min_summands, int max_summands,
                         double constant_range);

// Boundary equations are expressed over the unit square, the same frame the
// search operates in after min-max scaling; this maps raw domain coordinates
// into that frame.
Eigen::MatrixXd boundary_frame_coordinates(const Eigen::MatrixXd& points, const SynthConfig& cfg);

// One labeling attempt with the given boundary equation: points uniform over
// the domain, label = [f(x') >= 0] on the rescaled coordinates, then
// coordinate noise. Returns nothing when the class balance falls outside
// [5%, 95%].
std::optional<SynthDataset> try_boundary_draw(const Equation& eq, const SynthConfig& cfg, Rng& rng);

// Samples boundary equations until a draw with acceptable balance succeeds
// (at most 50 rejections). require_power additionally insists the generating
// equation carries a cubic or quartic term, for targets outside the search
// grammar.
SynthDataset gen_boundary_dataset(const GrammarConfig& g, const SynthConfig& cfg, Rng& rng,
                                  bool require_power = false);

// Extended-grammar protocol: power summands enabled and required.
SynthDataset gen_beyond_dataset(const SynthConfig& cfg, Rng& rng);

// Six random Gaussian clusters, two labeled positive. Cluster sizes are equal
// (n_points rounded down to a multiple of six), so the class prior is exactly
// one third.
SynthDataset gen_gaussian_clusters(const SynthConfig& cfg, Rng& rng);

// x1,x2,label CSV plus a sidecar text file recording seed, protocol and the
// generating equation or cluster specs.
void write_synth_csv(const SynthDataset& ds, const std::string& path);
void write_synth_sidecar(const SynthDataset& ds, const std::string& path, const std::string& protocol,
                         std::uint64_t seed);

}  // namespace edc

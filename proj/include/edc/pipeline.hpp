#pragma once

#include <string>
#include <vector>

#include "edc/dataset.hpp"
#include "edc/model_io.hpp"
#include "edc/search.hpp"
#include "edc/synth.hpp"

namespace edc {

struct PipelineConfig {
    GrammarConfig grammar;  // feature_count is overwritten from the data
    SearchConfig search;
    OptimizerConfig optimizer;
    double rare_threshold = 0.02;

    // canonical rendering of every knob; hashed into model metadata
    std::string canonical_text() const;
};

// Train on an already encoded dataset. The returned model has no feature
// specs when the dataset did not come from a raw table.
ModelFile fit_encoded(const EncodedDataset& data, const PipelineConfig& cfg,
                      std::vector<FeatureSpec> specs = {}, const ProgressFn& progress = {});

// Encode + normalize + search + threshold on training scores.
ModelFile fit_table(const RawTable& features, const Eigen::VectorXd& y, const PipelineConfig& cfg,
                    const std::vector<std::string>& categorical_overrides = {},
                    const ProgressFn& progress = {});

struct Prediction {
    Eigen::VectorXd probability;
    std::vector<int> label;
};

// Encode raw rows with the model's frozen feature specs and score them.
Prediction predict_table(const ModelFile& model, const RawTable& table);

// Normalized margins f(x) for raw rows; predict_table composes this with the
// sigmoid and threshold.
Eigen::VectorXd model_margins(const ModelFile& model, const RawTable& table);

struct CvReport {
    std::vector<double> fold_auc;
    std::vector<std::string> fold_equations;  // denormalized, display precision
    double mean_auc = 0.0;
    double sd_auc = 0.0;  // n-1 denominator
    double seconds = 0.0;
};

CvReport run_cv(const RawTable& features, const Eigen::VectorXd& y, int folds,
                const PipelineConfig& cfg, const std::vector<std::string>& categorical_overrides = {});

struct ExperimentResult {
    std::vector<double> edc_auc;
    std::vector<double> original_auc;  // empty for the gaussian protocol
    std::vector<std::string> equations;
    double edc_mean = 0.0, edc_sd = 0.0;
    double original_mean = 0.0, original_sd = 0.0;
    double t = 0.0;
    long df = 0;
    double p_two_sided = 1.0;
    double p_one_sided_edc_better = 1.0;
    bool has_original = false;
    double seconds = 0.0;
};

// Protocols: "within" (noise-free), "within-noise", "beyond-noise", "gaussian".
SynthConfig protocol_config(const std::string& protocol, const SynthConfig& base);
SynthDataset generate_protocol_dataset(const std::string& protocol, const SynthConfig& cfg,
                                       std::uint64_t seed);

// Fit one model per generated dataset and compare against the generating
// boundary where one exists.
ExperimentResult run_experiment(const std::string& protocol, int count, std::uint64_t seed,
                                const PipelineConfig& cfg, const SynthConfig& synth,
                                const std::string& grid_out_dir = {});

double mean_of(const std::vector<double>& v);
double sd_of(const std::vector<double>& v);  // sample sd, n-1

// EncodedDataset straight from a points matrix (feature names x1..xm),
// normalization fitted on all rows.
EncodedDataset encode_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& labels);

}  // namespace edc

#include "edc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "edc/metrics.hpp"

namespace edc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> default_point_names(int m) {
    std::vector<std::string> names;
    names.reserve(m);
    for (int i = 0; i < m; ++i) names.push_back("x" + std::to_string(i + 1));
    return names;
}

ModelFile assemble_model(const EncodedDataset& data, const PipelineConfig& cfg,
                         const ScoredCandidate& best, std::vector<FeatureSpec> specs) {
    const Eigen::VectorXd probs = sigmoid(evaluate_all(best.equation, data.X));
    const ThresholdResult thr = best_threshold(probs, data.y);

    ModelFile model;
    model.equation = best.equation;
    model.features = std::move(specs);
    model.norm.mins = data.norm.mins;
    model.norm.ranges = data.norm.ranges;
    model.norm.degenerate = data.norm.degenerate;
    model.threshold = thr.threshold;
    model.seed = cfg.search.seed;
    model.config_digest = config_digest(cfg.canonical_text());
    model.train_loss = best.train_loss;
    model.train_auc = auc(probs, data.y);
    return model;
}

}  // namespace

std::string PipelineConfig::canonical_text() const {
    std::ostringstream s;
    s.precision(17);
    s << "grammar:" << grammar.feature_count << "," << grammar.max_summands << ","
      << grammar.max_constants << "," << grammar.with_linear << "," << grammar.with_exp << ","
      << grammar.with_product << "," << grammar.with_power << ";search:" << search.beam_width << ","
      << search.max_depth << "," << search.restarts_per_candidate << "," << search.seed
      << ";sgd:" << optimizer.sgd.learning_rate << "," << optimizer.sgd.epochs << ","
      << optimizer.sgd.batch_size << ";hill:" << optimizer.hill.budget << ","
      << optimizer.hill.random_fraction << "," << optimizer.hill.top_k << ","
      << optimizer.hill.step_size << ";init:" << optimizer.init_range
      << ";force_sgd:" << optimizer.force_sgd << ";rare:" << rare_threshold;
    return s.str();
}

ModelFile fit_encoded(const EncodedDataset& data, const PipelineConfig& cfg,
                      std::vector<FeatureSpec> specs, const ProgressFn& progress) {
    PipelineConfig run = cfg;
    run.grammar.feature_count = data.feature_count();
    run.optimizer.seed = run.search.seed;
    const ScoredCandidate best =
        beam_search(data, run.grammar, run.search, run.optimizer, progress);
    EncodedDataset named = data;
    if (named.feature_names.empty()) named.feature_names = default_point_names(data.feature_count());
    return assemble_model(named, run, best, std::move(specs));
}

ModelFile fit_table(const RawTable& features, const Eigen::VectorXd& y, const PipelineConfig& cfg,
                    const std::vector<std::string>& categorical_overrides,
                    const ProgressFn& progress) {
    EncodedDataset data = encode_dataset(features, y, cfg.rare_threshold, categorical_overrides);
    std::vector<int> all_rows(features.row_count());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const Encoder enc =
        Encoder::fit(features, all_rows, cfg.rare_threshold, categorical_overrides);
    return fit_encoded(data, cfg, enc.features(), progress);
}

Eigen::VectorXd model_margins(const ModelFile& model, const RawTable& table) {
    if (model.features.empty()) {
        throw_data("invalid-model", "model carries no feature specs; cannot encode raw rows");
    }
    const Encoder enc = Encoder::from_specs(model.features);
    const Eigen::MatrixXd raw = enc.transform(table);
    const Eigen::MatrixXd X = model.norm.apply(raw);
    return evaluate_all(model.equation, X);
}

Prediction predict_table(const ModelFile& model, const RawTable& table) {
    Prediction out;
    if (table.row_count() == 0) {
        out.probability.resize(0);
        return out;
    }
    out.probability = sigmoid(model_margins(model, table));
    out.label.reserve(out.probability.size());
    for (Eigen::Index i = 0; i < out.probability.size(); ++i) {
        out.label.push_back(out.probability[i] >= model.threshold ? 1 : 0);
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

CvReport run_cv(const RawTable& features, const Eigen::VectorXd& y, int folds,
                const PipelineConfig& cfg, const std::vector<std::string>& categorical_overrides) {
    const auto start = Clock::now();
    const FoldPlan plan = stratified_kfold(y, folds, cfg.search.seed);

    CvReport report;
    for (int fold = 0; fold < folds; ++fold) {
        const std::vector<int> train = plan.train_rows(fold);
        const std::vector<int> test = plan.test_rows(fold);

        // every fitted statistic comes from the training rows of this fold
        const Encoder enc = Encoder::fit(features, train, cfg.rare_threshold, categorical_overrides);
        const Eigen::MatrixXd raw_train = enc.transform(features, train);
        const NormParams norm = NormParams::fit(raw_train);

        EncodedDataset train_ds;
        train_ds.X = norm.apply(raw_train);
        train_ds.norm = norm;
        train_ds.feature_names = enc.feature_names();
        train_ds.y.resize(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) train_ds.y[i] = y[train[i]];

        PipelineConfig fold_cfg = cfg;
        fold_cfg.search.seed = mix_seed(cfg.search.seed, 0x666f6c64ULL, fold);
        ModelFile model = fit_encoded(train_ds, fold_cfg, enc.features());

        const Eigen::MatrixXd raw_test = enc.transform(features, test);
        const Eigen::VectorXd margins = evaluate_all(model.equation, norm.apply(raw_test));
        Eigen::VectorXd y_test(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) y_test[i] = y[test[i]];

        report.fold_auc.push_back(auc(sigmoid(margins), y_test));
        report.fold_equations.push_back(
            to_infix(denormalize(model.equation, norm.mins, norm.ranges), enc.feature_names()));
    }
    report.mean_auc = mean_of(report.fold_auc);
    report.sd_auc = sd_of(report.fold_auc);
    report.seconds = elapsed_seconds(start);
    return report;
}

SynthConfig protocol_config(const std::string& protocol, const SynthConfig& base) {
    SynthConfig cfg = base;
    if (protocol == "within") {
        cfg.noise_sigma = 0.0;
    } else if (protocol == "within-noise" || protocol == "beyond-noise" || protocol == "gaussian") {
        // defaults apply
    } else {
        throw_config("unknown-protocol", "protocol must be within, within-noise, beyond-noise or gaussian");
    }
    return cfg;
}

SynthDataset generate_protocol_dataset(const std::string& protocol, const SynthConfig& cfg,
                                       std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x73796e74ULL));
    if (protocol == "gaussian") return gen_gaussian_clusters(cfg, rng);
    if (protocol == "beyond-noise") return gen_beyond_dataset(cfg, rng);
    GrammarConfig g;
    g.feature_count = 2;
    g.max_summands = cfg.max_summands;
    return gen_boundary_dataset(g, cfg, rng);
}

EncodedDataset encode_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& labels) {
    EncodedDataset ds;
    ds.norm = NormParams::fit(points);
    ds.X = ds.norm.apply(points);
    ds.y = labels;
    ds.feature_names = default_point_names(static_cast<int>(points.cols()));
    ds.validate();
    return ds;
}

namespace {

void write_grid_csv(const std::string& path, const ModelFile& model, const SynthDataset& ds,
                    const SynthConfig& synth) {
    std::ofstream out(path);
    if (!out) throw_data("io-error", "cannot write " + path);
    constexpr int kSteps = 200;
    out << "x1,x2,f";
    if (ds.generator) out << ",f_original";
    out << "\n";
    const DisplayExpression expr = denormalize(model.equation, model.norm.mins, model.norm.ranges);
    for (int i = 0; i <= kSteps; ++i) {
        for (int j = 0; j <= kSteps; ++j) {
            Eigen::VectorXd raw(2);
            raw[0] = synth.domain_min[0] +
                     (synth.domain_max[0] - synth.domain_min[0]) * i / static_cast<double>(kSteps);
            raw[1] = synth.domain_min[1] +
                     (synth.domain_max[1] - synth.domain_min[1]) * j / static_cast<double>(kSteps);
            out << raw[0] << "," << raw[1] << "," << evaluate(expr, raw);
            if (ds.generator) {
                const Eigen::VectorXd unit = boundary_frame_coordinates(raw.transpose(), synth).transpose();
                out << "," << evaluate(*ds.generator, unit);
            }
            out << "\n";
        }
    }
}

}  // namespace

ExperimentResult run_experiment(const std::string& protocol, int count, std::uint64_t seed,
                                const PipelineConfig& cfg, const SynthConfig& synth,
                                const std::string& grid_out_dir) {
    const auto start = Clock::now();
    const SynthConfig proto_cfg = protocol_config(protocol, synth);

    ExperimentResult result;
    result.has_original = protocol != "gaussian";
    for (int i = 0; i < count; ++i) {
        const std::uint64_t dataset_seed = seed + static_cast<std::uint64_t>(i);
        const SynthDataset ds = generate_protocol_dataset(protocol, proto_cfg, dataset_seed);

        EncodedDataset data = encode_points(ds.points, ds.labels);
        PipelineConfig fit_cfg = cfg;
        fit_cfg.search.seed = mix_seed(seed, 0x65787065ULL, i);
        const ModelFile model = fit_encoded(data, fit_cfg);

        result.edc_auc.push_back(model.train_auc);
        result.equations.push_back(to_infix(
            denormalize(model.equation, model.norm.mins, model.norm.ranges), data.feature_names));
        if (ds.generator) {
            const Eigen::VectorXd f_orig =
                evaluate_all(*ds.generator, boundary_frame_coordinates(ds.points, proto_cfg));
            result.original_auc.push_back(auc(f_orig, ds.labels));
        }

        if (!grid_out_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof(name), "/grid_%03d.csv", i);
            write_grid_csv(grid_out_dir + name, model, ds, proto_cfg);
        }
    }

    result.edc_mean = mean_of(result.edc_auc);
    result.edc_sd = sd_of(result.edc_auc);
    if (result.has_original && count >= 2) {
        result.original_mean = mean_of(result.original_auc);
        result.original_sd = sd_of(result.original_auc);
        const Eigen::Map<const Eigen::VectorXd> a(result.edc_auc.data(), result.edc_auc.size());
        const Eigen::Map<const Eigen::VectorXd> b(result.original_auc.data(),
                                                  result.original_auc.size());
        try {
            const TTestResult t = paired_t_test(a, b);
            result.t = t.t;
            result.df = t.df;
            result.p_two_sided = t.p_two_sided;
            result.p_one_sided_edc_better = student_t_sf(t.t, t.df);
        } catch (const Error&) {
            // zero-variance differences (e.g. every AUC saturated at 1)
            result.t = 0.0;
            result.df = count - 1;
            result.p_two_sided = 1.0;
            result.p_one_sided_edc_better = result.edc_mean >= result.original_mean ? 0.5 : 1.0;
        }
    }
    result.seconds = elapsed_seconds(start);
    return result;
}

}  // namespace edc

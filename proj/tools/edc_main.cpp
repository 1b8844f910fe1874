#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "edc/metrics.hpp"
#include "edc/pipeline.hpp"

namespace {

using namespace edc;

struct CommonFlags {
    std::uint64_t seed = 0;
    int beam_width = 10;
    int max_depth = 3;
    int restarts = 3;
    int workers = 0;
    double sgd_lr = 0.1;
    int sgd_epochs = 200;
    int sgd_batch = 32;
    int hill_budget = 2000;
    double hill_fraction = 0.2;
    int hill_topk = 5;
    double hill_step = 0.05;
    double init_range = 1.0;
    bool force_sgd = false;
    bool verbose = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--seed", f.seed, "Seed for all randomized steps");
    cmd->add_option("--beam-width", f.beam_width, "Candidates kept per search depth");
    cmd->add_option("--max-depth", f.max_depth, "Maximum number of summands");
    cmd->add_option("--restarts", f.restarts, "Random restarts per candidate");
    cmd->add_option("--workers", f.workers, "Parallel candidate fits (0 = hardware)");
    cmd->add_option("--sgd-lr", f.sgd_lr, "SGD learning rate");
    cmd->add_option("--sgd-epochs", f.sgd_epochs, "SGD epochs");
    cmd->add_option("--sgd-batch", f.sgd_batch, "SGD minibatch size");
    cmd->add_option("--hill-budget", f.hill_budget, "Hill climber evaluation budget");
    cmd->add_option("--hill-fraction", f.hill_fraction, "Budget share for random probes");
    cmd->add_option("--hill-topk", f.hill_topk, "Probes promoted to climb starts");
    cmd->add_option("--hill-step", f.hill_step, "Hill climber step size");
    cmd->add_option("--init-range", f.init_range, "Uniform init range for constants");
    cmd->add_flag("--force-sgd", f.force_sgd, "Use SGD even for exponential summands");
    cmd->add_flag("-v,--verbose", f.verbose, "Search progress on stderr");
}

PipelineConfig make_config(const CommonFlags& f) {
    PipelineConfig cfg;
    cfg.search.beam_width = f.beam_width;
    cfg.search.max_depth = f.max_depth;
    cfg.search.restarts_per_candidate = f.restarts;
    cfg.search.seed = f.seed;
    cfg.search.workers = f.workers;
    cfg.grammar.max_summands = f.max_depth;
    cfg.optimizer.sgd.learning_rate = f.sgd_lr;
    cfg.optimizer.sgd.epochs = f.sgd_epochs;
    cfg.optimizer.sgd.batch_size = f.sgd_batch;
    cfg.optimizer.hill.budget = f.hill_budget;
    cfg.optimizer.hill.random_fraction = f.hill_fraction;
    cfg.optimizer.hill.top_k = f.hill_topk;
    cfg.optimizer.hill.step_size = f.hill_step;
    cfg.optimizer.init_range = f.init_range;
    cfg.optimizer.force_sgd = f.force_sgd;
    cfg.optimizer.seed = f.seed;
    return cfg;
}

struct SchemaFlags {
    std::string schema_path;
    std::string target_column = "label";
    std::string positive_label = "1";
    std::string delimiter = ",";
};

void add_schema_flags(CLI::App* cmd, SchemaFlags& s) {
    cmd->add_option("--schema", s.schema_path, "Schema file (key = value lines)");
    cmd->add_option("--target-column", s.target_column, "Name of the label column");
    cmd->add_option("--positive-label", s.positive_label, "Value of the positive class");
    cmd->add_option("--delimiter", s.delimiter, "CSV delimiter");
}

CsvSchema resolve_schema(const SchemaFlags& s, const CLI::App* cmd) {
    CsvSchema schema;
    if (!s.schema_path.empty()) schema = parse_schema_file(s.schema_path);
    // explicit flags override the schema file
    if (schema.target_column.empty() || cmd->count("--target-column") > 0) {
        schema.target_column = s.target_column;
    }
    if (schema.positive_label.empty() || cmd->count("--positive-label") > 0) {
        schema.positive_label = s.positive_label;
    }
    if (cmd->count("--delimiter") > 0) {
        if (s.delimiter.size() != 1) throw_config("invalid-schema", "delimiter must be one character");
        schema.delimiter = s.delimiter[0];
    }
    return schema;
}

ProgressFn progress_logger(bool verbose) {
    if (!verbose) return {};
    return [](int depth, long evaluated, double best_loss) {
        std::fprintf(stderr, "depth %d: %ld candidates evaluated, best loss %.6f\n", depth,
                     evaluated, best_loss);
    };
}

std::vector<std::string> display_names(const ModelFile& model) {
    std::vector<std::string> names;
    names.reserve(model.features.size());
    for (const auto& f : model.features) names.push_back(f.name);
    return names;
}

int cmd_fit(const std::string& csv_path, const SchemaFlags& sflags, const CLI::App* cmd,
            const CommonFlags& flags, const std::string& out_path) {
    const CsvSchema schema = resolve_schema(sflags, cmd);
    const LabeledTable data = load_csv(csv_path, schema);
    const PipelineConfig cfg = make_config(flags);

    const ModelFile model = fit_table(data.features, data.y, cfg, schema.categorical_overrides,
                                      progress_logger(flags.verbose));
    save_model(model, out_path);

    const DisplayExpression expr =
        denormalize(model.equation, model.norm.mins, model.norm.ranges);
    std::printf("f(x) = %s\n", to_infix(expr, display_names(model)).c_str());
    std::printf("train log loss: %.6f\n", model.train_loss);
    std::printf("train AUC:      %.4f\n", model.train_auc);
    std::printf("threshold:      %.6g\n", model.threshold);
    std::printf("model written to %s\n", out_path.c_str());
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& csv_path,
                const std::string& out_path) {
    const ModelFile model = load_model(model_path);
    const RawTable table = parse_csv(csv_path);
    const Prediction pred = predict_table(model, table);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw_data("io-error", "cannot write " + out_path);
        out = &file;
    }
    *out << "row_id,probability,label\n";
    char buf[64];
    for (Eigen::Index i = 0; i < pred.probability.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%d", static_cast<long long>(i),
                      pred.probability[i], pred.label[i]);
        *out << buf << "\n";
    }
    return 0;
}

int cmd_cv(const std::string& csv_path, const SchemaFlags& sflags, const CLI::App* cmd,
           const CommonFlags& flags, int folds, const std::string& out_path) {
    const CsvSchema schema = resolve_schema(sflags, cmd);
    const LabeledTable data = load_csv(csv_path, schema);
    const PipelineConfig cfg = make_config(flags);

    const CvReport report = run_cv(data.features, data.y, folds, cfg, schema.categorical_overrides);

    std::printf("%-6s %-10s %s\n", "fold", "test AUC", "equation");
    for (std::size_t i = 0; i < report.fold_auc.size(); ++i) {
        std::printf("%-6zu %-10.4f %s\n", i, report.fold_auc[i], report.fold_equations[i].c_str());
    }
    std::printf("mean AUC: %.4f (+-%.4f) over %d folds, %.1f s\n", report.mean_auc, report.sd_auc,
                folds, report.seconds);

    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) throw_data("io-error", "cannot write " + out_path);
        file << "fold,test_auc,equation\n";
        for (std::size_t i = 0; i < report.fold_auc.size(); ++i) {
            file << i << "," << report.fold_auc[i] << ",\"" << report.fold_equations[i] << "\"\n";
        }
        file << "mean," << report.mean_auc << ",\n";
        file << "sd," << report.sd_auc << ",\n";
    }
    return 0;
}

int cmd_synth(const std::string& protocol, int count, std::uint64_t seed,
              const std::string& outdir, const SynthConfig& base) {
    const SynthConfig cfg = protocol_config(protocol, base);
    std::filesystem::create_directories(outdir);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t dataset_seed = seed + static_cast<std::uint64_t>(i);
        const SynthDataset ds = generate_protocol_dataset(protocol, cfg, dataset_seed);
        char stem[64];
        std::snprintf(stem, sizeof(stem), "%s_%03d", protocol.c_str(), i);
        write_synth_csv(ds, outdir + "/" + stem + ".csv");
        write_synth_sidecar(ds, outdir + "/" + stem + ".txt", protocol, dataset_seed);
    }
    std::printf("wrote %d %s dataset(s) to %s\n", count, protocol.c_str(), outdir.c_str());
    return 0;
}

int cmd_experiment(const std::string& protocol, int count, std::uint64_t seed,
                   const CommonFlags& flags, const SynthConfig& synth, const std::string& grid_out,
                   const std::string& out_path) {
    if (!grid_out.empty()) std::filesystem::create_directories(grid_out);
    const PipelineConfig cfg = make_config(flags);
    const ExperimentResult r = run_experiment(protocol, count, seed, cfg, synth, grid_out);

    std::printf("%-24s %-18s %-18s\n", "protocol", "EDC AUC", "original DB AUC");
    if (r.has_original) {
        std::printf("%-24s %.3f (+-%.3f)    %.3f (+-%.3f)\n", protocol.c_str(), r.edc_mean, r.edc_sd,
                    r.original_mean, r.original_sd);
        std::printf("paired t-test: t(%ld) = %.3f, two-sided p = %.4g, one-sided p = %.4g\n", r.df,
                    r.t, r.p_two_sided, r.p_one_sided_edc_better);
    } else {
        std::printf("%-24s %.3f (+-%.3f)    %-18s\n", protocol.c_str(), r.edc_mean, r.edc_sd, "n/a");
    }
    std::printf("%d dataset(s), %.1f s\n", count, r.seconds);

    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) throw_data("io-error", "cannot write " + out_path);
        file << "dataset,edc_auc,original_auc,equation\n";
        for (std::size_t i = 0; i < r.edc_auc.size(); ++i) {
            file << i << "," << r.edc_auc[i] << ",";
            if (r.has_original) file << r.original_auc[i];
            file << ",\"" << r.equations[i] << "\"\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discovers an analytic decision-boundary equation for binary classification"};
    app.require_subcommand(1);

    CommonFlags flags;
    SchemaFlags sflags;
    std::string csv_path, model_path, out_path;
    int folds = 10;

    auto* fit = app.add_subcommand("fit", "Train a model on a labeled CSV");
    fit->add_option("csv", csv_path, "Training data")->required();
    add_schema_flags(fit, sflags);
    add_common_flags(fit, flags);
    std::string fit_out = "model.json";
    fit->add_option("--out", fit_out, "Model file path");

    auto* predict = app.add_subcommand("predict", "Score rows with a trained model");
    predict->add_option("model", model_path, "Model file")->required();
    predict->add_option("csv", csv_path, "Rows to score")->required();
    predict->add_option("--out", out_path, "Output CSV (default stdout)");

    auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
    cv->add_option("csv", csv_path, "Labeled data")->required();
    add_schema_flags(cv, sflags);
    add_common_flags(cv, flags);
    cv->add_option("--folds", folds, "Number of folds");
    std::string cv_out;
    cv->add_option("--out", cv_out, "Machine-readable report CSV");

    SynthConfig synth;
    std::string protocol = "within";
    int count = 1;
    std::uint64_t synth_seed = 0;
    std::string outdir = ".";

    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic datasets");
    synth_cmd->add_option("--protocol", protocol, "within | within-noise | beyond-noise | gaussian")
        ->required();
    synth_cmd->add_option("--count", count, "Number of datasets");
    synth_cmd->add_option("--seed", synth_seed, "Base seed (dataset i uses seed + i)");
    synth_cmd->add_option("--outdir", outdir, "Output directory");
    synth_cmd->add_option("--points", synth.n_points, "Points per dataset");
    synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "Coordinate noise sd");

    auto* exp = app.add_subcommand("experiment", "Generate, fit and score a protocol suite");
    exp->add_option("--protocol", protocol, "within | within-noise | beyond-noise | gaussian")
        ->required();
    exp->add_option("--count", count, "Number of datasets");
    exp->add_option("--points", synth.n_points, "Points per dataset");
    exp->add_option("--noise-sigma", synth.noise_sigma, "Coordinate noise sd");
    add_common_flags(exp, flags);
    std::string grid_out, exp_out;
    exp->add_option("--grid-out", grid_out, "Directory for decision-surface grids");
    exp->add_option("--out", exp_out, "Machine-readable report CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (fit->parsed()) return cmd_fit(csv_path, sflags, fit, flags, fit_out);
        if (predict->parsed()) return cmd_predict(model_path, csv_path, out_path);
        if (cv->parsed()) return cmd_cv(csv_path, sflags, cv, flags, folds, cv_out);
        if (synth_cmd->parsed()) return cmd_synth(protocol, count, synth_seed, outdir, synth);
        if (exp->parsed()) {
            return cmd_experiment(protocol, count, flags.seed, flags, synth, grid_out, exp_out);
        }
    } catch (const edc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 5;
    }
    return 0;
}

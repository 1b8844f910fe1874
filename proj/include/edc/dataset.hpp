#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "edc/errors.hpp"

namespace edc {

// Cell-level missing markers are "" and "?".
bool is_missing_cell(std::string_view cell);

struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> columns;  // column-major cells

    long row_count() const { return columns.empty() ? 0 : static_cast<long>(columns[0].size()); }
    int column_count() const { return static_cast<int>(columns.size()); }
    int column_index(std::string_view name) const;  // -1 when absent
    RawTable without_columns(const std::vector<std::string>& names) const;
};

struct CsvSchema {
    std::string target_column;
    std::string positive_label;
    char delimiter = ',';
    std::vector<std::string> categorical_overrides;  // force these columns categorical
    std::vector<std::string> drop_columns;
};

// Key-value text: "target_column = class", one entry per line, '#' comments.
// Recognized keys: target_column, positive_label, delimiter, categorical, drop.
CsvSchema parse_schema_file(const std::string& path);

// RFC-4180-style parsing: quoted fields, "" escapes, CRLF tolerated.
RawTable parse_csv_text(std::string_view text, char delimiter = ',');
RawTable parse_csv(const std::string& path, char delimiter = ',');

struct LabeledTable {
    RawTable features;  // target column removed
    Eigen::VectorXd y;  // 1.0 where target == positive_label
};

LabeledTable load_csv(const std::string& path, const CsvSchema& schema);
LabeledTable split_target(const RawTable& table, const CsvSchema& schema);

struct FeatureSpec {
    enum class Kind { numeric, category, rare_group };
    Kind kind = Kind::numeric;
    std::string name;    // encoded column name
    std::string source;  // source column name
    std::string category;                      // kind == category
    std::vector<std::string> rare_categories;  // kind == rare_group
    double median = 0.0;                       // numeric imputation value
};

// One-hot encoding with rare-category grouping. Frequencies, medians and the
// numeric/categorical split are fitted on the given rows only and frozen, so
// held-out rows cannot leak into the encoding.
class Encoder {
public:
    static Encoder fit(const RawTable& table, const std::vector<int>& fit_rows,
                       double rare_threshold = 0.02,
                       const std::vector<std::string>& categorical_overrides = {});
    static Encoder from_specs(std::vector<FeatureSpec> specs);

    Eigen::MatrixXd transform(const RawTable& table) const;
    Eigen::MatrixXd transform(const RawTable& table, const std::vector<int>& rows) const;

    const std::vector<FeatureSpec>& features() const { return specs_; }
    std::vector<std::string> feature_names() const;

private:
    std::vector<FeatureSpec> specs_;
};

struct NormParams {
    Eigen::VectorXd mins;
    Eigen::VectorXd ranges;          // max - min over the fitted rows; 0 marks degenerate
    std::vector<bool> degenerate;    // zero-range features, mapped to constant 0

    static NormParams fit(const Eigen::MatrixXd& X, const std::vector<int>& fit_rows);
    static NormParams fit(const Eigen::MatrixXd& X);
    // (x - min) / range per column; degenerate columns become 0; values from
    // rows outside the fitted set may leave [0, 1] and are not clipped.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct EncodedDataset {
    Eigen::MatrixXd X;  // normalized features, fitted rows lie in [0, 1]
    Eigen::VectorXd y;  // 0/1
    std::vector<std::string> feature_names;
    NormParams norm;

    long size() const { return X.rows(); }
    int feature_count() const { return static_cast<int>(X.cols()); }
    bool has_both_classes() const;
    void validate() const;
};

// Encode + normalize, both fitted on all rows. CV paths fit on train rows
// explicitly instead of using this.
EncodedDataset encode_dataset(const RawTable& features, const Eigen::VectorXd& y,
                              double rare_threshold = 0.02,
                              const std::vector<std::string>& categorical_overrides = {});

struct FoldPlan {
    int k = 0;
    std::vector<int> fold_of_row;

    std::vector<int> train_rows(int fold) const;
    std::vector<int> test_rows(int fold) const;
};

// Seeded shuffle within each class, then round-robin assignment with a fold
// cursor that carries across classes to keep fold sizes even.
FoldPlan stratified_kfold(const Eigen::VectorXd& y, int k, std::uint64_t seed);

}  // namespace edc

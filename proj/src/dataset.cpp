#include "edc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "edc/rng.hpp"

namespace edc {

namespace {

constexpr const char* kMissingToken = "<NA>";

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

bool parse_double(std::string_view s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

}  // namespace

bool is_missing_cell(std::string_view cell) { return cell.empty() || cell == "?"; }

int RawTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (column_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

RawTable RawTable::without_columns(const std::vector<std::string>& names) const {
    RawTable out;
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (std::find(names.begin(), names.end(), column_names[i]) != names.end()) continue;
        out.column_names.push_back(column_names[i]);
        out.columns.push_back(columns[i]);
    }
    return out;
}

CsvSchema parse_schema_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("unparseable-file", "cannot open schema file " + path);
    CsvSchema schema;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "target_column") {
            schema.target_column = value;
        } else if (key == "positive_label") {
            schema.positive_label = value;
        } else if (key == "delimiter") {
            if (value.size() != 1) throw_config("invalid-schema", "delimiter must be one character");
            schema.delimiter = value[0];
        } else if (key == "categorical") {
            schema.categorical_overrides = split_list(value);
        } else if (key == "drop") {
            schema.drop_columns = split_list(value);
        } else {
            throw_config("invalid-schema", "unknown schema key '" + key + "'");
        }
    }
    return schema;
}

RawTable parse_csv_text(std::string_view text, char delimiter) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;

    const auto end_field = [&] {
        row.push_back(field_was_quoted ? field : trim(field));
        field.clear();
        field_was_quoted = false;
    };
    const auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].empty();
        if (!blank) rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && trim(field).empty()) {
            in_quotes = true;
            field_was_quoted = true;
            field.clear();
        } else if (ch == delimiter) {
            end_field();
        } else if (ch == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field += ch;
        }
    }
    if (in_quotes) throw_data("unparseable-file", "unterminated quoted field");
    if (!field.empty() || !row.empty()) end_row();

    if (rows.empty()) throw_data("unparseable-file", "no header row");
    const std::size_t width = rows[0].size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw_data("unparseable-file",
                       "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                           " fields, header has " + std::to_string(width));
        }
    }

    RawTable table;
    table.column_names = rows[0];
    table.columns.assign(width, {});
    for (auto& col : table.columns) col.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) table.columns[c].push_back(std::move(rows[r][c]));
    }
    return table;
}

RawTable parse_csv(const std::string& path, char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("unparseable-file", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_text(buf.str(), delimiter);
}

LabeledTable split_target(const RawTable& table, const CsvSchema& schema) {
    if (table.row_count() == 0) throw_data("empty-table", "no data rows");
    const int target = table.column_index(schema.target_column);
    if (target < 0) {
        throw_data("target-column-not-found", "no column named '" + schema.target_column + "'");
    }

    LabeledTable out;
    out.y.resize(table.row_count());
    for (long r = 0; r < table.row_count(); ++r) {
        out.y[r] = table.columns[target][r] == schema.positive_label ? 1.0 : 0.0;
    }
    const double pos = out.y.sum();
    if (pos == 0.0 || pos == static_cast<double>(out.y.size())) {
        throw_unlearnable("single-class-labels",
                          "target '" + schema.target_column + "' yields only one class");
    }

    out.features = table.without_columns({schema.target_column});
    if (!schema.drop_columns.empty()) {
        out.features = out.features.without_columns(schema.drop_columns);
    }
    return out;
}

LabeledTable load_csv(const std::string& path, const CsvSchema& schema) {
    return split_target(parse_csv(path, schema.delimiter), schema);
}

Encoder Encoder::fit(const RawTable& table, const std::vector<int>& fit_rows, double rare_threshold,
                     const std::vector<std::string>& categorical_overrides) {
    if (fit_rows.empty()) throw_data("empty-table", "encoder fitted on zero rows");
    Encoder enc;
    for (int c = 0; c < table.column_count(); ++c) {
        const auto& col = table.columns[c];
        const auto& name = table.column_names[c];
        const bool forced_categorical =
            std::find(categorical_overrides.begin(), categorical_overrides.end(), name) !=
            categorical_overrides.end();

        bool numeric = !forced_categorical;
        if (numeric) {
            for (int r : fit_rows) {
                double v;
                if (!is_missing_cell(col[r]) && !parse_double(col[r], v)) {
                    numeric = false;
                    break;
                }
            }
        }

        if (numeric) {
            std::vector<double> values;
            values.reserve(fit_rows.size());
            for (int r : fit_rows) {
                double v;
                if (!is_missing_cell(col[r]) && parse_double(col[r], v)) values.push_back(v);
            }
            double median = 0.0;
            if (!values.empty()) {
                std::sort(values.begin(), values.end());
                const std::size_t mid = values.size() / 2;
                median = values.size() % 2 == 1 ? values[mid]
                                                : 0.5 * (values[mid - 1] + values[mid]);
            }
            FeatureSpec spec;
            spec.kind = FeatureSpec::Kind::numeric;
            spec.name = name;
            spec.source = name;
            spec.median = median;
            enc.specs_.push_back(std::move(spec));
            continue;
        }

        // categorical: frequencies on the fitted rows; missing is a category
        std::map<std::string, long> counts;
        for (int r : fit_rows) {
            counts[is_missing_cell(col[r]) ? kMissingToken : col[r]] += 1;
        }
        const double total = static_cast<double>(fit_rows.size());
        std::vector<std::string> rare;
        for (const auto& [category, count] : counts) {
            if (static_cast<double>(count) / total <= rare_threshold) {
                rare.push_back(category);
                continue;
            }
            FeatureSpec spec;
            spec.kind = FeatureSpec::Kind::category;
            spec.name = name + "=" + category;
            spec.source = name;
            spec.category = category;
            enc.specs_.push_back(std::move(spec));
        }
        if (!rare.empty()) {
            FeatureSpec spec;
            spec.kind = FeatureSpec::Kind::rare_group;
            spec.name = name + "=OTHER";
            spec.source = name;
            spec.rare_categories = std::move(rare);
            enc.specs_.push_back(std::move(spec));
        }
    }
    return enc;
}

Encoder Encoder::from_specs(std::vector<FeatureSpec> specs) {
    Encoder enc;
    enc.specs_ = std::move(specs);
    return enc;
}

std::vector<std::string> Encoder::feature_names() const {
    std::vector<std::string> names;
    names.reserve(specs_.size());
    for (const auto& s : specs_) names.push_back(s.name);
    return names;
}

Eigen::MatrixXd Encoder::transform(const RawTable& table) const {
    std::vector<int> rows(table.row_count());
    std::iota(rows.begin(), rows.end(), 0);
    return transform(table, rows);
}

Eigen::MatrixXd Encoder::transform(const RawTable& table, const std::vector<int>& rows) const {
    Eigen::MatrixXd X(rows.size(), specs_.size());
    for (std::size_t j = 0; j < specs_.size(); ++j) {
        const auto& spec = specs_[j];
        const int c = table.column_index(spec.source);
        if (c < 0) throw_data("missing-feature-column", "input lacks column '" + spec.source + "'");
        const auto& col = table.columns[c];

        // frequent categories of this source; anything else lands in OTHER
        std::vector<const std::string*> frequent;
        if (spec.kind == FeatureSpec::Kind::rare_group) {
            for (const auto& other : specs_) {
                if (other.kind == FeatureSpec::Kind::category && other.source == spec.source) {
                    frequent.push_back(&other.category);
                }
            }
        }

        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string& cell = col[rows[i]];
            double v = 0.0;
            switch (spec.kind) {
                case FeatureSpec::Kind::numeric:
                    if (is_missing_cell(cell) || !parse_double(cell, v)) v = spec.median;
                    break;
                case FeatureSpec::Kind::category:
                    v = (is_missing_cell(cell) ? spec.category == kMissingToken
                                               : cell == spec.category)
                            ? 1.0
                            : 0.0;
                    break;
                case FeatureSpec::Kind::rare_group: {
                    const std::string key = is_missing_cell(cell) ? kMissingToken : cell;
                    const bool known_frequent =
                        std::any_of(frequent.begin(), frequent.end(),
                                    [&](const std::string* cat) { return *cat == key; });
                    v = known_frequent ? 0.0 : 1.0;
                    break;
                }
            }
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return X;
}

NormParams NormParams::fit(const Eigen::MatrixXd& X, const std::vector<int>& fit_rows) {
    if (fit_rows.empty()) throw_data("empty-table", "normalizer fitted on zero rows");
    NormParams p;
    p.mins.resize(X.cols());
    p.ranges.resize(X.cols());
    p.degenerate.assign(X.cols(), false);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double lo = X(fit_rows[0], j);
        double hi = lo;
        for (int r : fit_rows) {
            lo = std::min(lo, X(r, j));
            hi = std::max(hi, X(r, j));
        }
        p.mins[j] = lo;
        p.ranges[j] = hi - lo;
        p.degenerate[j] = (hi == lo);
    }
    return p;
}

NormParams NormParams::fit(const Eigen::MatrixXd& X) {
    std::vector<int> rows(X.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return fit(X, rows);
}

Eigen::MatrixXd NormParams::apply(const Eigen::MatrixXd& X) const {
    if (X.cols() != mins.size()) throw_data("length-mismatch", "normalizer fitted on different width");
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (degenerate[j]) {
            out.col(j).setZero();
        } else {
            out.col(j) = (X.col(j).array() - mins[j]) / ranges[j];
        }
    }
    return out;
}

bool EncodedDataset::has_both_classes() const {
    const double pos = y.sum();
    return pos > 0.0 && pos < static_cast<double>(y.size());
}

void EncodedDataset::validate() const {
    if (X.rows() != y.size()) throw_data("length-mismatch", "X and y row counts differ");
    if (X.rows() == 0) throw_data("empty-table", "dataset has no rows");
    if (static_cast<std::size_t>(X.cols()) != feature_names.size()) {
        throw_data("length-mismatch", "feature names do not match X width");
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) throw_data("invalid-labels", "labels must be 0 or 1");
    }
}

EncodedDataset encode_dataset(const RawTable& features, const Eigen::VectorXd& y,
                              double rare_threshold,
                              const std::vector<std::string>& categorical_overrides) {
    std::vector<int> all_rows(features.row_count());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const Encoder enc = Encoder::fit(features, all_rows, rare_threshold, categorical_overrides);
    const Eigen::MatrixXd raw = enc.transform(features);

    EncodedDataset ds;
    ds.norm = NormParams::fit(raw);
    ds.X = ds.norm.apply(raw);
    ds.y = y;
    ds.feature_names = enc.feature_names();
    ds.validate();
    return ds;
}

std::vector<int> FoldPlan::train_rows(int fold) const {
    std::vector<int> rows;
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] != fold) rows.push_back(static_cast<int>(i));
    }
    return rows;
}

std::vector<int> FoldPlan::test_rows(int fold) const {
    std::vector<int> rows;
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
        if (fold_of_row[i] == fold) rows.push_back(static_cast<int>(i));
    }
    return rows;
}

FoldPlan stratified_kfold(const Eigen::VectorXd& y, int k, std::uint64_t seed) {
    if (k < 2) throw_config("invalid-folds", "need k >= 2");
    std::vector<int> pos, neg;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        (y[i] > 0.5 ? pos : neg).push_back(static_cast<int>(i));
    }
    const std::size_t minority = std::min(pos.size(), neg.size());
    if (static_cast<std::size_t>(k) > minority) {
        throw_data("infeasible-folds", "k = " + std::to_string(k) + " exceeds minority class size " +
                                           std::to_string(minority));
    }

    FoldPlan plan;
    plan.k = k;
    plan.fold_of_row.assign(y.size(), -1);
    Rng rng(mix_seed(seed, 0x6b666f6cULL));  // fold-plan stream
    int cursor = 0;
    for (auto* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        for (int row : *cls) {
            plan.fold_of_row[row] = cursor % k;
            ++cursor;
        }
    }
    return plan;
}

}  // namespace edc

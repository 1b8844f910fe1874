#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <numeric>
#include <set>

#include "edc/dataset.hpp"
#include "edc/rng.hpp"

using namespace edc;

namespace {

std::vector<int> all_rows(const RawTable& t) {
    std::vector<int> rows(t.row_count());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

// repeated-category table with exact frequencies out of `total` rows
RawTable category_table(const std::vector<std::pair<std::string, int>>& counts) {
    RawTable t;
    t.column_names = {"color"};
    t.columns.resize(1);
    for (const auto& [cat, n] : counts) {
        for (int i = 0; i < n; ++i) t.columns[0].push_back(cat);
    }
    return t;
}

std::string temp_path(const std::string& name) {
    return std::string("./") + name;
}

}  // namespace

TEST_CASE("csv text parsing") {
    SUBCASE("plain rows") {
        const RawTable t = parse_csv_text("a,b\n1,2\n3,4\n");
        CHECK(t.column_names == std::vector<std::string>{"a", "b"});
        CHECK(t.row_count() == 2);
        CHECK(t.columns[1][1] == "4");
    }
    SUBCASE("quoted fields with embedded delimiters and quotes") {
        const RawTable t = parse_csv_text("name,val\n\"x,y\",\"say \"\"hi\"\"\"\n");
        CHECK(t.columns[0][0] == "x,y");
        CHECK(t.columns[1][0] == "say \"hi\"");
    }
    SUBCASE("CRLF line endings") {
        const RawTable t = parse_csv_text("a,b\r\n1,2\r\n");
        CHECK(t.row_count() == 1);
        CHECK(t.columns[0][0] == "1");
    }
    SUBCASE("alternate delimiter") {
        const RawTable t = parse_csv_text("a;b\n1;2\n", ';');
        CHECK(t.columns[1][0] == "2");
    }
    SUBCASE("ragged rows are rejected") {
        CHECK_THROWS_WITH_AS(parse_csv_text("a,b\n1\n"), doctest::Contains("unparseable-file"),
                             Error);
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_WITH_AS(parse_csv_text(""), doctest::Contains("unparseable-file"), Error);
    }
}

TEST_CASE("target extraction and label mapping") {
    CsvSchema schema;
    schema.target_column = "class";
    schema.positive_label = "yes";

    SUBCASE("labels follow the positive marker") {
        const RawTable t = parse_csv_text("f,class\n1,yes\n2,no\n3,yes\n");
        const LabeledTable lt = split_target(t, schema);
        CHECK(lt.y.isApprox(Eigen::Vector3d(1, 0, 1)));
        CHECK(lt.features.column_index("class") == -1);
        CHECK(lt.features.column_index("f") == 0);
    }
    SUBCASE("absent target column") {
        const RawTable t = parse_csv_text("f,label\n1,yes\n");
        CHECK_THROWS_WITH_AS(split_target(t, schema), doctest::Contains("target-column-not-found"),
                             Error);
    }
    SUBCASE("zero data rows") {
        const RawTable t = parse_csv_text("f,class\n");
        CHECK_THROWS_WITH_AS(split_target(t, schema), doctest::Contains("empty-table"), Error);
    }
    SUBCASE("single-class labels") {
        const RawTable t = parse_csv_text("f,class\n1,yes\n2,yes\n");
        CHECK_THROWS_WITH_AS(split_target(t, schema), doctest::Contains("single-class-labels"),
                             Error);
    }
    SUBCASE("drop columns are removed") {
        schema.drop_columns = {"junk"};
        const RawTable t = parse_csv_text("f,junk,class\n1,x,yes\n2,y,no\n");
        const LabeledTable lt = split_target(t, schema);
        CHECK(lt.features.column_count() == 1);
    }
}

TEST_CASE("numeric detection treats missing markers as absent values") {
    const RawTable t = parse_csv_text("v\n1.5\n2\n?\n");
    const Encoder enc = Encoder::fit(t, all_rows(t));
    REQUIRE(enc.features().size() == 1);
    CHECK(enc.features()[0].kind == FeatureSpec::Kind::numeric);
    // median of {1.5, 2} imputes the missing cell
    const Eigen::MatrixXd X = enc.transform(t);
    CHECK(X(2, 0) == doctest::Approx(1.75));
}

TEST_CASE("one-hot encoding with rare-category grouping") {
    SUBCASE("a category at 1.5% lands in OTHER") {
        const RawTable t = category_table({{"A", 100}, {"B", 97}, {"C", 3}});  // 0.5 / 0.485 / 0.015
        const Encoder enc = Encoder::fit(t, all_rows(t));
        const auto names = enc.feature_names();
        CHECK(names == std::vector<std::string>{"color=A", "color=B", "color=OTHER"});
        const Eigen::MatrixXd X = enc.transform(t);
        // a C row sets only OTHER
        CHECK(X(199, 2) == 1.0);
        CHECK(X(199, 0) == 0.0);
        CHECK(X(199, 1) == 0.0);
    }
    SUBCASE("no rare categories, no OTHER column") {
        const RawTable t = category_table({{"A", 60}, {"B", 40}});
        CHECK(Encoder::fit(t, all_rows(t)).feature_names() ==
              std::vector<std::string>{"color=A", "color=B"});
    }
    SUBCASE("frequency exactly at the threshold groups too") {
        const RawTable t = category_table({{"A", 97}, {"B", 2}, {"C", 1}});  // 0.02 <= 0.02
        CHECK(Encoder::fit(t, all_rows(t)).feature_names() ==
              std::vector<std::string>{"color=A", "color=OTHER"});
    }
    SUBCASE("row sums per source column equal one") {
        const RawTable t = category_table({{"A", 50}, {"B", 30}, {"C", 1}, {"D", 1}});
        const Eigen::MatrixXd X = Encoder::fit(t, all_rows(t)).transform(t);
        for (Eigen::Index i = 0; i < X.rows(); ++i) CHECK(X.row(i).sum() == 1.0);
    }
    SUBCASE("encoded columns map back to their source") {
        const RawTable t = category_table({{"A", 50}, {"B", 50}});
        const Encoder enc = Encoder::fit(t, all_rows(t));
        for (const auto& spec : enc.features()) {
            CHECK(spec.source == "color");
            CHECK(spec.kind == FeatureSpec::Kind::category);
            CHECK((spec.category == "A" || spec.category == "B"));
        }
    }
}

TEST_CASE("encoder fitted on a subset freezes frequencies and medians") {
    RawTable t = parse_csv_text("cat,num\nA,1\nA,2\nB,3\nB,400\n");
    const std::vector<int> train{0, 1, 2};  // excludes the 400 row
    const Encoder enc = Encoder::fit(t, train, 0.4);
    // B occurs once in three train rows (~0.33 > 0.4? no: 0.33 <= 0.4 -> OTHER)
    CHECK(enc.feature_names() == std::vector<std::string>{"cat=A", "cat=OTHER", "num"});
    // median from train rows only
    const Eigen::MatrixXd X = enc.transform(t);
    CHECK(enc.features()[2].median == 2.0);
    // unseen categories at transform time fall into OTHER
    RawTable t2 = parse_csv_text("cat,num\nZ,5\n");
    const Eigen::MatrixXd X2 = enc.transform(t2);
    CHECK(X2(0, 1) == 1.0);
}

TEST_CASE("min-max normalization") {
    Eigen::MatrixXd X(3, 2);
    X << 0, 7, 5, 7, 10, 7;

    const NormParams p = NormParams::fit(X);
    const Eigen::MatrixXd N = p.apply(X);
    SUBCASE("column scales to the unit interval") {
        CHECK(N(0, 0) == 0.0);
        CHECK(N(1, 0) == 0.5);
        CHECK(N(2, 0) == 1.0);
    }
    SUBCASE("constant columns flatten to zero and flag degenerate") {
        CHECK(p.degenerate[1]);
        CHECK_FALSE(p.degenerate[0]);
        CHECK(N.col(1).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("values outside the fitted range are not clipped") {
        Eigen::MatrixXd test(1, 2);
        test << 12.0, 7.0;
        const Eigen::MatrixXd nt = NormParams::fit(X).apply(test);
        CHECK(nt(0, 0) == doctest::Approx(1.2));
    }
    SUBCASE("fitted rows span [0,1] per non-degenerate feature") {
        CHECK(N.col(0).minCoeff() == 0.0);
        CHECK(N.col(0).maxCoeff() == 1.0);
    }
}

TEST_CASE("stratified k-fold") {
    SUBCASE("five of each class into five folds gives one of each per fold") {
        Eigen::VectorXd y(10);
        y << 1, 1, 1, 1, 1, 0, 0, 0, 0, 0;
        const FoldPlan plan = stratified_kfold(y, 5, 42);
        for (int fold = 0; fold < 5; ++fold) {
            int pos = 0, neg = 0;
            for (int i = 0; i < 10; ++i) {
                if (plan.fold_of_row[i] != fold) continue;
                (y[i] > 0.5 ? pos : neg) += 1;
            }
            CHECK(pos == 1);
            CHECK(neg == 1);
        }
    }
    SUBCASE("leave-one-out on a balanced tiny set") {
        Eigen::VectorXd y(4);
        y << 1, 0, 1, 0;
        const FoldPlan plan = stratified_kfold(y, 2, 7);
        CHECK(plan.k == 2);
        for (int fold = 0; fold < 2; ++fold) CHECK(plan.test_rows(fold).size() == 2);
    }
    SUBCASE("identical seeds give identical plans") {
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) y[i] = i % 3 == 0 ? 1.0 : 0.0;
        const FoldPlan a = stratified_kfold(y, 5, 99);
        const FoldPlan b = stratified_kfold(y, 5, 99);
        CHECK(a.fold_of_row == b.fold_of_row);
        const FoldPlan c = stratified_kfold(y, 5, 100);
        CHECK(a.fold_of_row != c.fold_of_row);
    }
    SUBCASE("k beyond the minority class is infeasible") {
        Eigen::VectorXd y(10);
        y << 1, 1, 0, 0, 0, 0, 0, 0, 0, 0;
        CHECK_THROWS_WITH_AS(stratified_kfold(y, 3, 1), doctest::Contains("infeasible-folds"),
                             Error);
    }
    SUBCASE("folds partition the rows with class counts within one of proportional") {
        Rng rng(4040);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 40 + static_cast<int>(rng.uniform_int(60));
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) y[i] = rng.uniform() < 0.35 ? 1.0 : 0.0;
            const double pos = y.sum();
            if (pos < 5 || n - pos < 5) continue;
            const int k = 5;
            const FoldPlan plan = stratified_kfold(y, k, trial);

            std::set<int> seen;
            for (int fold = 0; fold < k; ++fold) {
                double fold_pos = 0, fold_n = 0;
                for (int r : plan.test_rows(fold)) {
                    CHECK(seen.insert(r).second);  // pairwise disjoint
                    fold_n += 1;
                    fold_pos += y[r];
                }
                CHECK(std::abs(fold_pos - pos / k) <= 1.0);
                CHECK(std::abs((fold_n - fold_pos) - (n - pos) / k) <= 1.0);
            }
            CHECK(seen.size() == static_cast<std::size_t>(n));  // union covers everything
        }
    }
}

TEST_CASE("schema files parse key-value lines") {
    const std::string path = temp_path("schema_test.txt");
    {
        std::ofstream out(path);
        out << "# comment\n"
               "target_column = class\n"
               "positive_label = yes\n"
               "delimiter = ;\n"
               "categorical = zip, region\n"
               "drop = id\n";
    }
    const CsvSchema s = parse_schema_file(path);
    CHECK(s.target_column == "class");
    CHECK(s.positive_label == "yes");
    CHECK(s.delimiter == ';');
    CHECK(s.categorical_overrides == std::vector<std::string>{"zip", "region"});
    CHECK(s.drop_columns == std::vector<std::string>{"id"});
    std::remove(path.c_str());
}

TEST_CASE("encode_dataset produces unit-interval features with names") {
    const RawTable t = parse_csv_text("num,cat\n1,A\n5,B\n9,A\n3,B\n");
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    const EncodedDataset ds = encode_dataset(t, y);
    CHECK(ds.feature_count() == 3);  // num, cat=A, cat=B
    CHECK(ds.X.minCoeff() >= 0.0);
    CHECK(ds.X.maxCoeff() <= 1.0);
    CHECK(ds.has_both_classes());
}

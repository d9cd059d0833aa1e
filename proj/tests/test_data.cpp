#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "dragan/data/csv.hpp"
#include "dragan/data/scaler.hpp"
#include "dragan/data/split.hpp"
#include "support.hpp"

using namespace dragan;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
    auto dir = fs::temp_directory_path() / "dragan_test_data";
    fs::create_directories(dir);
    auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST(Csv, LastColumnIsLabelAndRarerClassIsPositive) {
    auto p = write_temp("toy.csv", "a,b,cls\n1,2,neg\n3,4,pos\n5,6,neg\n");
    auto ds = load_csv(p);
    EXPECT_EQ(ds.name, "toy");
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.dims(), 2u);
    EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_DOUBLE_EQ(ds.features(1, 1), 4.0);
}

TEST(Csv, NamedLabelColumn) {
    auto p = write_temp("named.csv", "y,a\n1,0.5\n0,0.25\n0,0.75\n");
    auto ds = load_csv(p, "y");
    EXPECT_EQ(ds.dims(), 1u);
    EXPECT_EQ(ds.labels, (std::vector<int>{1, 0, 0}));
    EXPECT_THROW(load_csv(p, "missing"), Error);
}

TEST(Csv, TieGoesToLexicographicallyLargerLabel) {
    auto p = write_temp("tie.csv", "a,y\n1,alpha\n2,beta\n");
    auto ds = load_csv(p);
    EXPECT_EQ(ds.labels, (std::vector<int>{0, 1}));
}

TEST(Csv, BadCellReportsRowAndColumn) {
    auto p = write_temp("bad.csv", "a,b,y\n1,2,0\n3,oops,1\n");
    try {
        load_csv(p);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row, 3u);
        EXPECT_EQ(e.column, 2u);
    }
}

TEST(Csv, LabelDomainErrors) {
    EXPECT_THROW(load_csv(write_temp("three.csv", "a,y\n1,x\n2,y\n3,z\n")), LabelError);
    EXPECT_THROW(load_csv(write_temp("one.csv", "a,y\n1,x\n2,x\n")), DegenerateDatasetError);
    EXPECT_THROW(load_csv(fs::temp_directory_path() / "does_not_exist.csv"), IoError);
}

TEST(Csv, WriteThenReadRoundTrips) {
    auto ds = testing_support::two_gaussians(30, 5, 3, 1.0, 4);
    ds.feature_names = {"x0", "x1", "x2"};
    auto p = fs::temp_directory_path() / "dragan_test_data" / "round.csv";
    write_csv(ds, p);
    auto back = load_csv(p);
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
}

TEST(Scaler, MapsTrainingRangeToUnitBoxAndInverts) {
    Matrix x{{1, 5, 2}, {3, 5, 4}, {2, 5, 8}};
    auto s = fit_minmax(x);
    auto y = apply_minmax(s, x);
    EXPECT_DOUBLE_EQ(y(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(y(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(y(2, 0), 0.5);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(y(r, 1), 0.5);  // constant column
    auto back = invert_minmax(s, y);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(back(r, c), x(r, c), 1e-12);
}

TEST(Scaler, HeldOutValuesAreNotClipped) {
    Matrix train{{0.0}, {10.0}};
    auto s = fit_minmax(train);
    auto y = apply_minmax(s, Matrix{{-5.0}, {20.0}});
    EXPECT_DOUBLE_EQ(y(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(y(1, 0), 2.0);
}

TEST(Scaler, ZScore) {
    Matrix x{{1.0}, {3.0}};
    auto s = fit_zscore(x);
    auto y = apply_zscore(s, x);
    EXPECT_NEAR(y(0, 0), -1.0, 1e-12);
    EXPECT_NEAR(y(1, 0), 1.0, 1e-12);
}

TEST(Dataset, CountsAndImbalance) {
    auto ds = testing_support::two_gaussians(40, 4, 2, 1.0, 1);
    EXPECT_EQ(ds.n_positive(), 4u);
    EXPECT_EQ(ds.n_negative(), 36u);
    EXPECT_DOUBLE_EQ(imbalance_ratio(ds), 9.0);
    EXPECT_DOUBLE_EQ(ds.minority_fraction(), 0.1);
    Dataset neg = ds.subset(ds.indices_of(0));
    EXPECT_THROW(imbalance_ratio(neg), DegenerateDatasetError);
    EXPECT_THROW(neg.validate(true), DegenerateDatasetError);
}

class StratifiedKFold : public ::testing::TestWithParam<std::tuple<std::size_t, std::size_t, std::size_t>> {};

TEST_P(StratifiedKFold, PartitionsEveryRepeatAndBalancesClasses) {
    const auto [n, n_pos, k] = GetParam();
    auto ds = testing_support::two_gaussians(n, n_pos, 2, 1.0, n);
    auto plan = stratified_kfold(ds, k, 3, 17);
    ASSERT_EQ(plan.folds.size(), 3 * k);
    for (std::size_t r = 0; r < 3; ++r) {
        std::vector<int> seen(n, 0);
        std::size_t min_size = n, max_size = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const auto& fold = plan.folds[r * k + f];
            EXPECT_EQ(fold.repeat, r);
            EXPECT_EQ(fold.fold, f);
            EXPECT_EQ(fold.train.size() + fold.test.size(), n);
            std::size_t pos = 0;
            for (auto i : fold.test) {
                ++seen[i];
                pos += ds.labels[i];
            }
            EXPECT_GE(pos, n_pos / k);
            EXPECT_LE(pos, (n_pos + k - 1) / k);
            min_size = std::min(min_size, fold.test.size());
            max_size = std::max(max_size, fold.test.size());
            std::set<std::size_t> test(fold.test.begin(), fold.test.end());
            for (auto i : fold.train) EXPECT_EQ(test.count(i), 0u);
        }
        for (int c : seen) EXPECT_EQ(c, 1);
        EXPECT_LE(max_size - min_size, 1u);
    }
}

INSTANTIATE_TEST_SUITE_P(Shapes, StratifiedKFold,
                         ::testing::Values(std::make_tuple(50, 5, 5), std::make_tuple(731, 42, 5),
                                           std::make_tuple(103, 17, 4), std::make_tuple(20, 10, 2)));

TEST(Split, SameSeedSamePlanDifferentRepeatsDiffer) {
    auto ds = testing_support::two_gaussians(60, 10, 2, 1.0, 2);
    auto a = stratified_kfold(ds, 5, 2, 3);
    auto b = stratified_kfold(ds, 5, 2, 3);
    for (std::size_t i = 0; i < a.folds.size(); ++i) EXPECT_EQ(a.folds[i].test, b.folds[i].test);
    EXPECT_NE(a.folds[0].test, a.folds[5].test);
}

TEST(Split, TooFewMinorityRowsIsAStratificationError) {
    auto ds = testing_support::two_gaussians(30, 3, 2, 1.0, 2);
    EXPECT_THROW(stratified_kfold(ds, 5, 1, 0), StratificationError);
    EXPECT_THROW(stratified_kfold(ds, 1, 1, 0), ConfigError);
}

TEST(Split, ExportListsEveryIndexPerFold) {
    auto ds = testing_support::two_gaussians(20, 5, 2, 1.0, 2);
    auto plan = stratified_kfold(ds, 5, 1, 0);
    auto p = fs::temp_directory_path() / "dragan_test_data" / "split.csv";
    write_split_csv(plan, p);
    std::ifstream in(p);
    std::string line;
    std::size_t lines = 0;
    std::getline(in, line);
    EXPECT_EQ(line, "repeat,fold,index,role");
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 5u * 20u);
}

TEST(Subsample, KeepsRoundedShareOfEachClass) {
    auto ds = testing_support::two_gaussians(731, 42, 2, 1.0, 5);
    auto sub = subsample_fraction(ds, 0.3, 9);
    EXPECT_EQ(sub.n_positive(), 13u);   // round(12.6)
    EXPECT_EQ(sub.n_negative(), 207u);  // round(206.7)
    auto tiny = subsample_fraction(ds, 0.001, 9);
    EXPECT_EQ(tiny.n_positive(), 1u);
    EXPECT_EQ(subsample_fraction(ds, 1.0, 9).size(), ds.size());
    EXPECT_THROW(subsample_fraction(ds, 0.0, 9), DomainError);
    EXPECT_THROW(subsample_fraction(ds, 1.5, 9), DomainError);
}

TEST(Rng, SplitStreamsAreIndependentOfParentUse) {
    Rng a(42), b(42);
    b.uniform();
    b.uniform();
    EXPECT_EQ(a.split("x").uniform(), b.split("x").uniform());
    EXPECT_NE(a.split("x").uniform(), a.split("y").uniform());
}

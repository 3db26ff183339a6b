#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dca/dataset.hpp"

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/dca_test_") + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

dca::Dataset make_dataset(const std::vector<double>& targets) {
    dca::Dataset ds;
    ds.column_names = {"x"};
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ds.rows.push_back({static_cast<double>(i)});
        ds.targets.push_back(targets[i]);
        ds.row_ids.push_back(static_cast<std::int64_t>(i));
    }
    return ds;
}

}  // namespace

TEST_CASE("quantile_linear interpolates between order statistics") {
    std::vector<double> v = {1, 2, 3, 4};
    CHECK(dca::quantile_linear(v, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(dca::quantile_linear(v, 0.0) == 1.0);
    CHECK(dca::quantile_linear(v, 1.0) == 4.0);

    std::vector<double> ten = {1, 2, 3, 4, 5, 6, 7, 8, 9, 1000};
    CHECK(dca::quantile_linear(ten, 0.25) == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(dca::quantile_linear(ten, 0.75) == doctest::Approx(7.75).epsilon(1e-12));

    CHECK_THROWS_AS(dca::quantile_linear({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(dca::quantile_linear(v, 1.5), std::invalid_argument);
}

TEST_CASE("iqr_filter removes rows outside the whisker bounds") {
    // Q1 = 3.25, Q3 = 7.75, IQR = 4.5, bounds [-3.5, 14.5]: only 1000 is out.
    dca::Dataset ds = make_dataset({1, 2, 3, 4, 5, 6, 7, 8, 9, 1000});
    auto [kept, removed] = dca::iqr_filter(ds, 1.5);
    CHECK(removed == 1);
    CHECK(kept.size() == 9);
    CHECK(std::find(kept.targets.begin(), kept.targets.end(), 1000.0) ==
          kept.targets.end());
}

TEST_CASE("iqr_filter on a constant column keeps only the constant value") {
    // Q1 = Q3 = 0 so the whisker interval collapses to {0}.
    dca::Dataset ds = make_dataset({0, 0, 0, 0, 100});
    for (auto& row : ds.rows) row[0] = 0.0;  // constant feature too
    auto [kept, removed] = dca::iqr_filter(ds, 1.5);
    CHECK(removed == 1);
    CHECK(kept.size() == 4);
}

TEST_CASE("iqr_filter screens feature columns as well as the target") {
    dca::Dataset ds = make_dataset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    ds.rows[4][0] = 1e9;  // outlying feature, unremarkable target
    auto [kept, removed] = dca::iqr_filter(ds, 1.5);
    CHECK(removed == 1);
    CHECK(kept.size() == 9);
}

TEST_CASE("load_csv parses headers, drops empty-cell rows, and keeps ids") {
    std::string path = write_temp("load.csv",
                                  "a,b,y\n"
                                  "1,2,3\n"
                                  "4,,6\n"
                                  "7,8,9\n");
    dca::LoadResult result = dca::load_csv(path, "y");
    CHECK(result.dropped_rows == 1);
    REQUIRE(result.dataset.size() == 2);
    CHECK(result.dataset.column_names == std::vector<std::string>{"a", "b"});
    CHECK(result.dataset.rows[0] == std::vector<double>{1, 2});
    CHECK(result.dataset.targets == std::vector<double>{3, 9});
    CHECK(result.dataset.row_ids == std::vector<std::int64_t>{0, 2});
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects bad input") {
    CHECK_THROWS_AS(dca::load_csv("/tmp/dca_no_such_file.csv", "y"),
                    std::runtime_error);

    std::string bad_cell = write_temp("badcell.csv", "a,y\nfoo,2\n");
    CHECK_THROWS_WITH_AS(dca::load_csv(bad_cell, "y"),
                         doctest::Contains("not numeric"), std::runtime_error);
    std::remove(bad_cell.c_str());

    std::string no_col = write_temp("nocol.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(dca::load_csv(no_col, "y"), std::runtime_error);
    std::remove(no_col.c_str());

    std::string empty = write_temp("allempty.csv", "a,y\n,1\n,2\n");
    CHECK_THROWS_AS(dca::load_csv(empty, "y"), std::runtime_error);
    std::remove(empty.c_str());
}

TEST_CASE("normalize maps to [0,1] and round-trips the target") {
    dca::Dataset ds = make_dataset({10, 20, 30, 40});
    ds.rows = {{5, 7}, {6, 7}, {7, 7}, {8, 7}};
    ds.column_names = {"a", "b"};
    auto [scaled, params] = dca::normalize(ds);

    for (const auto& row : scaled.rows) {
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(params.feature_constant == std::vector<bool>{false, true});
    for (const auto& row : scaled.rows) CHECK(row[1] == 0.0);  // constant column

    for (double y : {10.0, 17.3, 40.0}) {
        double z = dca::normalize_target_value(y, params);
        CHECK(dca::denormalize_target_value(z, params) == doctest::Approx(y).epsilon(1e-9));
    }
}

TEST_CASE("apply_normalization reuses fitted parameters on unseen data") {
    dca::Dataset train = make_dataset({0, 10});
    train.rows = {{0}, {10}};
    auto [_, params] = dca::normalize(train);

    dca::Dataset test = make_dataset({20});
    test.rows = {{5}};
    dca::Dataset scaled = dca::apply_normalization(test, params);
    CHECK(scaled.rows[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(scaled.targets[0] == doctest::Approx(2.0).epsilon(1e-12));  // beyond train max
}

TEST_CASE("split partitions rows, keeps order, and honors the fraction") {
    dca::Dataset ds = make_dataset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    auto [train, test] = dca::split(ds, 0.3, 7);
    CHECK(train.size() == 3);
    CHECK(test.size() == 7);

    std::set<std::int64_t> ids;
    for (auto id : train.row_ids) ids.insert(id);
    for (auto id : test.row_ids) ids.insert(id);
    CHECK(ids.size() == 10);

    CHECK(std::is_sorted(train.row_ids.begin(), train.row_ids.end()));
    CHECK(std::is_sorted(test.row_ids.begin(), test.row_ids.end()));

    // Fractional product rounds up: 10 * 0.25 = 2.5 -> 3 rows in the first part.
    auto [train2, test2] = dca::split(ds, 0.25, 7);
    CHECK(train2.size() == 3);
    CHECK(test2.size() == 7);
}

TEST_CASE("split is deterministic per seed and varies across seeds") {
    dca::Dataset ds = make_dataset(
        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
    auto [a1, b1] = dca::split(ds, 0.5, 11);
    auto [a2, b2] = dca::split(ds, 0.5, 11);
    CHECK(a1.row_ids == a2.row_ids);
    CHECK(b1.row_ids == b2.row_ids);

    bool any_differs = false;
    for (std::uint64_t seed = 12; seed < 20 && !any_differs; ++seed) {
        auto [a3, _] = dca::split(ds, 0.5, seed);
        any_differs = a3.row_ids != a1.row_ids;
    }
    CHECK(any_differs);
}

TEST_CASE("split clamps so both parts stay non-empty") {
    dca::Dataset ds = make_dataset({1, 2, 3});
    auto [train, test] = dca::split(ds, 0.999, 1);
    CHECK(train.size() == 2);
    CHECK(test.size() == 1);
    CHECK_THROWS_AS(dca::split(make_dataset({1}), 0.5, 1), std::invalid_argument);
}

TEST_CASE("split_tt halves the training set with role labels") {
    dca::Dataset ds = make_dataset({1, 2, 3, 4, 5, 6, 7});
    ds.role = dca::Role::kTrain;
    auto [train_t, train_p] = dca::split_tt(ds, 3);
    CHECK(train_t.size() == 4);  // extra row goes to the first-named output
    CHECK(train_p.size() == 3);
    CHECK(train_t.role == dca::Role::kTrainT);
    CHECK(train_p.role == dca::Role::kTrainP);
    CHECK_THROWS_AS(dca::split_tt(make_dataset({1, 2, 3}), 3), std::invalid_argument);
}

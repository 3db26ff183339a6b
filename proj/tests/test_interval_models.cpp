#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "dca/artifact.hpp"
#include "dca/baselines.hpp"
#include "dca/interval_models.hpp"
#include "dca/linalg.hpp"
#include "dca/rng.hpp"

namespace {

dca::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                          const std::vector<double>& targets) {
    dca::Dataset ds;
    ds.column_names.resize(rows.empty() ? 0 : rows[0].size());
    for (std::size_t j = 0; j < ds.column_names.size(); ++j) {
        ds.column_names[j] = "f" + std::to_string(j);
    }
    ds.rows = rows;
    ds.targets = targets;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.row_ids.push_back(static_cast<std::int64_t>(i));
    }
    return ds;
}

// Gaussian-elimination solve of the normal equations, used as an independent
// oracle for the least-squares fit.
std::vector<double> normal_equations(const std::vector<std::vector<double>>& rows,
                                     const std::vector<double>& targets) {
    const std::size_t p = rows[0].size() + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<double> x = rows[i];
        x.push_back(1.0);
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) a[r][c] += x[r] * x[c];
            a[r][p] += x[r] * targets[i];
        }
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= p; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t r = 0; r < p; ++r) beta[r] = a[r][p] / a[r][r];
    return beta;  // coefficients then intercept
}

}  // namespace

TEST_CASE("fit_regressor recovers an exact linear relationship") {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    dca::Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        double x0 = rng.normal(), x1 = rng.normal();
        rows.push_back({x0, x1});
        targets.push_back(2.0 * x0 - 3.0 * x1 + 7.0);
    }
    dca::RegressorModel model = dca::fit_regressor(make_dataset(rows, targets));
    REQUIRE(model.coefficients.size() == 2);
    CHECK(model.coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(model.coefficients[1] == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(model.intercept == doctest::Approx(7.0).epsilon(1e-8));
    CHECK(model.predict({1.0, 1.0}) == doctest::Approx(6.0).epsilon(1e-8));
}

TEST_CASE("fit_regressor handles a constant target") {
    std::vector<std::vector<double>> rows = {{1}, {2}, {3}, {4}};
    dca::RegressorModel model = dca::fit_regressor(make_dataset(rows, {5, 5, 5, 5}));
    CHECK(model.coefficients[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(model.intercept == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("fit_regressor matches the normal-equations oracle on noisy data") {
    dca::Rng rng(9);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({rng.normal(), rng.normal(), rng.normal()});
        targets.push_back(1.5 * rows.back()[0] - 0.5 * rows.back()[2] + rng.normal());
    }
    dca::RegressorModel model = dca::fit_regressor(make_dataset(rows, targets));
    std::vector<double> oracle = normal_equations(rows, targets);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(model.coefficients[j] == doctest::Approx(oracle[j]).epsilon(1e-8));
    }
    CHECK(model.intercept == doctest::Approx(oracle[3]).epsilon(1e-8));
}

TEST_CASE("rank-deficient fits use the minimum-norm solution") {
    // Duplicated column: infinitely many exact fits; the minimum-norm one
    // spreads the weight evenly over the two copies.
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    dca::Rng rng(13);
    for (int i = 0; i < 30; ++i) {
        double x = rng.normal();
        rows.push_back({x, x});
        targets.push_back(4.0 * x + 1.0);
    }
    dca::RegressorModel model = dca::fit_regressor(make_dataset(rows, targets));
    CHECK(model.coefficients[0] == doctest::Approx(model.coefficients[1]).epsilon(1e-8));
    CHECK(model.coefficients[0] + model.coefficients[1] ==
          doctest::Approx(4.0).epsilon(1e-8));
    CHECK(model.predict({2.0, 2.0}) == doctest::Approx(9.0).epsilon(1e-8));
}

TEST_CASE("fit_regressor rejects degenerate subsets") {
    CHECK_THROWS_AS(dca::fit_regressor(make_dataset({{1.0}}, {2.0})),
                    std::runtime_error);
}

TEST_CASE("assemble_redundant keeps own rows and adds capped nearest neighbors") {
    // Interval 1 between cuts 10 and 20 owns 8 rows, so the neighbor budget is
    // floor(8/4) = 2, merged across both sides by distance to the facing cut.
    std::vector<double> targets = {11, 12, 13, 14, 15, 16, 17, 18,  // interval 1
                                   9.5, 5, 2,                       // interval 0
                                   20.5, 25};                       // interval 2
    std::vector<std::vector<double>> rows;
    for (double t : targets) rows.push_back({t});
    dca::Dataset train = make_dataset(rows, targets);

    dca::SegmentationList seg;
    seg.cuts = {10.0, 20.0};
    seg.n_intervals = 3;
    std::vector<int> labels;
    for (double t : targets) labels.push_back(dca::interval_of(t, seg));

    dca::Dataset subset = dca::assemble_redundant(train, labels, 1, seg, 4);
    REQUIRE(subset.size() == 10);
    // Own rows first, original order.
    for (int i = 0; i < 8; ++i) CHECK(subset.targets[i] == targets[i]);
    // Nearest across both sides: 9.5 (0.5 from cut 10) and 20.5 (0.5 from cut 20).
    std::vector<double> neighbors = {subset.targets[8], subset.targets[9]};
    std::sort(neighbors.begin(), neighbors.end());
    CHECK(neighbors == std::vector<double>{9.5, 20.5});
}

TEST_CASE("assemble_redundant draws only from the single neighbor of edge intervals") {
    std::vector<double> targets = {1, 2, 3, 4, 5, 6, 7, 8,  // interval 0
                                   10.5, 11, 12, 13};       // interval 1
    std::vector<std::vector<double>> rows;
    for (double t : targets) rows.push_back({t});
    dca::Dataset train = make_dataset(rows, targets);

    dca::SegmentationList seg;
    seg.cuts = {10.0};
    seg.n_intervals = 2;
    std::vector<int> labels;
    for (double t : targets) labels.push_back(dca::interval_of(t, seg));

    dca::Dataset subset = dca::assemble_redundant(train, labels, 0, seg, 4);
    REQUIRE(subset.size() == 10);  // 8 own + floor(8/4) = 2 from interval 1
    std::vector<double> added = {subset.targets[8], subset.targets[9]};
    std::sort(added.begin(), added.end());
    CHECK(added == std::vector<double>{10.5, 11.0});
}

TEST_CASE("assemble_redundant never exceeds the neighbor budget") {
    dca::Rng rng(31);
    std::vector<double> targets;
    for (int i = 0; i < 200; ++i) targets.push_back(rng.uniform_real() * 30.0);
    std::vector<std::vector<double>> rows;
    for (double t : targets) rows.push_back({t});
    dca::Dataset train = make_dataset(rows, targets);

    dca::SegmentationList seg;
    seg.cuts = {10.0, 20.0};
    seg.n_intervals = 3;
    std::vector<int> labels;
    for (double t : targets) labels.push_back(dca::interval_of(t, seg));

    for (int interval = 0; interval < 3; ++interval) {
        std::size_t own = 0;
        for (int label : labels) own += (label == interval);
        dca::Dataset subset = dca::assemble_redundant(train, labels, interval, seg, 4);
        CHECK(subset.size() >= own);
        CHECK(subset.size() <= own + own / 4);
    }
}

TEST_CASE("assemble_redundant rejects empty intervals") {
    dca::Dataset train = make_dataset({{1}, {2}}, {1, 2});
    dca::SegmentationList seg;
    seg.cuts = {10.0};
    seg.n_intervals = 2;
    std::vector<int> labels = {0, 0};
    CHECK_THROWS_WITH_AS(dca::assemble_redundant(train, labels, 1, seg, 4),
                         doctest::Contains("no training rows"), std::runtime_error);
}

namespace {

// A piecewise-linear ramp with three regimes, exactly learnable per interval.
dca::DynamicClassificationResult loop_on_piecewise(dca::Dataset& train) {
    dca::Rng rng(41);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 240; ++i) {
        double x = rng.uniform_real() * 30.0;
        double y = x < 10.0 ? 2.0 * x : (x < 20.0 ? 20.0 + 0.5 * (x - 10.0)
                                                  : 25.0 + 3.0 * (x - 20.0));
        rows.push_back({x});
        targets.push_back(y);
    }
    train = make_dataset(rows, targets);
    dca::LoopConfig config;
    config.n_intervals = 3;
    // Thirds put the cuts at the regime boundaries (x bands have equal mass).
    config.manual_ratios = {1.0, 1.0, 1.0};
    config.max_iterations = 12;
    config.seed = 21;
    auto [train_t, train_p] = dca::split_tt(train, 77);
    return dca::run_dynamic_classification(train_t, train_p, config);
}

}  // namespace

TEST_CASE("build_ensemble fits one regressor per interval and routes predictions") {
    dca::Dataset train;
    dca::DynamicClassificationResult dc = loop_on_piecewise(train);
    dca::IntervalEnsemble ensemble = dca::build_ensemble(
        train, dc, dca::identity_normalization(1), dca::uniform_exclusion_config(3), 4);

    REQUIRE(ensemble.regressors.size() == 3);
    std::vector<std::vector<double>> probes = {{2.0}, {5.0}, {27.0}, {29.0}};
    std::vector<dca::PredictionOutcome> outcomes = ensemble.predict(probes);
    REQUIRE(outcomes.size() == 4);
    for (const auto& outcome : outcomes) {
        CHECK(outcome.interval >= 0);
        CHECK(outcome.interval < 3);
        CHECK_FALSE(outcome.excluded);
    }
    // Deep inside the first and last regimes the fit is essentially exact.
    CHECK(outcomes[0].predicted == doctest::Approx(4.0).epsilon(0.05));
    CHECK(outcomes[3].predicted == doctest::Approx(52.0).epsilon(0.05));
}

TEST_CASE("a single-interval ensemble equals the direct least-squares fit") {
    dca::Rng rng(51);
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (int i = 0; i < 60; ++i) {
        double x0 = rng.normal(), x1 = rng.normal();
        rows.push_back({x0, x1});
        targets.push_back(3.0 * x0 + x1 + rng.normal() * 0.1);
    }
    dca::Dataset train = make_dataset(rows, targets);

    dca::LoopConfig config;
    config.n_intervals = 1;
    config.seed = 4;
    auto [train_t, train_p] = dca::split_tt(train, 5);
    dca::DynamicClassificationResult dc =
        dca::run_dynamic_classification(train_t, train_p, config);
    dca::IntervalEnsemble ensemble = dca::build_ensemble(
        train, dc, dca::identity_normalization(2), dca::uniform_exclusion_config(1), 4);

    dca::LeastSquaresSolution direct = dca::solve_least_squares(rows, targets);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> probe = {rng.normal(), rng.normal()};
        double via_ensemble = ensemble.predict({probe})[0].predicted;
        double via_direct = direct.intercept;
        for (std::size_t j = 0; j < probe.size(); ++j) {
            via_direct += direct.coefficients[j] * probe[j];
        }
        CHECK(via_ensemble == doctest::Approx(via_direct).epsilon(1e-12));
    }
}

TEST_CASE("ensemble predictions denormalize through the stored parameters") {
    dca::Dataset train;
    dca::DynamicClassificationResult dc_unused = loop_on_piecewise(train);
    (void)dc_unused;

    auto [train_norm, params] = dca::normalize(train);
    dca::LoopConfig config;
    config.n_intervals = 3;
    config.manual_ratios = {1.0, 1.0, 1.0};
    config.max_iterations = 12;
    config.seed = 21;
    auto [train_t, train_p] = dca::split_tt(train_norm, 77);
    dca::DynamicClassificationResult dc =
        dca::run_dynamic_classification(train_t, train_p, config);
    dca::IntervalEnsemble ensemble = dca::build_ensemble(
        train_norm, dc, params, dca::uniform_exclusion_config(3), 4);

    // Raw-scale probes come back on the raw target scale.
    std::vector<dca::PredictionOutcome> outcomes = ensemble.predict({{2.0}, {29.0}});
    CHECK(outcomes[0].predicted == doctest::Approx(4.0).epsilon(0.05));
    CHECK(outcomes[1].predicted == doctest::Approx(52.0).epsilon(0.05));

    std::vector<dca::ValidRange> ranges = ensemble.valid_ranges();
    REQUIRE(ranges.size() == 3);
    for (const auto& range : ranges) {
        CHECK(range.low < range.high);
        CHECK(range.high > 1.5);  // raw scale, not the normalized [0, 1]
    }
}

TEST_CASE("artifacts round-trip through JSON byte-identically") {
    dca::Dataset train;
    dca::DynamicClassificationResult dc = loop_on_piecewise(train);
    dca::ModelArtifact artifact;
    artifact.ensemble = dca::build_ensemble(
        train, dc, dca::identity_normalization(1), dca::uniform_exclusion_config(3), 4);
    artifact.trace = dc.trace;
    artifact.dc_error = dc.dc_error;
    artifact.config_snapshot = {{"seed", 21}};

    const std::string path = "/tmp/dca_test_artifact.json";
    dca::save_artifact(artifact, path);
    dca::ModelArtifact loaded = dca::load_artifact(path);
    std::remove(path.c_str());

    CHECK(dca::artifact_to_json(loaded) == dca::artifact_to_json(artifact));
    CHECK(dca::artifact_to_json(loaded).dump(2) == dca::artifact_to_json(artifact).dump(2));

    std::vector<std::vector<double>> probes = {{2.0}, {12.0}, {22.0}, {29.5}};
    std::vector<dca::PredictionOutcome> a = artifact.ensemble.predict(probes);
    std::vector<dca::PredictionOutcome> b = loaded.ensemble.predict(probes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        CHECK(a[i].predicted == b[i].predicted);  // bitwise equality
        CHECK(a[i].interval == b[i].interval);
    }
}

TEST_CASE("artifact loading rejects version mismatches") {
    dca::Dataset train;
    dca::DynamicClassificationResult dc = loop_on_piecewise(train);
    dca::ModelArtifact artifact;
    artifact.ensemble = dca::build_ensemble(
        train, dc, dca::identity_normalization(1), dca::uniform_exclusion_config(3), 4);
    nlohmann::ordered_json doc = dca::artifact_to_json(artifact);
    doc["format_version"] = 999;
    CHECK_THROWS_WITH_AS(dca::artifact_from_json(doc),
                         doctest::Contains("format version"), std::runtime_error);
}

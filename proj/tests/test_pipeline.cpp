#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dca/baselines.hpp"
#include "dca/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Fresh scratch directory per test case; removed and recreated on entry.
fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("dca_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ordered_json minimal_config() {
    return ordered_json{{"input", "data.csv"}, {"target_column", "y"}};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

dca::RunConfig training_config(const fs::path& dir, std::uint64_t seed) {
    dca::SyntheticSpec spec;
    spec.n_samples = 240;
    spec.n_features = 3;
    spec.correlation = 0.9;
    spec.noise = 0.05;
    spec.seed = 11;
    dca::Dataset ds = dca::generate_synthetic(spec);
    dca::write_dataset_csv(ds, (dir / "data.csv").string(), "y");

    dca::RunConfig config;
    config.input = (dir / "data.csv").string();
    config.target_column = "y";
    config.seed = seed;
    config.iqr_multiplier = 0.0;       // keep all 240 rows for exact split counts
    config.kinds = {"decision_tree"};  // keep the refinement loop quick
    config.max_iterations = 6;
    config.artifact_path = (dir / "model.json").string();
    config.report_path = (dir / "report.json").string();
    return config;
}

}  // namespace

TEST_CASE("a minimal configuration picks up every documented default") {
    dca::RunConfig config = dca::parse_run_config(minimal_config());
    CHECK(config.input == "data.csv");
    CHECK(config.target_column == "y");
    CHECK(config.train_fraction == 0.3);
    CHECK(config.iqr_multiplier == 1.5);
    CHECK(config.seed == 0);
    CHECK(config.seeds.empty());
    CHECK(config.n_intervals == 3);
    CHECK(config.manual_ratios.empty());
    CHECK(config.auto_strategy == "fluctuation");
    CHECK(config.bandwidth == 0.0);
    CHECK(config.kinds ==
          std::vector<std::string>{"decision_tree", "random_forest",
                                   "gradient_boosted_trees"});
    CHECK(config.max_iterations == 50);
    CHECK(config.step_fraction == 0.25);
    CHECK(config.regressor == "ordinary_least_squares");
    CHECK(config.neighbor_divisor == 4);
    CHECK(config.exclusion_factor == 1.05);
    CHECK(config.exclusion_factors.empty());
    CHECK_FALSE(config.drop_first);
    CHECK_FALSE(config.drop_last);
    CHECK(config.taus == std::vector<double>{0.01, 0.005});
    CHECK(config.accuracy_tau == 0.01);
    CHECK(config.baselines == std::vector<std::string>{"dp", "kc", "gc"});
    CHECK(config.cluster_count == 0);
    CHECK(config.artifact_path == "model.json");
    CHECK(config.report_path == "train_report.json");
}

TEST_CASE("configuration parsing is strict about keys, types, and presence") {
    CHECK_THROWS_AS(dca::parse_run_config(ordered_json::array()), dca::ConfigError);
    CHECK_THROWS_AS(dca::parse_run_config(ordered_json::object()), dca::ConfigError);
    CHECK_THROWS_AS(dca::parse_run_config(ordered_json{{"input", "x.csv"}}),
                    dca::ConfigError);

    auto doc = minimal_config();
    doc["bogus"] = 1;
    CHECK_THROWS_WITH_AS(dca::parse_run_config(doc), doctest::Contains("bogus"),
                         dca::ConfigError);

    doc = minimal_config();
    doc["train_fraction"] = "0.3";
    CHECK_THROWS_AS(dca::parse_run_config(doc), dca::ConfigError);

    doc = minimal_config();
    doc["seed"] = -4;
    CHECK_THROWS_AS(dca::parse_run_config(doc), dca::ConfigError);

    doc = minimal_config();
    doc["convergence"] = {{"stall_window", 15}, {"typo", 1}};
    CHECK_THROWS_AS(dca::parse_run_config(doc), dca::ConfigError);

    doc = minimal_config();
    doc["exclusion"] = {{"factor", 1.1}, {"factors", {1.1, 1.1, 1.1}}};
    CHECK_THROWS_WITH_AS(dca::parse_run_config(doc), doctest::Contains("not both"),
                         dca::ConfigError);
}

TEST_CASE("configuration parsing rejects out-of-range values") {
    auto rejected = [](auto mutate) {
        auto doc = minimal_config();
        mutate(doc);
        CHECK_THROWS_AS(dca::parse_run_config(doc), dca::ConfigError);
    };
    rejected([](ordered_json& d) { d["train_fraction"] = 0.0; });
    rejected([](ordered_json& d) { d["train_fraction"] = 1.0; });
    rejected([](ordered_json& d) { d["n_intervals"] = 0; });
    rejected([](ordered_json& d) { d["manual_ratios"] = {1.0, 2.0}; });  // wants 3
    rejected([](ordered_json& d) {
        d["n_intervals"] = 2;
        d["manual_ratios"] = {1.0, 0.0};
    });
    rejected([](ordered_json& d) { d["auto_strategy"] = "histogram"; });
    rejected([](ordered_json& d) { d["bandwidth"] = -0.5; });
    rejected([](ordered_json& d) { d["kinds"] = ordered_json::array(); });
    rejected([](ordered_json& d) { d["kinds"] = {"decision_tree", "svm"}; });
    rejected([](ordered_json& d) { d["kinds"] = {"decision_tree", "decision_tree"}; });
    rejected([](ordered_json& d) { d["max_iterations"] = 0; });
    rejected([](ordered_json& d) { d["step_fraction"] = 0.0; });
    rejected([](ordered_json& d) { d["step_fraction"] = 0.51; });
    rejected([](ordered_json& d) { d["regressor"] = "ridge"; });
    rejected([](ordered_json& d) { d["neighbor_divisor"] = 0; });
    rejected([](ordered_json& d) { d["exclusion"] = {{"factor", 0.99}}; });
    rejected([](ordered_json& d) { d["exclusion"] = {{"factors", {1.1, 1.1}}}; });
    rejected([](ordered_json& d) { d["taus"] = ordered_json::array(); });
    rejected([](ordered_json& d) { d["taus"] = {0.01, -0.01}; });
    rejected([](ordered_json& d) { d["accuracy_tau"] = 0.0; });
    rejected([](ordered_json& d) { d["baselines"] = {"dp", "xx"}; });
    rejected([](ordered_json& d) { d["cluster_count"] = -1; });
}

TEST_CASE("a configuration survives the JSON round trip") {
    auto doc = minimal_config();
    doc["train_fraction"] = 0.4;
    doc["iqr_multiplier"] = 2.0;
    doc["seed"] = 99;
    doc["seeds"] = {1, 2, 3};
    doc["n_intervals"] = 4;
    doc["manual_ratios"] = {1.0, 2.0, 3.0, 4.0};
    doc["auto_strategy"] = "density";
    doc["kinds"] = {"random_forest", "decision_tree"};
    doc["max_iterations"] = 12;
    doc["step_fraction"] = 0.5;
    doc["convergence"] = {{"stall_window", 9}, {"instability_threshold", 0.1}};
    doc["classifier_params"] = {{"tree", {{"max_depth", 7}}},
                                {"forest", {{"n_trees", 31}, {"bootstrap", false}}},
                                {"boosted", {{"n_rounds", 13}, {"learning_rate", 0.2}}}};
    doc["exclusion"] = {{"factors", {1.0, 1.2, 1.4, 1.6}}, {"drop_last", true}};
    doc["taus"] = {0.02};
    doc["accuracy_tau"] = 0.02;
    doc["baselines"] = {"dp"};
    doc["cluster_count"] = 5;
    doc["artifact_path"] = "a.json";

    dca::RunConfig first = dca::parse_run_config(doc);
    dca::RunConfig second = dca::parse_run_config(dca::run_config_to_json(first));

    CHECK(second.train_fraction == first.train_fraction);
    CHECK(second.iqr_multiplier == first.iqr_multiplier);
    CHECK(second.seed == 99);
    CHECK(second.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(second.n_intervals == 4);
    CHECK(second.manual_ratios == first.manual_ratios);
    CHECK(second.auto_strategy == "density");
    CHECK(second.kinds == first.kinds);
    CHECK(second.max_iterations == 12);
    CHECK(second.step_fraction == 0.5);
    CHECK(second.convergence.stall_window == 9);
    CHECK(second.convergence.instability_threshold == 0.1);
    CHECK(second.classifier_params.tree.max_depth == 7);
    CHECK(second.classifier_params.forest.n_trees == 31);
    CHECK(second.classifier_params.forest.bootstrap == false);
    CHECK(second.classifier_params.boosted.n_rounds == 13);
    CHECK(second.classifier_params.boosted.learning_rate == 0.2);
    CHECK(second.exclusion_factors == first.exclusion_factors);
    CHECK(second.drop_last == true);
    CHECK(second.taus == std::vector<double>{0.02});
    CHECK(second.baselines == std::vector<std::string>{"dp"});
    CHECK(second.cluster_count == 5);
    CHECK(second.artifact_path == "a.json");
}

TEST_CASE("loading a configuration file reports problems as configuration errors") {
    fs::path dir = scratch("config_files");
    CHECK_THROWS_AS(dca::load_run_config((dir / "absent.json").string()),
                    dca::ConfigError);
    {
        std::ofstream out(dir / "broken.json");
        out << "{ not json";
    }
    CHECK_THROWS_AS(dca::load_run_config((dir / "broken.json").string()),
                    dca::ConfigError);
    {
        std::ofstream out(dir / "good.json");
        out << R"({"input": "d.csv", "target_column": "y", "seed": 5})";
    }
    dca::RunConfig config = dca::load_run_config((dir / "good.json").string());
    CHECK(config.seed == 5);
}

TEST_CASE("outcome tables survive the CSV round trip exactly") {
    fs::path dir = scratch("outcomes_roundtrip");
    std::vector<dca::PredictionOutcome> outcomes(3);
    outcomes[0].row_id = 7;
    outcomes[0].interval = 2;
    outcomes[0].predicted = 0.1;  // not exactly representable
    outcomes[0].range_low = 1.0 / 3.0;
    outcomes[0].range_high = 12345.678901234567;
    outcomes[1].row_id = 8;
    outcomes[1].predicted = -2.5e-7;
    outcomes[1].range_empty = true;
    outcomes[1].excluded = true;
    outcomes[2].row_id = 1002;
    outcomes[2].interval = 1;
    outcomes[2].predicted = 3.0;
    outcomes[2].excluded = true;

    const std::string path = (dir / "outcomes.csv").string();
    dca::write_outcomes_csv(outcomes, path);
    std::vector<dca::PredictionOutcome> loaded = dca::read_outcomes_csv(path);
    REQUIRE(loaded.size() == outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        CHECK(loaded[i].row_id == outcomes[i].row_id);
        CHECK(loaded[i].interval == outcomes[i].interval);
        CHECK(loaded[i].predicted == outcomes[i].predicted);
        CHECK(loaded[i].range_low == outcomes[i].range_low);
        CHECK(loaded[i].range_high == outcomes[i].range_high);
        CHECK(loaded[i].range_empty == outcomes[i].range_empty);
        CHECK(loaded[i].excluded == outcomes[i].excluded);
    }
}

TEST_CASE("dataset CSV writing round-trips every value bit for bit") {
    fs::path dir = scratch("dataset_roundtrip");
    dca::Dataset ds;
    ds.column_names = {"alpha", "beta"};
    ds.rows = {{0.1, 1.0 / 3.0}, {-2.5e-7, 9007199254740993.0}, {5.0, 1e-300}};
    ds.targets = {2.718281828459045, -0.0001, 42.0};
    ds.row_ids = {0, 1, 2};

    const std::string path = (dir / "data.csv").string();
    dca::write_dataset_csv(ds, path, "target");
    dca::LoadResult loaded = dca::load_csv(path, "target");
    CHECK(loaded.dropped_rows == 0);
    CHECK(loaded.dataset.column_names == ds.column_names);
    REQUIRE(loaded.dataset.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(loaded.dataset.rows[i] == ds.rows[i]);
        CHECK(loaded.dataset.targets[i] == ds.targets[i]);
    }
}

TEST_CASE("data preparation is deterministic per seed and varies across seeds") {
    fs::path dir = scratch("prepare");
    dca::RunConfig config = training_config(dir, 3);

    dca::PreparedData a = dca::prepare_data(config, 3);
    dca::PreparedData b = dca::prepare_data(config, 3);
    CHECK(a.train_raw.row_ids == b.train_raw.row_ids);
    CHECK(a.test_raw.row_ids == b.test_raw.row_ids);
    CHECK(a.train_t.row_ids == b.train_t.row_ids);
    CHECK(a.train_norm.rows == b.train_norm.rows);

    dca::PreparedData c = dca::prepare_data(config, 4);
    CHECK(a.train_raw.row_ids != c.train_raw.row_ids);

    // Normalized training features live in [0, 1].
    for (const auto& row : a.train_norm.rows) {
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    // Split sizes follow the requested fraction.
    const std::size_t total = a.train_raw.size() + a.test_raw.size();
    CHECK(a.train_raw.size() ==
          static_cast<std::size_t>(
              std::ceil(config.train_fraction * static_cast<double>(total))));
}

TEST_CASE("training twice with one seed writes byte-identical outputs") {
    fs::path dir = scratch("train_determinism");
    dca::RunConfig config = training_config(dir, 7);

    dca::cmd_train(config);
    const std::string artifact_first = slurp(config.artifact_path);
    const std::string report_first = slurp(config.report_path);

    dca::cmd_train(config);
    CHECK(slurp(config.artifact_path) == artifact_first);
    CHECK(slurp(config.report_path) == report_first);

    // The report carries the headline numbers for downstream tooling.
    ordered_json report = ordered_json::parse(report_first);
    CHECK(report.at("command") == "train");
    CHECK(report.at("seed") == 7);
    CHECK(report.at("rows").at("train").get<int>() == 72);  // ceil(0.3 * 240)
    CHECK(report.at("rows").at("test").get<int>() == 168);
    CHECK(report.at("dc_error").get<double>() >= 0.0);
    CHECK(report.at("iterations_run").get<int>() >= 1);
    CHECK(report.at("segmentation").at("cuts").size() == 2);
}

TEST_CASE("the evaluate command joins outcomes to truths by row id") {
    fs::path dir = scratch("evaluate");

    dca::Dataset ds;
    ds.column_names = {"x"};
    ds.rows = {{10.0}, {20.0}, {30.0}, {40.0}};
    ds.targets = {10.0, 20.0, 30.0, 40.0};
    ds.row_ids = {0, 1, 2, 3};
    const std::string data_csv = (dir / "data.csv").string();
    dca::write_dataset_csv(ds, data_csv, "y");

    std::vector<dca::PredictionOutcome> outcomes(4);
    for (int i = 0; i < 4; ++i) outcomes[static_cast<std::size_t>(i)].row_id = i;
    outcomes[0].predicted = 10.0;
    outcomes[1].predicted = 20.0;
    outcomes[2].predicted = 31.0;   // 3.3% off and retained: a missed detection
    outcomes[3].predicted = 400.0;  // wild but excluded
    outcomes[3].excluded = true;
    const std::string outcomes_csv = (dir / "outcomes.csv").string();
    dca::write_outcomes_csv(outcomes, outcomes_csv);

    const std::string report_path = (dir / "eval.json").string();
    ordered_json report = dca::cmd_evaluate(outcomes_csv, data_csv, "y", {0.01, 0.05},
                                            0.01, report_path);
    CHECK(report.at("all").at("count").get<int>() == 4);
    CHECK(report.at("retained").at("count").get<int>() == 3);
    CHECK(report.at("excluded_rate").get<double>() == doctest::Approx(0.25));
    CHECK(report.at("misses").at("missed_count").get<int>() == 1);
    CHECK(report.at("misses").at("overkill_count").get<int>() == 0);
    CHECK(report.at("retained").at("within").at("0.05").get<double>() == 1.0);
    CHECK(fs::exists(report_path));

    // The written file holds the same document.
    CHECK(ordered_json::parse(slurp(report_path)) == report);

    // An outcome with no matching data row is a configuration error.
    outcomes[0].row_id = 99;
    dca::write_outcomes_csv(outcomes, outcomes_csv);
    CHECK_THROWS_WITH_AS(
        dca::cmd_evaluate(outcomes_csv, data_csv, "y", {0.01}, 0.01, report_path),
        doctest::Contains("no matching row"), dca::ConfigError);

    // Parameter validation happens before any file is touched.
    CHECK_THROWS_AS(dca::cmd_evaluate(outcomes_csv, data_csv, "y", {}, 0.01, report_path),
                    dca::ConfigError);
}

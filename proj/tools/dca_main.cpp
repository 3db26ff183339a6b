#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dca/baselines.hpp"
#include "dca/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Interval-partitioned regression with boundary-based exclusion"};
    app.require_subcommand(1);

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a model from a JSON configuration");
    std::string train_config_path;
    train->add_option("--config", train_config_path, "Path to the JSON configuration")
        ->required();

    // predict ---------------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "Predict a CSV with a saved model");
    std::string predict_artifact, predict_input, predict_output = "outcomes.csv";
    predict->add_option("--artifact", predict_artifact, "Path to the saved model")
        ->required();
    predict->add_option("--input", predict_input, "CSV of rows to predict")->required();
    predict->add_option("--output", predict_output, "Outcome table destination");

    // evaluate --------------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "Score an outcome table against truth");
    std::string eval_outcomes, eval_data, eval_target, eval_report = "evaluation.json";
    std::vector<double> eval_taus = {0.01, 0.005};
    double eval_accuracy_tau = 0.01;
    evaluate->add_option("--outcomes", eval_outcomes, "Outcome table from 'predict'")
        ->required();
    evaluate->add_option("--data", eval_data, "CSV containing the true targets")
        ->required();
    evaluate->add_option("--target-column", eval_target, "Name of the target column")
        ->required();
    evaluate->add_option("--tau", eval_taus, "Relative-error thresholds to report");
    evaluate->add_option("--accuracy-tau", eval_accuracy_tau,
                         "Relative-error threshold separating accurate from inaccurate");
    evaluate->add_option("--output", eval_report, "Report destination");

    // compare ---------------------------------------------------------------
    auto* compare =
        app.add_subcommand("compare", "Run baselines and the dynamic method side by side");
    std::string compare_config_path;
    compare->add_option("--config", compare_config_path, "Path to the JSON configuration")
        ->required();

    // synth -----------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic regression dataset");
    std::string synth_output = "synthetic.csv";
    std::string synth_distribution = "normal";
    dca::SyntheticSpec spec;
    long long synth_rows = static_cast<long long>(spec.n_samples);
    long long synth_features = static_cast<long long>(spec.n_features);
    std::uint64_t synth_seed = spec.seed;
    synth->add_option("--output", synth_output, "CSV destination");
    synth->add_option("--rows", synth_rows, "Number of rows")->check(CLI::PositiveNumber);
    synth->add_option("--features", synth_features, "Number of feature columns")
        ->check(CLI::PositiveNumber);
    synth->add_option("--distribution", synth_distribution, "Target distribution")
        ->check(CLI::IsMember({"normal", "uniform"}));
    synth->add_option("--target-mean", spec.target_mean, "Mean of a normal target");
    synth->add_option("--target-stdev", spec.target_stdev,
                      "Standard deviation of a normal target");
    synth->add_option("--target-low", spec.target_low, "Lower bound of a uniform target");
    synth->add_option("--target-high", spec.target_high, "Upper bound of a uniform target");
    synth->add_option("--correlation", spec.correlation,
                      "Feature-target correlation in [0, 1]");
    synth->add_option("--noise", spec.noise, "Additive feature noise scale");
    synth->add_option("--seed", synth_seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (train->parsed()) {
        dca::RunConfig config = dca::load_run_config(train_config_path);
        auto report = dca::cmd_train(config);
        std::cout << "wrote " << config.artifact_path << " and " << config.report_path
                  << " (dc_error=" << report.at("dc_error").get<double>()
                  << ", best_kind=" << report.at("best_kind").get<std::string>() << ")\n";
    } else if (predict->parsed()) {
        auto report = dca::cmd_predict(predict_artifact, predict_input, predict_output);
        std::cout << "wrote " << predict_output << " ("
                  << report.at("rows").at("predicted").get<std::size_t>()
                  << " rows, excluded_rate="
                  << report.at("excluded_rate").get<double>() << ")\n";
    } else if (evaluate->parsed()) {
        auto report = dca::cmd_evaluate(eval_outcomes, eval_data, eval_target, eval_taus,
                                        eval_accuracy_tau, eval_report);
        std::cout << "wrote " << eval_report << " (missed_count="
                  << report.at("misses").at("missed_count").get<std::size_t>() << ")\n";
    } else if (compare->parsed()) {
        dca::RunConfig config = dca::load_run_config(compare_config_path);
        auto report = dca::cmd_compare(config);
        std::cout << "wrote " << config.compare_json_path << " and "
                  << config.compare_csv_path << " ("
                  << report.at("runs").size() << " run(s))\n";
    } else if (synth->parsed()) {
        spec.n_samples = static_cast<std::size_t>(synth_rows);
        spec.n_features = static_cast<std::size_t>(synth_features);
        spec.distribution = synth_distribution == "uniform"
                                ? dca::SyntheticSpec::TargetDistribution::kUniform
                                : dca::SyntheticSpec::TargetDistribution::kNormal;
        spec.seed = synth_seed;
        auto report = dca::cmd_synth(spec, synth_output);
        std::cout << "wrote " << synth_output << " ("
                  << report.at("rows").get<std::size_t>() << " rows)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const dca::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

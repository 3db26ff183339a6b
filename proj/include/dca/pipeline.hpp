#ifndef DCA_PIPELINE_HPP
#define DCA_PIPELINE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dca/artifact.hpp"
#include "dca/baselines.hpp"
#include "dca/dataset.hpp"
#include "dca/dynamic_loop.hpp"
#include "dca/exclusion.hpp"
#include "dca/interval_models.hpp"
#include "dca/metrics.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Orchestration: configuration, pipeline commands, report emission
// ---------------------------------------------------------------------------

// Invalid configuration or input data; commands map it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // Data and splits.
    std::string input;
    std::string target_column;
    double train_fraction = 0.3;
    double iqr_multiplier = 1.5;  // <= 0 disables outlier filtering
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;  // optional multi-seed protocol

    // Segmentation and refinement loop.
    int n_intervals = 3;
    std::vector<double> manual_ratios;  // empty = automatic placement
    std::string auto_strategy = "fluctuation";
    double bandwidth = 0.0;  // 0 = Silverman's rule
    std::vector<std::string> kinds = {"decision_tree", "random_forest",
                                      "gradient_boosted_trees"};
    int max_iterations = 50;
    double step_fraction = 0.25;
    ConvergenceConfig convergence;
    ClassifierParams classifier_params;

    // Per-interval models.
    std::string regressor = "ordinary_least_squares";
    int neighbor_divisor = 4;

    // Exclusion.
    std::vector<double> exclusion_factors;  // empty = uniform exclusion_factor
    double exclusion_factor = 1.05;
    bool drop_first = false;
    bool drop_last = false;

    // Evaluation.
    std::vector<double> taus = {0.01, 0.005};
    double accuracy_tau = 0.01;
    std::vector<std::string> baselines = {"dp", "kc", "gc"};
    int cluster_count = 0;  // 0 = n_intervals

    // Output paths.
    std::string artifact_path = "model.json";
    std::string report_path = "train_report.json";
    std::string test_csv_path;  // optional: write the held-out split
    std::string compare_json_path = "compare.json";
    std::string compare_csv_path = "compare.csv";
};

// Strict parse: unknown keys, wrong types, and out-of-range values all raise
// ConfigError before any computation starts.
RunConfig parse_run_config(const nlohmann::ordered_json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

LoopConfig loop_config_from(const RunConfig& config, std::uint64_t seed);
ExclusionConfig exclusion_config_from(const RunConfig& config);

// Ingested, filtered, split, and normalized data for one seed.
struct PreparedData {
    Dataset train_raw;
    Dataset test_raw;
    Dataset train_norm;
    Dataset test_norm;
    Dataset train_t;  // normalized scale
    Dataset train_p;  // normalized scale
    NormalizationParams params;
    std::size_t dropped_rows = 0;      // ingestion drops (empty cells)
    std::size_t removed_outliers = 0;  // interquartile-range removals
};

PreparedData prepare_data(const RunConfig& config, std::uint64_t seed);

struct TrainProduct {
    ModelArtifact artifact;
    nlohmann::ordered_json report;
    Dataset test_raw;
};

// The full training pipeline in memory: ingest, preprocess, split, refine,
// assemble the ensemble, and compose the training report.
TrainProduct run_training(const RunConfig& config, std::uint64_t seed);

// Commands: each validates fully, then writes its outputs and returns the
// written report document.
nlohmann::ordered_json cmd_train(const RunConfig& config);
nlohmann::ordered_json cmd_predict(const std::string& artifact_path,
                                   const std::string& input_csv,
                                   const std::string& output_csv);
nlohmann::ordered_json cmd_evaluate(const std::string& outcomes_csv,
                                    const std::string& data_csv,
                                    const std::string& target_column,
                                    const std::vector<double>& taus,
                                    double accuracy_tau,
                                    const std::string& report_path);
nlohmann::ordered_json cmd_compare(const RunConfig& config);
nlohmann::ordered_json cmd_synth(const SyntheticSpec& spec, const std::string& output_csv);

// Outcome-table persistence (CSV with a fixed header).
void write_outcomes_csv(const std::vector<PredictionOutcome>& outcomes,
                        const std::string& path);
std::vector<PredictionOutcome> read_outcomes_csv(const std::string& path);

// Dataset persistence with the target as a named final column.
void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& target_name = "target");

}  // namespace dca

#endif  // DCA_PIPELINE_HPP

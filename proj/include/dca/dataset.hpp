#ifndef DCA_DATASET_HPP
#define DCA_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dca {

// ---------------------------------------------------------------------------
// Tabular data container and preprocessing
// ---------------------------------------------------------------------------

enum class Role {
    kRaw,
    kTrain,
    kTest,
    kTrainT,
    kTrainP,
};

std::string role_name(Role role);

struct Dataset {
    std::vector<std::string> column_names;  // feature columns only
    std::vector<std::vector<double>> rows;  // row-major feature matrix
    std::vector<double> targets;            // one target per row
    std::vector<std::int64_t> row_ids;      // stable ids from ingestion order
    Role role = Role::kRaw;

    std::size_t size() const { return rows.size(); }
    std::size_t feature_count() const { return column_names.size(); }

    // Throws std::runtime_error if the row/target/id shapes disagree.
    void check_consistent(const std::string& context) const;
};

struct NormalizationParams {
    std::vector<double> feature_min;
    std::vector<double> feature_max;
    std::vector<bool> feature_constant;
    double target_min = 0.0;
    double target_max = 0.0;
    bool target_constant = false;
};

struct LoadResult {
    Dataset dataset;
    std::size_t dropped_rows = 0;  // rows discarded for empty cells
};

// Reads a comma-separated file with a header row. Cells must be decimal
// numbers or empty; a row containing any empty cell is dropped and counted.
LoadResult load_csv(const std::string& path, const std::string& target_column);

// Empirical quantile with linear interpolation between order statistics:
// h = (n - 1) * q, result = v[floor(h)] + (h - floor(h)) * (v[floor(h)+1] - v[floor(h)]).
// `sorted_values` must be ascending and non-empty; q in [0, 1].
double quantile_linear(const std::vector<double>& sorted_values, double q);

// Removes every row holding a value outside [Q1 - multiplier*IQR,
// Q3 + multiplier*IQR] in any feature column or the target.
std::pair<Dataset, std::size_t> iqr_filter(const Dataset& ds, double multiplier = 1.5);

// Min-max scales every feature column and the target to [0, 1].
// Constant columns map to 0 and are flagged.
std::pair<Dataset, NormalizationParams> normalize(const Dataset& ds);

// Applies previously fitted parameters (train-set statistics) to new data.
Dataset apply_normalization(const Dataset& ds, const NormalizationParams& params);

double normalize_target_value(double value, const NormalizationParams& params);
double denormalize_target_value(double value, const NormalizationParams& params);

// Seeded uniform-random disjoint partition. The first-named output receives
// the extra row when n * train_fraction is fractional. Row order within each
// part follows the original dataset order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

// 1:1 partition of a training set into the classifier-fitting half (train_t)
// and the validation half (train_p).
std::pair<Dataset, Dataset> split_tt(const Dataset& train, std::uint64_t seed);

}  // namespace dca

#endif  // DCA_DATASET_HPP

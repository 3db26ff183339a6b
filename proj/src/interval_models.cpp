#include "dca/interval_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dca/linalg.hpp"

namespace dca {

std::string regressor_kind_name(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::kOrdinaryLeastSquares: return "ordinary_least_squares";
    }
    return "unknown";
}

RegressorKind regressor_kind_from_name(const std::string& name) {
    if (name == "ordinary_least_squares") {
        return RegressorKind::kOrdinaryLeastSquares;
    }
    throw std::invalid_argument("regressor_kind_from_name: unknown kind '" + name + "'");
}

double RegressorModel::predict(const std::vector<double>& row) const {
    if (row.size() != coefficients.size()) {
        throw std::invalid_argument("RegressorModel::predict: feature width mismatch");
    }
    double value = intercept;
    for (std::size_t i = 0; i < row.size(); ++i) {
        value += coefficients[i] * row[i];
    }
    return value;
}

Dataset assemble_redundant(const Dataset& train, const std::vector<int>& labels,
                           int interval, const SegmentationList& seg,
                           int neighbor_divisor) {
    train.check_consistent("assemble_redundant");
    seg.check_valid("assemble_redundant");
    if (labels.size() != train.size()) {
        throw std::invalid_argument("assemble_redundant: label count differs from rows");
    }
    if (interval < 0 || interval >= seg.n_intervals) {
        throw std::invalid_argument("assemble_redundant: interval out of range");
    }
    if (neighbor_divisor < 1) {
        throw std::invalid_argument("assemble_redundant: neighbor_divisor must be >= 1");
    }

    std::vector<std::size_t> own;
    std::vector<std::pair<double, std::size_t>> neighbors;  // (distance to cut, row)
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (labels[i] == interval) {
            own.push_back(i);
        } else if (labels[i] == interval - 1) {
            const double cut = seg.cuts[static_cast<std::size_t>(interval - 1)];
            neighbors.emplace_back(std::abs(cut - train.targets[i]), i);
        } else if (labels[i] == interval + 1) {
            const double cut = seg.cuts[static_cast<std::size_t>(interval)];
            neighbors.emplace_back(std::abs(train.targets[i] - cut), i);
        }
    }
    if (own.empty()) {
        throw std::runtime_error("assemble_redundant: interval " +
                                 std::to_string(interval) + " has no training rows");
    }

    const std::size_t cap = own.size() / static_cast<std::size_t>(neighbor_divisor);
    std::sort(neighbors.begin(), neighbors.end());
    if (neighbors.size() > cap) {
        neighbors.resize(cap);
    }

    Dataset subset;
    subset.column_names = train.column_names;
    subset.role = train.role;
    subset.rows.reserve(own.size() + neighbors.size());
    auto push_row = [&](std::size_t i) {
        subset.rows.push_back(train.rows[i]);
        subset.targets.push_back(train.targets[i]);
        subset.row_ids.push_back(train.row_ids[i]);
    };
    for (std::size_t i : own) {
        push_row(i);
    }
    for (const auto& [distance, i] : neighbors) {
        (void)distance;
        push_row(i);
    }
    return subset;
}

RegressorModel fit_regressor(const Dataset& subset) {
    subset.check_consistent("fit_regressor");
    if (subset.size() < 2) {
        throw std::runtime_error("fit_regressor: need at least 2 rows");
    }
    if (subset.feature_count() == 0) {
        throw std::runtime_error("fit_regressor: need at least 1 feature");
    }
    const LeastSquaresSolution solution = solve_least_squares(subset.rows, subset.targets);
    RegressorModel model;
    model.coefficients = solution.coefficients;
    model.intercept = solution.intercept;
    return model;
}

NormalizationParams identity_normalization(std::size_t n_features) {
    NormalizationParams params;
    params.feature_min.assign(n_features, 0.0);
    params.feature_max.assign(n_features, 1.0);
    params.feature_constant.assign(n_features, false);
    params.target_min = 0.0;
    params.target_max = 1.0;
    params.target_constant = false;
    return params;
}

std::vector<ValidRange> IntervalEnsemble::valid_ranges() const {
    std::vector<ValidRange> ranges =
        expand_intervals(segmentation, exclusion, train_target_min, train_target_max);
    for (ValidRange& range : ranges) {
        if (!range.empty) {
            range.low = denormalize_target_value(range.low, normalization);
            range.high = denormalize_target_value(range.high, normalization);
        }
    }
    return ranges;
}

std::vector<PredictionOutcome> IntervalEnsemble::predict(
    const std::vector<std::vector<double>>& raw_rows,
    const std::vector<std::int64_t>& row_ids) const {
    const std::size_t width = normalization.feature_min.size();
    if (!row_ids.empty() && row_ids.size() != raw_rows.size()) {
        throw std::invalid_argument("IntervalEnsemble::predict: row id count mismatch");
    }

    const std::vector<ValidRange> ranges = valid_ranges();
    std::vector<PredictionOutcome> outcomes;
    outcomes.reserve(raw_rows.size());
    std::vector<double> normalized(width);
    for (std::size_t i = 0; i < raw_rows.size(); ++i) {
        const std::vector<double>& row = raw_rows[i];
        if (row.size() != width) {
            throw std::invalid_argument("IntervalEnsemble::predict: feature width mismatch");
        }
        for (std::size_t c = 0; c < width; ++c) {
            normalized[c] = normalization.feature_constant[c]
                                ? 0.0
                                : (row[c] - normalization.feature_min[c]) /
                                      (normalization.feature_max[c] -
                                       normalization.feature_min[c]);
        }

        PredictionOutcome outcome;
        outcome.row_id = row_ids.empty() ? static_cast<std::int64_t>(i) : row_ids[i];
        outcome.interval = classifier.predict(normalized);
        const double predicted_scaled =
            regressors[static_cast<std::size_t>(outcome.interval)].predict(normalized);
        outcome.predicted = denormalize_target_value(predicted_scaled, normalization);
        const ValidRange& range = ranges[static_cast<std::size_t>(outcome.interval)];
        outcome.range_low = range.low;
        outcome.range_high = range.high;
        outcome.range_empty = range.empty;
        outcomes.push_back(outcome);
    }
    return outcomes;
}

IntervalEnsemble build_ensemble(const Dataset& train,
                                const DynamicClassificationResult& dc_result,
                                const NormalizationParams& normalization,
                                const ExclusionConfig& exclusion,
                                int neighbor_divisor) {
    train.check_consistent("build_ensemble");
    const SegmentationList& seg = dc_result.optimal_segmentation;
    seg.check_valid("build_ensemble");
    if (normalization.feature_min.size() != train.feature_count()) {
        throw std::invalid_argument("build_ensemble: normalization width mismatch");
    }
    if (exclusion.factors.size() != static_cast<std::size_t>(seg.n_intervals)) {
        throw std::invalid_argument("build_ensemble: exclusion factor count mismatch");
    }

    IntervalEnsemble ensemble;
    ensemble.classifier = dc_result.best_model;
    ensemble.segmentation = seg;
    ensemble.normalization = normalization;
    ensemble.exclusion = exclusion;
    ensemble.neighbor_divisor = neighbor_divisor;
    ensemble.column_names = train.column_names;

    const auto [min_it, max_it] =
        std::minmax_element(train.targets.begin(), train.targets.end());
    ensemble.train_target_min = *min_it;
    ensemble.train_target_max = *max_it;

    const std::vector<int> labels = pseudo_labels(train.targets, seg);
    ensemble.regressors.reserve(static_cast<std::size_t>(seg.n_intervals));
    for (int k = 0; k < seg.n_intervals; ++k) {
        const Dataset subset = assemble_redundant(train, labels, k, seg, neighbor_divisor);
        ensemble.regressors.push_back(fit_regressor(subset));
    }
    return ensemble;
}

}  // namespace dca

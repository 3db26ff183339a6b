#ifndef DCA_INTERVAL_MODELS_HPP
#define DCA_INTERVAL_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dca/classifier.hpp"
#include "dca/dataset.hpp"
#include "dca/dynamic_loop.hpp"
#include "dca/exclusion.hpp"
#include "dca/prediction.hpp"
#include "dca/segmentation.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Per-interval regressors over redundantly assembled subsets
// ---------------------------------------------------------------------------

enum class RegressorKind {
    kOrdinaryLeastSquares,
};

std::string regressor_kind_name(RegressorKind kind);
RegressorKind regressor_kind_from_name(const std::string& name);

struct RegressorModel {
    RegressorKind kind = RegressorKind::kOrdinaryLeastSquares;
    std::vector<double> coefficients;
    double intercept = 0.0;

    double predict(const std::vector<double>& row) const;
};

// The interval's own rows plus up to floor(K / neighbor_divisor) rows from the
// two adjacent intervals (K = interval row count), chosen nearest-by-target to
// the interval's boundary cuts, merged across both sides by distance.
Dataset assemble_redundant(const Dataset& train, const std::vector<int>& labels,
                           int interval, const SegmentationList& seg,
                           int neighbor_divisor = 4);

// Ordinary least squares with intercept; rank-deficient systems get the
// minimum-norm solution.
RegressorModel fit_regressor(const Dataset& subset);

// Identity parameters: applying or inverting them changes nothing. Lets
// ensembles run on data that is already in its final scale.
NormalizationParams identity_normalization(std::size_t n_features);

struct IntervalEnsemble {
    ClassifierModel classifier;
    SegmentationList segmentation;  // same scale as the data the loop saw
    std::vector<RegressorModel> regressors;
    NormalizationParams normalization;  // raw scale -> loop scale
    ExclusionConfig exclusion;
    double train_target_min = 0.0;  // loop-scale extremes of the fitting data
    double train_target_max = 1.0;
    int neighbor_divisor = 4;
    std::vector<std::string> column_names;

    // Expanded per-interval valid ranges on the original target scale.
    std::vector<ValidRange> valid_ranges() const;

    // Routes each raw-scale row through the classifier to its interval's
    // regressor; predictions and ranges come back on the original target
    // scale. Exclusion flags are left unset (see apply_exclusion).
    std::vector<PredictionOutcome> predict(
        const std::vector<std::vector<double>>& raw_rows,
        const std::vector<std::int64_t>& row_ids = {}) const;
};

// Labels the training set with the optimal segmentation and fits one regressor
// per interval on its redundant subset.
IntervalEnsemble build_ensemble(const Dataset& train,
                                const DynamicClassificationResult& dc_result,
                                const NormalizationParams& normalization,
                                const ExclusionConfig& exclusion,
                                int neighbor_divisor = 4);

}  // namespace dca

#endif  // DCA_INTERVAL_MODELS_HPP

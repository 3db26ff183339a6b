#ifndef DCA_METRICS_HPP
#define DCA_METRICS_HPP

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "dca/prediction.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Evaluation metrics
// ---------------------------------------------------------------------------

// |y_pred - y_true| / max(|y_true|, 1e-12).
double relative_error(double y_true, double y_pred);

// Fraction of samples with relative error <= tau.
double within_ratio(const std::vector<double>& truths, const std::vector<double>& preds,
                    double tau);

// Mean of (1 - relative error), clipped to [0, 1] per sample.
double average_accuracy(const std::vector<double>& truths,
                        const std::vector<double>& preds);

// (mean squared error, R^2 = 1 - SSE/SST). Errors on constant truths, where
// R^2 is undefined.
std::pair<double, double> mse_r2(const std::vector<double>& truths,
                                 const std::vector<double>& preds);

struct MissOverkill {
    std::int64_t missed_count = 0;    // inaccurate yet retained
    double missed_rate = 0.0;         // over all inaccurate samples
    std::int64_t overkill_count = 0;  // accurate yet excluded
    double overkill_rate = 0.0;       // over all accurate samples
    std::int64_t inaccurate_total = 0;
    std::int64_t accurate_total = 0;
};

// A sample is inaccurate iff its relative error exceeds accuracy_tau.
MissOverkill miss_overkill(const std::vector<PredictionOutcome>& outcomes,
                           const std::vector<double>& truths, double accuracy_tau);

// Metrics over one set of (truth, prediction) pairs.
struct MetricsView {
    std::int64_t count = 0;
    double mse = 0.0;
    double r2 = 0.0;
    bool r2_defined = false;
    double average_accuracy = 0.0;
    std::map<double, double> within;  // tau -> ratio
};

MetricsView metrics_view(const std::vector<double>& truths,
                         const std::vector<double>& preds,
                         const std::vector<double>& taus);

struct EvaluationReport {
    MetricsView all;       // every scored sample
    MetricsView retained;  // samples that survived exclusion
    double excluded_rate = 0.0;
    MissOverkill misses;
    double dc_error = 0.0;  // carried through from training when known
};

// Joint view over outcomes and their aligned truths.
EvaluationReport evaluate_outcomes(const std::vector<PredictionOutcome>& outcomes,
                                   const std::vector<double>& truths,
                                   const std::vector<double>& taus, double accuracy_tau,
                                   double dc_error = 0.0);

}  // namespace dca

#endif  // DCA_METRICS_HPP

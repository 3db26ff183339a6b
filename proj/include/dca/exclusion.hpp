#ifndef DCA_EXCLUSION_HPP
#define DCA_EXCLUSION_HPP

#include <cstdint>
#include <vector>

#include "dca/prediction.hpp"
#include "dca/segmentation.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Valid-range construction and prediction culling
// ---------------------------------------------------------------------------

struct ExclusionConfig {
    std::vector<double> factors;  // one per interval, each >= 1
    bool drop_first = false;
    bool drop_last = false;
};

ExclusionConfig uniform_exclusion_config(int n_intervals, double factor = 1.05,
                                         bool drop_first = false, bool drop_last = false);

struct ValidRange {
    double low = 0.0;
    double high = 0.0;
    bool empty = false;  // the whole interval is discarded
};

// Interval spans (outer intervals closed by the observed training-target
// extremes) widened symmetrically about their midpoints: half-width scales by
// the interval's factor. Dropped intervals become empty ranges.
std::vector<ValidRange> expand_intervals(const SegmentationList& seg,
                                         const ExclusionConfig& cfg,
                                         double train_target_min,
                                         double train_target_max);

// Flags each outcome excluded when its assigned range is empty or its
// predicted value falls outside [low, high]. Every outcome is returned; none
// are dropped.
std::vector<PredictionOutcome> apply_exclusion(std::vector<PredictionOutcome> outcomes,
                                               const std::vector<ValidRange>& ranges);

struct ExclusionSummary {
    std::int64_t total = 0;
    std::int64_t retained = 0;
    std::int64_t excluded = 0;
    double excluded_rate = 0.0;
    double retained_rate = 0.0;
    std::vector<std::int64_t> per_interval_total;
    std::vector<std::int64_t> per_interval_excluded;
};

ExclusionSummary exclusion_summary(const std::vector<PredictionOutcome>& outcomes,
                                   int n_intervals);

}  // namespace dca

#endif  // DCA_EXCLUSION_HPP

#include "dca/exclusion.hpp"

#include <stdexcept>
#include <string>

namespace dca {

ExclusionConfig uniform_exclusion_config(int n_intervals, double factor, bool drop_first,
                                         bool drop_last) {
    if (n_intervals < 1) {
        throw std::invalid_argument("uniform_exclusion_config: n_intervals must be >= 1");
    }
    ExclusionConfig cfg;
    cfg.factors.assign(static_cast<std::size_t>(n_intervals), factor);
    cfg.drop_first = drop_first;
    cfg.drop_last = drop_last;
    return cfg;
}

std::vector<ValidRange> expand_intervals(const SegmentationList& seg,
                                         const ExclusionConfig& cfg,
                                         double train_target_min,
                                         double train_target_max) {
    seg.check_valid("expand_intervals");
    if (cfg.factors.size() != static_cast<std::size_t>(seg.n_intervals)) {
        throw std::invalid_argument("expand_intervals: factor count differs from intervals");
    }
    for (double f : cfg.factors) {
        if (!(f >= 1.0)) {
            throw std::invalid_argument("expand_intervals: factors must be >= 1");
        }
    }
    if (!(train_target_min <= train_target_max)) {
        throw std::invalid_argument("expand_intervals: target extremes out of order");
    }

    std::vector<ValidRange> ranges;
    ranges.reserve(static_cast<std::size_t>(seg.n_intervals));
    for (int k = 0; k < seg.n_intervals; ++k) {
        ValidRange range;
        if ((cfg.drop_first && k == 0) || (cfg.drop_last && k == seg.n_intervals - 1)) {
            range.empty = true;
            ranges.push_back(range);
            continue;
        }
        const auto [low, high] = interval_span(seg, k, train_target_min, train_target_max);
        const double mid = 0.5 * (low + high);
        const double half = 0.5 * (high - low) * cfg.factors[static_cast<std::size_t>(k)];
        range.low = mid - half;
        range.high = mid + half;
        ranges.push_back(range);
    }
    return ranges;
}

std::vector<PredictionOutcome> apply_exclusion(std::vector<PredictionOutcome> outcomes,
                                               const std::vector<ValidRange>& ranges) {
    for (PredictionOutcome& outcome : outcomes) {
        if (outcome.interval < 0 ||
            static_cast<std::size_t>(outcome.interval) >= ranges.size()) {
            throw std::invalid_argument("apply_exclusion: outcome interval " +
                                        std::to_string(outcome.interval) +
                                        " has no valid range");
        }
        const ValidRange& range = ranges[static_cast<std::size_t>(outcome.interval)];
        outcome.range_empty = range.empty;
        if (range.empty) {
            outcome.range_low = 0.0;
            outcome.range_high = 0.0;
            outcome.excluded = true;
        } else {
            outcome.range_low = range.low;
            outcome.range_high = range.high;
            outcome.excluded =
                outcome.predicted < range.low || outcome.predicted > range.high;
        }
    }
    return outcomes;
}

ExclusionSummary exclusion_summary(const std::vector<PredictionOutcome>& outcomes,
                                   int n_intervals) {
    if (outcomes.empty()) {
        throw std::invalid_argument("exclusion_summary: no outcomes");
    }
    if (n_intervals < 1) {
        throw std::invalid_argument("exclusion_summary: n_intervals must be >= 1");
    }

    ExclusionSummary summary;
    summary.total = static_cast<std::int64_t>(outcomes.size());
    summary.per_interval_total.assign(static_cast<std::size_t>(n_intervals), 0);
    summary.per_interval_excluded.assign(static_cast<std::size_t>(n_intervals), 0);
    for (const PredictionOutcome& outcome : outcomes) {
        if (outcome.interval < 0 || outcome.interval >= n_intervals) {
            throw std::invalid_argument("exclusion_summary: interval out of range");
        }
        const auto k = static_cast<std::size_t>(outcome.interval);
        ++summary.per_interval_total[k];
        if (outcome.excluded) {
            ++summary.excluded;
            ++summary.per_interval_excluded[k];
        } else {
            ++summary.retained;
        }
    }
    summary.excluded_rate =
        static_cast<double>(summary.excluded) / static_cast<double>(summary.total);
    summary.retained_rate =
        static_cast<double>(summary.retained) / static_cast<double>(summary.total);
    return summary;
}

}  // namespace dca

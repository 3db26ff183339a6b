#ifndef DCA_DYNAMIC_LOOP_HPP
#define DCA_DYNAMIC_LOOP_HPP

#include <cstdint>
#include <vector>

#include "dca/classifier.hpp"
#include "dca/dataset.hpp"
#include "dca/segmentation.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Iterative boundary refinement: penalties, correction, scoring, convergence
// ---------------------------------------------------------------------------

// (x / n)^2 + 1 for misclassification degree x out of n intervals.
double degree_penalty(int x, int n);

// m^2 for a class with m misclassified samples.
double count_penalty(std::int64_t m);

struct PenaltyRecord {
    std::vector<int> degree;                // per-sample |true - predicted|
    std::vector<double> weight;             // per-sample degree penalty, >= 1
    std::vector<std::int64_t> misclassified_per_class;  // per true class
    std::vector<double> class_penalty;      // squared per-class counts
    std::int64_t total_misclassified = 0;
    int n_intervals = 0;
};

PenaltyRecord penalty_record(const std::vector<int>& true_labels,
                             const std::vector<int>& pred_labels, int n_intervals);

// Training weights for the next iteration: misclassified samples carry their
// degree penalty amplified by their class's share of the squared-count
// penalty; correct samples stay at 1. Normalized to mean 1.
std::vector<double> build_sample_weights(const PenaltyRecord& penalties,
                                         const std::vector<int>& true_labels);

// Moves each cut toward the heavier side of penalty-weighted contested samples
// (samples in the interval adjacent to the cut whose prediction landed on the
// other side). Shift distance: the step_fraction-quantile contested target, cut
// re-placed at the midpoint to the next distinct observed value. Moves are
// clamped so cuts stay strictly ordered and every interval keeps at least one
// anchor target.
SegmentationList correct_boundaries(const SegmentationList& seg,
                                    const std::vector<double>& train_p_targets,
                                    const std::vector<int>& true_labels,
                                    const std::vector<int>& pred_labels,
                                    double step_fraction,
                                    const std::vector<double>& anchor_targets);

// 0.5 * min(losses) + 0.5 * mean(last 10 losses); with fewer than 10 entries
// the mean runs over all of them.
double score(const std::vector<double>& loss_list);

enum class ConvergenceStatus {
    kContinue,
    kStalled,    // last stall_window losses pairwise within stall_tolerance
    kUnstable,   // stdev of last instability_window losses above threshold
};

struct ConvergenceConfig {
    int stall_window = 15;
    double stall_tolerance = 1e-12;
    int instability_window = 10;
    double instability_threshold = 0.05;
};

ConvergenceStatus convergence_check(const std::vector<double>& loss_list,
                                    const ConvergenceConfig& cfg = {});

struct KindTrace {
    ClassifierKind kind = ClassifierKind::kDecisionTree;
    std::vector<double> losses;  // one entry per iteration
    double best_loss = 1.0;
    int best_iteration = -1;
    double score = 1.0;
};

struct LoopConfig {
    int n_intervals = 3;
    std::vector<double> manual_ratios;  // empty = automatic placement
    SegmentationOptions segmentation;
    std::vector<ClassifierKind> kinds = all_classifier_kinds();
    ClassifierParams classifier_params;
    int max_iterations = 50;
    double step_fraction = 0.25;
    ConvergenceConfig convergence;
    std::uint64_t seed = 0;
};

struct DynamicClassificationResult {
    ClassifierKind best_kind = ClassifierKind::kDecisionTree;
    ClassifierModel best_model;
    SegmentationList optimal_segmentation;
    std::vector<KindTrace> trace;  // one per candidate kind
    double dc_error = 1.0;         // winner's best loss on train_p
    bool stalled = false;
    bool unstable = false;
    int iterations_run = 0;
    // Segmentation in force at each iteration (index 0 = initial list).
    std::vector<SegmentationList> segmentation_history;
};

// The full refinement loop: pseudo-label, train candidates, evaluate on
// train_p, penalize, correct boundaries; stops on stall, perfect loss, or the
// iteration cap. Winner = lowest score, ties broken by best loss then by the
// candidate order.
DynamicClassificationResult run_dynamic_classification(const Dataset& train_t,
                                                       const Dataset& train_p,
                                                       const LoopConfig& config);

}  // namespace dca

#endif  // DCA_DYNAMIC_LOOP_HPP

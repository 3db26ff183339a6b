#include "dca/dynamic_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dca/rng.hpp"

namespace dca {

namespace {

std::vector<double> distinct_sorted_union(const std::vector<double>& a,
                                          const std::vector<double>& b) {
    std::vector<double> values;
    values.reserve(a.size() + b.size());
    values.insert(values.end(), a.begin(), a.end());
    values.insert(values.end(), b.begin(), b.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

// Smallest observed value strictly greater than v, if any.
bool next_value_above(const std::vector<double>& sorted_values, double v, double& out) {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), v);
    if (it == sorted_values.end()) {
        return false;
    }
    out = *it;
    return true;
}

// Largest observed value strictly smaller than v, if any.
bool next_value_below(const std::vector<double>& sorted_values, double v, double& out) {
    auto it = std::lower_bound(sorted_values.begin(), sorted_values.end(), v);
    if (it == sorted_values.begin()) {
        return false;
    }
    out = *(it - 1);
    return true;
}

// True when [low, high) holds at least one anchor value.
bool has_anchor_in(const std::vector<double>& sorted_anchors, double low, double high) {
    auto it = std::lower_bound(sorted_anchors.begin(), sorted_anchors.end(), low);
    return it != sorted_anchors.end() && *it < high;
}

}  // namespace

double degree_penalty(int x, int n) {
    if (n < 1) {
        throw std::invalid_argument("degree_penalty: n must be positive");
    }
    if (x < 0 || x > n) {
        throw std::invalid_argument("degree_penalty: x must lie in [0, n]");
    }
    const double ratio = static_cast<double>(x) / static_cast<double>(n);
    return ratio * ratio + 1.0;
}

double count_penalty(std::int64_t m) {
    if (m < 0) {
        throw std::invalid_argument("count_penalty: m must be non-negative");
    }
    return static_cast<double>(m) * static_cast<double>(m);
}

PenaltyRecord penalty_record(const std::vector<int>& true_labels,
                             const std::vector<int>& pred_labels, int n_intervals) {
    if (true_labels.size() != pred_labels.size()) {
        throw std::invalid_argument("penalty_record: label vectors differ in size");
    }
    if (n_intervals < 1) {
        throw std::invalid_argument("penalty_record: n_intervals must be >= 1");
    }

    PenaltyRecord record;
    record.n_intervals = n_intervals;
    record.degree.reserve(true_labels.size());
    record.weight.reserve(true_labels.size());
    record.misclassified_per_class.assign(static_cast<std::size_t>(n_intervals), 0);

    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int truth = true_labels[i];
        const int pred = pred_labels[i];
        if (truth < 0 || truth >= n_intervals || pred < 0 || pred >= n_intervals) {
            throw std::invalid_argument("penalty_record: label outside [0, n_intervals)");
        }
        const int x = std::abs(truth - pred);
        record.degree.push_back(x);
        record.weight.push_back(degree_penalty(x, n_intervals));
        if (x > 0) {
            ++record.misclassified_per_class[static_cast<std::size_t>(truth)];
            ++record.total_misclassified;
        }
    }

    record.class_penalty.reserve(record.misclassified_per_class.size());
    for (std::int64_t m : record.misclassified_per_class) {
        record.class_penalty.push_back(count_penalty(m));
    }
    return record;
}

std::vector<double> build_sample_weights(const PenaltyRecord& penalties,
                                         const std::vector<int>& true_labels) {
    if (penalties.degree.size() != true_labels.size()) {
        throw std::invalid_argument("build_sample_weights: penalties/labels size mismatch");
    }
    const std::size_t n = true_labels.size();
    std::vector<double> weights(n, 1.0);
    if (penalties.total_misclassified == 0) {
        return weights;
    }

    const double total_sq =
        static_cast<double>(penalties.total_misclassified) *
        static_cast<double>(penalties.total_misclassified);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (penalties.degree[i] > 0) {
            const auto c = static_cast<std::size_t>(true_labels[i]);
            weights[i] = penalties.weight[i] * (1.0 + penalties.class_penalty[c] / total_sq);
        }
        sum += weights[i];
    }
    const double mean = sum / static_cast<double>(n);
    for (double& w : weights) {
        w /= mean;
    }
    return weights;
}

SegmentationList correct_boundaries(const SegmentationList& seg,
                                    const std::vector<double>& train_p_targets,
                                    const std::vector<int>& true_labels,
                                    const std::vector<int>& pred_labels,
                                    double step_fraction,
                                    const std::vector<double>& anchor_targets) {
    seg.check_valid("correct_boundaries");
    if (train_p_targets.size() != true_labels.size() ||
        train_p_targets.size() != pred_labels.size()) {
        throw std::invalid_argument("correct_boundaries: input sizes disagree");
    }
    if (!(step_fraction > 0.0) || step_fraction > 0.5) {
        throw std::invalid_argument("correct_boundaries: step_fraction outside (0, 0.5]");
    }
    if (anchor_targets.empty()) {
        throw std::invalid_argument("correct_boundaries: empty anchor targets");
    }
    if (seg.cuts.empty()) {
        return seg;
    }

    const int n = seg.n_intervals;
    const std::vector<double> observed =
        distinct_sorted_union(train_p_targets, anchor_targets);
    std::vector<double> anchors = anchor_targets;
    std::sort(anchors.begin(), anchors.end());
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> cuts = seg.cuts;
    for (int k = 1; k < n; ++k) {
        const std::size_t j = static_cast<std::size_t>(k - 1);
        const double cut = cuts[j];
        const double prev_cut = k >= 2 ? cuts[j - 1] : -kInf;
        const double next_cut = j + 1 < cuts.size() ? cuts[j + 1] : kInf;

        // Contested samples in the bands adjacent to this cut, with their
        // degree penalties as weights.
        std::vector<double> above;  // true side high, predicted side low
        std::vector<double> below;  // true side low, predicted side high
        double weight_above = 0.0;
        double weight_below = 0.0;
        for (std::size_t i = 0; i < train_p_targets.size(); ++i) {
            const double t = train_p_targets[i];
            const int truth = true_labels[i];
            const int pred = pred_labels[i];
            if (truth >= k && pred < k && t >= cut && t < next_cut) {
                above.push_back(t);
                weight_above += degree_penalty(std::abs(truth - pred), n);
            } else if (truth < k && pred >= k && t < cut && t >= prev_cut) {
                below.push_back(t);
                weight_below += degree_penalty(std::abs(truth - pred), n);
            }
        }
        if (weight_above == weight_below) {
            continue;
        }

        if (weight_above > weight_below) {
            // Move the cut up past the first step_fraction share of contested
            // targets, so their labels flip to the predicted side.
            std::sort(above.begin(), above.end());
            auto step = static_cast<std::size_t>(
                std::floor(step_fraction * static_cast<double>(above.size())));
            step = std::max<std::size_t>(step, 1);
            for (std::size_t t_idx = step; t_idx >= 1; --t_idx) {
                double neighbor = 0.0;
                if (!next_value_above(observed, above[t_idx - 1], neighbor)) {
                    continue;
                }
                const double pos = 0.5 * (above[t_idx - 1] + neighbor);
                if (pos <= cut || pos >= next_cut) {
                    continue;
                }
                if (!has_anchor_in(anchors, pos, next_cut)) {
                    continue;  // would empty the interval above the cut
                }
                cuts[j] = pos;
                break;
            }
        } else {
            std::sort(below.begin(), below.end(), std::greater<>());
            auto step = static_cast<std::size_t>(
                std::floor(step_fraction * static_cast<double>(below.size())));
            step = std::max<std::size_t>(step, 1);
            for (std::size_t t_idx = step; t_idx >= 1; --t_idx) {
                double neighbor = 0.0;
                if (!next_value_below(observed, below[t_idx - 1], neighbor)) {
                    continue;
                }
                const double pos = 0.5 * (below[t_idx - 1] + neighbor);
                if (pos >= cut || pos <= prev_cut) {
                    continue;
                }
                if (!has_anchor_in(anchors, prev_cut, pos)) {
                    continue;  // would empty the interval below the cut
                }
                cuts[j] = pos;
                break;
            }
        }
    }

    SegmentationList corrected;
    corrected.n_intervals = n;
    corrected.cuts = std::move(cuts);
    corrected.check_valid("correct_boundaries");
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (double a : anchors) {
        ++counts[static_cast<std::size_t>(interval_of(a, corrected))];
    }
    for (int c : counts) {
        if (c == 0) {
            throw std::logic_error("correct_boundaries: interval emptied despite clamps");
        }
    }
    return corrected;
}

double score(const std::vector<double>& loss_list) {
    if (loss_list.empty()) {
        throw std::invalid_argument("score: empty loss list");
    }
    const double best = *std::min_element(loss_list.begin(), loss_list.end());
    const std::size_t window = std::min<std::size_t>(loss_list.size(), 10);
    double tail_sum = 0.0;
    for (std::size_t i = loss_list.size() - window; i < loss_list.size(); ++i) {
        tail_sum += loss_list[i];
    }
    return 0.5 * best + 0.5 * tail_sum / static_cast<double>(window);
}

ConvergenceStatus convergence_check(const std::vector<double>& loss_list,
                                    const ConvergenceConfig& cfg) {
    const std::size_t n = loss_list.size();
    if (cfg.stall_window >= 2 && n >= static_cast<std::size_t>(cfg.stall_window)) {
        const auto begin = loss_list.end() - cfg.stall_window;
        const auto [lo, hi] = std::minmax_element(begin, loss_list.end());
        if (*hi - *lo <= cfg.stall_tolerance) {
            return ConvergenceStatus::kStalled;
        }
    }
    if (cfg.instability_window >= 2 &&
        n >= static_cast<std::size_t>(cfg.instability_window)) {
        const auto begin = loss_list.end() - cfg.instability_window;
        const auto count = static_cast<double>(cfg.instability_window);
        const double mean = std::accumulate(begin, loss_list.end(), 0.0) / count;
        double ss = 0.0;
        for (auto it = begin; it != loss_list.end(); ++it) {
            ss += (*it - mean) * (*it - mean);
        }
        if (std::sqrt(ss / count) > cfg.instability_threshold) {
            return ConvergenceStatus::kUnstable;
        }
    }
    return ConvergenceStatus::kContinue;
}

DynamicClassificationResult run_dynamic_classification(const Dataset& train_t,
                                                       const Dataset& train_p,
                                                       const LoopConfig& config) {
    train_t.check_consistent("run_dynamic_classification(train_t)");
    train_p.check_consistent("run_dynamic_classification(train_p)");
    if (train_t.size() < 2 || train_p.size() < 1) {
        throw std::invalid_argument("run_dynamic_classification: splits too small");
    }
    if (train_t.feature_count() != train_p.feature_count()) {
        throw std::invalid_argument(
            "run_dynamic_classification: train_t/train_p feature widths differ");
    }
    if (config.max_iterations < 1) {
        throw std::invalid_argument("run_dynamic_classification: max_iterations must be >= 1");
    }
    if (config.kinds.empty()) {
        throw std::invalid_argument("run_dynamic_classification: no candidate kinds");
    }

    SegmentationList seg = initial_segmentation(train_t.targets, config.n_intervals,
                                                config.manual_ratios, config.segmentation);

    const std::size_t n_kinds = config.kinds.size();
    DynamicClassificationResult result;
    result.trace.resize(n_kinds);
    for (std::size_t k = 0; k < n_kinds; ++k) {
        result.trace[k].kind = config.kinds[k];
    }

    struct BestState {
        double loss = std::numeric_limits<double>::infinity();
        int iteration = -1;
        SegmentationList seg;
        ClassifierModel model;
    };
    std::vector<BestState> bests(n_kinds);

    std::vector<double> weights(train_t.size(), 1.0);
    std::vector<double> min_losses;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        result.segmentation_history.push_back(seg);
        const std::vector<int> labels_t = pseudo_labels(train_t.targets, seg);
        const std::vector<int> labels_p = pseudo_labels(train_p.targets, seg);

        const std::vector<ClassifierModel> models =
            train_candidates(train_t.rows, labels_t, weights,
                             mix_seed(config.seed, static_cast<std::uint64_t>(iter)),
                             config.kinds, config.classifier_params);

        double iter_best_loss = std::numeric_limits<double>::infinity();
        std::size_t iter_best_kind = 0;
        std::vector<std::vector<int>> preds(n_kinds);
        for (std::size_t k = 0; k < n_kinds; ++k) {
            preds[k] = models[k].predict_all(train_p.rows);
            const ConfusionMatrix cm =
                confusion_from_predictions(labels_p, preds[k], config.n_intervals);
            const double loss = classification_loss(cm);
            result.trace[k].losses.push_back(loss);
            if (loss < bests[k].loss) {
                bests[k].loss = loss;
                bests[k].iteration = iter;
                bests[k].seg = seg;
                bests[k].model = models[k];
            }
            if (loss < iter_best_loss) {
                iter_best_loss = loss;
                iter_best_kind = k;
            }
        }
        min_losses.push_back(iter_best_loss);
        result.iterations_run = iter + 1;

        const ConvergenceStatus status = convergence_check(min_losses, config.convergence);
        if (status == ConvergenceStatus::kStalled) {
            result.stalled = true;
            break;
        }
        if (status == ConvergenceStatus::kUnstable) {
            result.unstable = true;  // warning only; the loop continues
        }
        if (iter_best_loss == 0.0 || iter + 1 == config.max_iterations) {
            break;
        }

        // Penalties on the classifier's own training mistakes drive the next
        // iteration's sample weights; validation disagreement moves the cuts.
        const std::vector<int> preds_t = models[iter_best_kind].predict_all(train_t.rows);
        const PenaltyRecord train_penalties =
            penalty_record(labels_t, preds_t, config.n_intervals);
        weights = build_sample_weights(train_penalties, labels_t);
        seg = correct_boundaries(seg, train_p.targets, labels_p, preds[iter_best_kind],
                                 config.step_fraction, train_t.targets);
    }

    std::size_t winner = 0;
    for (std::size_t k = 0; k < n_kinds; ++k) {
        result.trace[k].best_loss = bests[k].loss;
        result.trace[k].best_iteration = bests[k].iteration;
        result.trace[k].score = score(result.trace[k].losses);
        if (k > 0) {
            const KindTrace& current = result.trace[k];
            const KindTrace& leading = result.trace[winner];
            if (current.score < leading.score ||
                (current.score == leading.score && current.best_loss < leading.best_loss)) {
                winner = k;
            }
        }
    }

    result.best_kind = config.kinds[winner];
    result.best_model = std::move(bests[winner].model);
    result.optimal_segmentation = std::move(bests[winner].seg);
    result.dc_error = bests[winner].loss;
    return result;
}

}  // namespace dca

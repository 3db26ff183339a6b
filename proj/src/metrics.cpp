#include "dca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dca {

double relative_error(double y_true, double y_pred) {
    return std::abs(y_pred - y_true) / std::max(std::abs(y_true), 1e-12);
}

double within_ratio(const std::vector<double>& truths, const std::vector<double>& preds,
                    double tau) {
    if (truths.empty() || truths.size() != preds.size()) {
        throw std::invalid_argument("within_ratio: empty or mismatched inputs");
    }
    std::int64_t inside = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (relative_error(truths[i], preds[i]) <= tau) {
            ++inside;
        }
    }
    return static_cast<double>(inside) / static_cast<double>(truths.size());
}

double average_accuracy(const std::vector<double>& truths,
                        const std::vector<double>& preds) {
    if (truths.empty() || truths.size() != preds.size()) {
        throw std::invalid_argument("average_accuracy: empty or mismatched inputs");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        sum += std::clamp(1.0 - relative_error(truths[i], preds[i]), 0.0, 1.0);
    }
    return sum / static_cast<double>(truths.size());
}

std::pair<double, double> mse_r2(const std::vector<double>& truths,
                                 const std::vector<double>& preds) {
    if (truths.size() < 2 || truths.size() != preds.size()) {
        throw std::invalid_argument("mse_r2: need at least 2 aligned samples");
    }
    const auto n = static_cast<double>(truths.size());
    const double mean = std::accumulate(truths.begin(), truths.end(), 0.0) / n;
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        sse += (preds[i] - truths[i]) * (preds[i] - truths[i]);
        sst += (truths[i] - mean) * (truths[i] - mean);
    }
    if (sst == 0.0) {
        throw std::invalid_argument("mse_r2: constant truths, R^2 undefined");
    }
    return {sse / n, 1.0 - sse / sst};
}

MissOverkill miss_overkill(const std::vector<PredictionOutcome>& outcomes,
                           const std::vector<double>& truths, double accuracy_tau) {
    if (outcomes.size() != truths.size()) {
        throw std::invalid_argument("miss_overkill: outcome/truth size mismatch");
    }
    MissOverkill result;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const bool inaccurate =
            relative_error(truths[i], outcomes[i].predicted) > accuracy_tau;
        if (inaccurate) {
            ++result.inaccurate_total;
            if (!outcomes[i].excluded) {
                ++result.missed_count;
            }
        } else {
            ++result.accurate_total;
            if (outcomes[i].excluded) {
                ++result.overkill_count;
            }
        }
    }
    result.missed_rate = static_cast<double>(result.missed_count) /
                         static_cast<double>(std::max<std::int64_t>(result.inaccurate_total, 1));
    result.overkill_rate = static_cast<double>(result.overkill_count) /
                           static_cast<double>(std::max<std::int64_t>(result.accurate_total, 1));
    return result;
}

MetricsView metrics_view(const std::vector<double>& truths,
                         const std::vector<double>& preds,
                         const std::vector<double>& taus) {
    MetricsView view;
    view.count = static_cast<std::int64_t>(truths.size());
    if (truths.empty()) {
        return view;
    }
    view.average_accuracy = average_accuracy(truths, preds);
    for (double tau : taus) {
        view.within[tau] = within_ratio(truths, preds, tau);
    }
    if (truths.size() >= 2) {
        const double mean =
            std::accumulate(truths.begin(), truths.end(), 0.0) /
            static_cast<double>(truths.size());
        double sst = 0.0;
        for (double t : truths) {
            sst += (t - mean) * (t - mean);
        }
        if (sst > 0.0) {
            const auto [mse, r2] = mse_r2(truths, preds);
            view.mse = mse;
            view.r2 = r2;
            view.r2_defined = true;
            return view;
        }
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        sse += (preds[i] - truths[i]) * (preds[i] - truths[i]);
    }
    view.mse = sse / static_cast<double>(truths.size());
    return view;
}

EvaluationReport evaluate_outcomes(const std::vector<PredictionOutcome>& outcomes,
                                   const std::vector<double>& truths,
                                   const std::vector<double>& taus, double accuracy_tau,
                                   double dc_error) {
    if (outcomes.empty() || outcomes.size() != truths.size()) {
        throw std::invalid_argument("evaluate_outcomes: empty or mismatched inputs");
    }

    std::vector<double> all_preds;
    std::vector<double> kept_truths;
    std::vector<double> kept_preds;
    all_preds.reserve(outcomes.size());
    std::int64_t excluded = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        all_preds.push_back(outcomes[i].predicted);
        if (outcomes[i].excluded) {
            ++excluded;
        } else {
            kept_truths.push_back(truths[i]);
            kept_preds.push_back(outcomes[i].predicted);
        }
    }

    EvaluationReport report;
    report.all = metrics_view(truths, all_preds, taus);
    report.retained = metrics_view(kept_truths, kept_preds, taus);
    report.excluded_rate =
        static_cast<double>(excluded) / static_cast<double>(outcomes.size());
    report.misses = miss_overkill(outcomes, truths, accuracy_tau);
    report.dc_error = dc_error;
    return report;
}

}  // namespace dca

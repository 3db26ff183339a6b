#include "dca/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dca/dataset.hpp"

namespace dca {

namespace {

constexpr int kGridPoints = 512;

std::vector<double> sorted_copy(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

std::vector<double> distinct_sorted(const std::vector<double>& values) {
    std::vector<double> sorted = sorted_copy(values);
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return sorted;
}

}  // namespace

void SegmentationList::check_valid(const char* context) const {
    if (n_intervals < 1) {
        throw std::runtime_error(std::string(context) + ": n_intervals must be >= 1");
    }
    if (cuts.size() + 1 != static_cast<std::size_t>(n_intervals)) {
        throw std::runtime_error(std::string(context) + ": cut count does not match n_intervals");
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i] < cuts[i + 1])) {
            throw std::runtime_error(std::string(context) + ": cuts not strictly increasing");
        }
    }
}

DensityCurve kde_density(const std::vector<double>& values, double bandwidth) {
    if (values.size() < 2) {
        throw std::invalid_argument("kde_density: need at least 2 values");
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    if (*min_it == *max_it) {
        throw std::invalid_argument("kde_density: all values identical");
    }

    const auto n = static_cast<double>(values.size());
    if (bandwidth <= 0.0) {
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        const double sigma = std::sqrt(ss / (n - 1.0));
        bandwidth = 1.06 * sigma * std::pow(n, -0.2);
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("kde_density: degenerate bandwidth");
    }

    DensityCurve curve;
    curve.bandwidth = bandwidth;
    curve.grid.resize(kGridPoints);
    curve.density.assign(kGridPoints, 0.0);

    const double lo = *min_it - 3.0 * bandwidth;
    const double hi = *max_it + 3.0 * bandwidth;
    const double step = (hi - lo) / (kGridPoints - 1);
    for (int i = 0; i < kGridPoints; ++i) {
        curve.grid[i] = lo + step * i;
    }

    const double norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (double v : values) {
        for (int i = 0; i < kGridPoints; ++i) {
            const double z = (curve.grid[i] - v) / bandwidth;
            curve.density[i] += norm * std::exp(-0.5 * z * z);
        }
    }
    return curve;
}

std::vector<double> fluctuation_measure(const DensityCurve& curve) {
    if (curve.grid.size() < 2 || curve.density.size() != curve.grid.size()) {
        throw std::invalid_argument("fluctuation_measure: malformed density curve");
    }
    const double peak = *std::max_element(curve.density.begin(), curve.density.end());
    const double floor_term = 0.01 * peak;

    std::vector<double> g(curve.grid.size() - 1);
    for (std::size_t i = 0; i + 1 < curve.grid.size(); ++i) {
        const double dx = curve.grid[i + 1] - curve.grid[i];
        g[i] = std::abs(curve.density[i + 1] - curve.density[i]) / dx + floor_term;
    }
    return g;
}

std::vector<double> equal_mass_cut_positions(const DensityCurve& curve,
                                             const std::vector<double>& gap_weights,
                                             int n_intervals) {
    if (gap_weights.size() + 1 != curve.grid.size()) {
        throw std::invalid_argument("equal_mass_cut_positions: weight/grid size mismatch");
    }
    if (n_intervals < 1) {
        throw std::invalid_argument("equal_mass_cut_positions: n_intervals must be >= 1");
    }

    const std::size_t gaps = gap_weights.size();
    std::vector<double> cumulative(gaps + 1, 0.0);
    for (std::size_t i = 0; i < gaps; ++i) {
        const double mass = gap_weights[i] * (curve.grid[i + 1] - curve.grid[i]);
        cumulative[i + 1] = cumulative[i] + mass;
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) {
        throw std::runtime_error("equal_mass_cut_positions: zero total mass");
    }

    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(n_intervals) - 1);
    std::size_t gap = 0;
    for (int k = 1; k < n_intervals; ++k) {
        const double want = total * static_cast<double>(k) / n_intervals;
        while (gap + 1 < gaps && cumulative[gap + 1] < want) {
            ++gap;
        }
        const double mass_here = cumulative[gap + 1] - cumulative[gap];
        const double frac = mass_here > 0.0 ? (want - cumulative[gap]) / mass_here : 0.0;
        cuts.push_back(curve.grid[gap] + frac * (curve.grid[gap + 1] - curve.grid[gap]));
    }
    return cuts;
}

std::vector<double> snap_cuts(const std::vector<double>& raw_cuts,
                              const std::vector<double>& targets) {
    const std::vector<double> values = distinct_sorted(targets);
    if (values.size() < raw_cuts.size() + 1) {
        throw std::runtime_error("snap_cuts: more intervals than distinct target values");
    }
    if (raw_cuts.empty()) {
        return {};
    }

    std::vector<double> midpoints(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        midpoints[i] = 0.5 * (values[i] + values[i + 1]);
    }

    std::vector<double> snapped;
    snapped.reserve(raw_cuts.size());
    for (double raw : raw_cuts) {
        auto it = std::lower_bound(midpoints.begin(), midpoints.end(), raw);
        std::size_t idx;
        if (it == midpoints.begin()) {
            idx = 0;
        } else if (it == midpoints.end()) {
            idx = midpoints.size() - 1;
        } else {
            const std::size_t above = static_cast<std::size_t>(it - midpoints.begin());
            idx = (raw - midpoints[above - 1] <= midpoints[above] - raw) ? above - 1 : above;
        }
        snapped.push_back(midpoints[idx]);
    }

    for (std::size_t i = 0; i + 1 < snapped.size(); ++i) {
        if (!(snapped[i] < snapped[i + 1])) {
            throw std::runtime_error("snap_cuts: empty interval after snapping");
        }
    }
    return snapped;
}

SegmentationList initial_segmentation(const std::vector<double>& targets, int n_intervals,
                                      const std::vector<double>& manual_ratios,
                                      const SegmentationOptions& options) {
    if (n_intervals < 1) {
        throw std::invalid_argument("initial_segmentation: n_intervals must be >= 1");
    }
    if (targets.empty()) {
        throw std::invalid_argument("initial_segmentation: empty targets");
    }
    const std::vector<double> distinct = distinct_sorted(targets);
    if (static_cast<std::size_t>(n_intervals) > distinct.size()) {
        throw std::runtime_error(
            "initial_segmentation: n_intervals exceeds distinct target values");
    }

    SegmentationList seg;
    seg.n_intervals = n_intervals;
    if (n_intervals == 1) {
        return seg;
    }

    std::vector<double> raw_cuts;
    if (manual_ratios.empty()) {
        const DensityCurve curve = kde_density(targets, options.bandwidth);
        std::vector<double> weights;
        if (options.strategy == AutoStrategy::kFluctuation) {
            weights = fluctuation_measure(curve);
        } else {
            weights.resize(curve.grid.size() - 1);
            for (std::size_t i = 0; i + 1 < curve.grid.size(); ++i) {
                weights[i] = 0.5 * (curve.density[i] + curve.density[i + 1]);
            }
        }
        raw_cuts = equal_mass_cut_positions(curve, weights, n_intervals);
    } else {
        if (manual_ratios.size() != static_cast<std::size_t>(n_intervals)) {
            throw std::invalid_argument(
                "initial_segmentation: manual_ratios length must equal n_intervals");
        }
        double sum = 0.0;
        for (double r : manual_ratios) {
            if (!(r > 0.0)) {
                throw std::invalid_argument("initial_segmentation: manual ratios must be positive");
            }
            sum += r;
        }
        const std::vector<double> sorted = sorted_copy(targets);
        double cumulative = 0.0;
        for (int k = 0; k + 1 < n_intervals; ++k) {
            cumulative += manual_ratios[static_cast<std::size_t>(k)] / sum;
            raw_cuts.push_back(quantile_linear(sorted, std::min(cumulative, 1.0)));
        }
    }

    seg.cuts = snap_cuts(raw_cuts, targets);
    seg.check_valid("initial_segmentation");

    // Every interval must hold at least one sample.
    std::vector<int> counts(static_cast<std::size_t>(n_intervals), 0);
    for (double t : targets) {
        ++counts[static_cast<std::size_t>(interval_of(t, seg))];
    }
    for (int c : counts) {
        if (c == 0) {
            throw std::runtime_error("initial_segmentation: empty interval after snapping");
        }
    }
    return seg;
}

int interval_of(double value, const SegmentationList& seg) {
    const auto it = std::upper_bound(seg.cuts.begin(), seg.cuts.end(), value);
    return static_cast<int>(it - seg.cuts.begin());
}

std::pair<double, double> interval_span(const SegmentationList& seg, int interval,
                                        double target_min, double target_max) {
    if (interval < 0 || interval >= seg.n_intervals) {
        throw std::invalid_argument("interval_span: interval out of range");
    }
    const double low = interval == 0 ? target_min : seg.cuts[static_cast<std::size_t>(interval - 1)];
    const double high = interval == seg.n_intervals - 1
                            ? target_max
                            : seg.cuts[static_cast<std::size_t>(interval)];
    return {low, high};
}

}  // namespace dca

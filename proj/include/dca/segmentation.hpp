#ifndef DCA_SEGMENTATION_HPP
#define DCA_SEGMENTATION_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace dca {

// ---------------------------------------------------------------------------
// Target-range segmentation: density estimation and cut-point placement
// ---------------------------------------------------------------------------

struct DensityCurve {
    std::vector<double> grid;     // ascending target values, 512 points
    std::vector<double> density;  // non-negative, integrates to ~1
    double bandwidth = 0.0;
};

struct SegmentationList {
    std::vector<double> cuts;  // strictly ascending, size n_intervals - 1
    int n_intervals = 1;

    // Throws std::runtime_error when the cut list is inconsistent.
    void check_valid(const char* context) const;
};

// How automatic cut placement weights the target axis.
enum class AutoStrategy {
    kFluctuation,  // weight by |d density / d target| (finer cuts where the curve moves)
    kDensity,      // weight by density itself (equal probability mass per interval)
};

struct SegmentationOptions {
    double bandwidth = 0.0;  // 0 = Silverman's rule
    AutoStrategy strategy = AutoStrategy::kFluctuation;
};

// Gaussian kernel density estimate on a uniform 512-point grid spanning
// [min - 3h, max + 3h]. Default bandwidth: Silverman's rule 1.06 * sigma * n^(-1/5)
// with the sample (n-1) standard deviation.
DensityCurve kde_density(const std::vector<double>& values, double bandwidth = 0.0);

// Per-grid-gap fluctuation g_i = |density_{i+1} - density_i| / (grid_{i+1} - grid_i)
// + 0.01 * max(density). The additive floor keeps flat regions divisible.
std::vector<double> fluctuation_measure(const DensityCurve& curve);

// Raw cut positions that split the weighted mass (gap_weights integrated over
// grid gaps) into n_intervals equal shares. Exposed for property checks.
std::vector<double> equal_mass_cut_positions(const DensityCurve& curve,
                                             const std::vector<double>& gap_weights,
                                             int n_intervals);

// Snaps each raw cut to the nearest midpoint between adjacent distinct sorted
// target values; errors if two cuts collide (an interval would be empty).
std::vector<double> snap_cuts(const std::vector<double>& raw_cuts,
                              const std::vector<double>& targets);

// Builds the initial cut list. Empty manual_ratios selects automatic placement
// driven by the density curve; otherwise ratios (normalized by their sum) set
// per-interval target-quantile shares.
SegmentationList initial_segmentation(const std::vector<double>& targets, int n_intervals,
                                      const std::vector<double>& manual_ratios = {},
                                      const SegmentationOptions& options = {});

// Interval index of a value: I_0 = (-inf, c_1), I_k = [c_k, c_{k+1}),
// I_{N-1} = [c_{N-1}, +inf). Total over all reals.
int interval_of(double value, const SegmentationList& seg);

// Raw [low, high] span of one interval, with outer intervals closed by the
// observed target extremes.
std::pair<double, double> interval_span(const SegmentationList& seg, int interval,
                                        double target_min, double target_max);

}  // namespace dca

#endif  // DCA_SEGMENTATION_HPP

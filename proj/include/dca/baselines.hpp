#ifndef DCA_BASELINES_HPP
#define DCA_BASELINES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dca/dataset.hpp"
#include "dca/interval_models.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Comparison pipelines and the synthetic-data generator
// ---------------------------------------------------------------------------

struct KMeansModel {
    std::vector<std::vector<double>> centroids;
    std::vector<double> inertia_trace;  // per Lloyd iteration

    int assign(const std::vector<double>& row) const;
};

// k-means++ seeding, Lloyd iterations until centroid shift < tol or max_rounds.
KMeansModel fit_kmeans(const std::vector<std::vector<double>>& rows, int k,
                       std::uint64_t seed, int max_rounds = 100, double tol = 1e-6);

struct GmmModel {
    std::vector<double> weights;                  // mixing proportions
    std::vector<std::vector<double>> means;       // per component
    std::vector<std::vector<double>> variances;   // diagonal, floored at 1e-9
    std::vector<double> loglik_trace;             // per EM iteration

    int assign(const std::vector<double>& row) const;  // maximum responsibility
};

// Diagonal-covariance Gaussian mixture fitted by expectation-maximization,
// initialized from k-means; stops when the log-likelihood gain < tol.
GmmModel fit_gmm(const std::vector<std::vector<double>>& rows, int k, std::uint64_t seed,
                 int max_iterations = 100, double tol = 1e-6);

// One model per cluster, routed by the cluster assignment at inference.
// Clusters too small for a regression fall back to the global fit.
struct BaselinePrediction {
    std::string method;                 // "dp", "kc", or "gc"
    int cluster_count = 1;
    std::vector<double> predictions;    // aligned with the test rows
    std::vector<double> fit_trace;      // inertia (kc) or log-likelihood (gc)
};

// Single least-squares fit on the full training set.
BaselinePrediction baseline_dp(const Dataset& train, const Dataset& test);

// k-means on training features; per-cluster least squares; test rows routed to
// the nearest centroid.
BaselinePrediction baseline_kmeans(const Dataset& train, const Dataset& test, int k,
                                   std::uint64_t seed);

// Gaussian-mixture clustering on training features; per-cluster least squares;
// hard assignment by maximum responsibility.
BaselinePrediction baseline_gmm(const Dataset& train, const Dataset& test, int k,
                                std::uint64_t seed);

struct SyntheticSpec {
    std::size_t n_samples = 1000;
    std::size_t n_features = 4;
    enum class TargetDistribution { kNormal, kUniform };
    TargetDistribution distribution = TargetDistribution::kNormal;
    double target_mean = 0.0;    // normal
    double target_stdev = 1.0;   // normal
    double target_low = 0.0;     // uniform
    double target_high = 1.0;    // uniform
    double correlation = 1.0;    // feature-target coupling strength in [0, 1]
    double noise = 0.0;          // additive feature noise scale
    std::uint64_t seed = 0;
};

// Features are affine images of the standardized target blended with Gaussian
// noise: x_ij = a_j * (corr * u_i + sqrt(1 - corr^2) * z_ij) + b_j + noise * e_ij.
// At correlation 1 and noise 0 the features determine the target exactly.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dca

#endif  // DCA_BASELINES_HPP

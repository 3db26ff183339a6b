#include "dca/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "dca/rng.hpp"

namespace dca {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// Per-cluster least squares with a whole-set fallback for starved clusters.
std::vector<RegressorModel> per_cluster_regressors(const Dataset& train,
                                                   const std::vector<int>& assignment,
                                                   int k) {
    const RegressorModel global = fit_regressor(train);
    std::vector<RegressorModel> models(static_cast<std::size_t>(k), global);
    for (int c = 0; c < k; ++c) {
        Dataset subset;
        subset.column_names = train.column_names;
        subset.role = train.role;
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (assignment[i] == c) {
                subset.rows.push_back(train.rows[i]);
                subset.targets.push_back(train.targets[i]);
                subset.row_ids.push_back(train.row_ids[i]);
            }
        }
        if (subset.size() >= 2) {
            models[static_cast<std::size_t>(c)] = fit_regressor(subset);
        }
    }
    return models;
}

void check_split_pair(const Dataset& train, const Dataset& test, const char* context) {
    train.check_consistent(context);
    test.check_consistent(context);
    if (train.feature_count() != test.feature_count()) {
        throw std::invalid_argument(std::string(context) +
                                    ": train/test feature widths differ");
    }
}

}  // namespace

int KMeansModel::assign(const std::vector<double>& row) const {
    int best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(row, centroids[c]);
        if (d < best_distance) {
            best_distance = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

KMeansModel fit_kmeans(const std::vector<std::vector<double>>& rows, int k,
                       std::uint64_t seed, int max_rounds, double tol) {
    if (rows.empty()) {
        throw std::invalid_argument("fit_kmeans: no rows");
    }
    if (k < 1) {
        throw std::invalid_argument("fit_kmeans: k must be >= 1");
    }
    const std::size_t n = rows.size();
    {
        std::set<std::vector<double>> distinct(rows.begin(), rows.end());
        if (static_cast<std::size_t>(k) > distinct.size()) {
            throw std::invalid_argument("fit_kmeans: k exceeds distinct rows");
        }
    }

    Rng rng(seed);
    KMeansModel model;
    model.centroids.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding: subsequent centers drawn proportional to the squared
    // distance from the nearest chosen center.
    model.centroids.push_back(rows[rng.uniform_index(n)]);
    std::vector<double> nearest(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& centroid : model.centroids) {
                best = std::min(best, squared_distance(rows[i], centroid));
            }
            nearest[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double r = rng.uniform_real() * total;
            for (std::size_t i = 0; i < n; ++i) {
                r -= nearest[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
                pick = i;
            }
        } else {
            while (nearest[pick] == 0.0 && pick + 1 < n) {
                ++pick;
            }
        }
        model.centroids.push_back(rows[pick]);
    }

    std::vector<int> assignment(n, 0);
    for (int round = 0; round < max_rounds; ++round) {
        // Assignment step and the objective under the current centers.
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = model.assign(rows[i]);
            inertia += squared_distance(rows[i], model.centroids[static_cast<std::size_t>(
                                                     assignment[i])]);
        }
        model.inertia_trace.push_back(inertia);

        // Update step.
        const std::size_t width = rows.front().size();
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(width, 0.0));
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (std::size_t d = 0; d < width; ++d) {
                sums[c][d] += rows[i][d];
            }
        }

        double max_shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            std::vector<double> updated;
            if (counts[c] == 0) {
                // Re-seed an empty cluster at the point farthest from its center.
                std::size_t farthest = 0;
                double worst = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = squared_distance(
                        rows[i],
                        model.centroids[static_cast<std::size_t>(assignment[i])]);
                    if (d > worst) {
                        worst = d;
                        farthest = i;
                    }
                }
                updated = rows[farthest];
            } else {
                updated = sums[c];
                for (double& v : updated) {
                    v /= static_cast<double>(counts[c]);
                }
            }
            max_shift = std::max(max_shift, squared_distance(updated, model.centroids[c]));
            model.centroids[c] = std::move(updated);
        }
        if (std::sqrt(max_shift) < tol) {
            break;
        }
    }
    return model;
}

int GmmModel::assign(const std::vector<double>& row) const {
    int best = 0;
    double best_log = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < means.size(); ++c) {
        double log_p = std::log(std::max(weights[c], 1e-300));
        for (std::size_t d = 0; d < row.size(); ++d) {
            const double v = variances[c][d];
            const double diff = row[d] - means[c][d];
            log_p += -0.5 * std::log(2.0 * std::numbers::pi * v) -
                     diff * diff / (2.0 * v);
        }
        if (log_p > best_log) {
            best_log = log_p;
            best = static_cast<int>(c);
        }
    }
    return best;
}

GmmModel fit_gmm(const std::vector<std::vector<double>>& rows, int k, std::uint64_t seed,
                 int max_iterations, double tol) {
    constexpr double kVarianceFloor = 1e-9;
    if (rows.empty()) {
        throw std::invalid_argument("fit_gmm: no rows");
    }
    if (k < 1) {
        throw std::invalid_argument("fit_gmm: k must be >= 1");
    }

    const std::size_t n = rows.size();
    const std::size_t width = rows.front().size();
    const KMeansModel init = fit_kmeans(rows, k, seed);

    GmmModel model;
    model.means = init.centroids;
    model.weights.assign(static_cast<std::size_t>(k), 0.0);
    model.variances.assign(static_cast<std::size_t>(k),
                           std::vector<double>(width, kVarianceFloor));
    {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        std::vector<int> assignment(n);
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = init.assign(rows[i]);
            ++counts[static_cast<std::size_t>(assignment[i])];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignment[i]);
            for (std::size_t d = 0; d < width; ++d) {
                const double diff = rows[i][d] - model.means[c][d];
                model.variances[c][d] += diff * diff / static_cast<double>(counts[c]);
            }
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            model.weights[c] =
                static_cast<double>(counts[c]) / static_cast<double>(n);
        }
    }

    std::vector<std::vector<double>> resp(n, std::vector<double>(static_cast<std::size_t>(k)));
    double previous = -std::numeric_limits<double>::infinity();
    for (int iteration = 0; iteration < max_iterations; ++iteration) {
        // E-step with log-sum-exp for stability.
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_log = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                double log_p = std::log(std::max(model.weights[c], 1e-300));
                for (std::size_t d = 0; d < width; ++d) {
                    const double v = model.variances[c][d];
                    const double diff = rows[i][d] - model.means[c][d];
                    log_p += -0.5 * std::log(2.0 * std::numbers::pi * v) -
                             diff * diff / (2.0 * v);
                }
                resp[i][c] = log_p;
                max_log = std::max(max_log, log_p);
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                sum += std::exp(resp[i][c] - max_log);
            }
            const double lse = max_log + std::log(sum);
            loglik += lse;
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                resp[i][c] = std::exp(resp[i][c] - lse);
            }
        }
        model.loglik_trace.push_back(loglik);

        // M-step.
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                mass += resp[i][c];
            }
            if (mass < 1e-12) {
                continue;  // starved component: keep previous parameters
            }
            std::vector<double> mean(width, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < width; ++d) {
                    mean[d] += resp[i][c] * rows[i][d];
                }
            }
            for (double& m : mean) {
                m /= mass;
            }
            std::vector<double> variance(width, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < width; ++d) {
                    const double diff = rows[i][d] - mean[d];
                    variance[d] += resp[i][c] * diff * diff;
                }
            }
            for (double& v : variance) {
                v = std::max(v / mass, kVarianceFloor);
            }
            model.weights[c] = mass / static_cast<double>(n);
            model.means[c] = std::move(mean);
            model.variances[c] = std::move(variance);
        }

        if (iteration > 0 && std::abs(loglik - previous) < tol) {
            break;
        }
        previous = loglik;
    }
    return model;
}

BaselinePrediction baseline_dp(const Dataset& train, const Dataset& test) {
    check_split_pair(train, test, "baseline_dp");
    const RegressorModel model = fit_regressor(train);

    BaselinePrediction result;
    result.method = "dp";
    result.cluster_count = 1;
    result.predictions.reserve(test.size());
    for (const auto& row : test.rows) {
        result.predictions.push_back(model.predict(row));
    }
    return result;
}

BaselinePrediction baseline_kmeans(const Dataset& train, const Dataset& test, int k,
                                   std::uint64_t seed) {
    check_split_pair(train, test, "baseline_kmeans");
    const KMeansModel clusters = fit_kmeans(train.rows, k, seed);
    std::vector<int> assignment(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        assignment[i] = clusters.assign(train.rows[i]);
    }
    const std::vector<RegressorModel> models = per_cluster_regressors(train, assignment, k);

    BaselinePrediction result;
    result.method = "kc";
    result.cluster_count = k;
    result.fit_trace = clusters.inertia_trace;
    result.predictions.reserve(test.size());
    for (const auto& row : test.rows) {
        result.predictions.push_back(
            models[static_cast<std::size_t>(clusters.assign(row))].predict(row));
    }
    return result;
}

BaselinePrediction baseline_gmm(const Dataset& train, const Dataset& test, int k,
                                std::uint64_t seed) {
    check_split_pair(train, test, "baseline_gmm");
    const GmmModel mixture = fit_gmm(train.rows, k, seed);
    std::vector<int> assignment(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        assignment[i] = mixture.assign(train.rows[i]);
    }
    const std::vector<RegressorModel> models = per_cluster_regressors(train, assignment, k);

    BaselinePrediction result;
    result.method = "gc";
    result.cluster_count = k;
    result.fit_trace = mixture.loglik_trace;
    result.predictions.reserve(test.size());
    for (const auto& row : test.rows) {
        result.predictions.push_back(
            models[static_cast<std::size_t>(mixture.assign(row))].predict(row));
    }
    return result;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_samples < 2) {
        throw std::invalid_argument("generate_synthetic: need at least 2 samples");
    }
    if (spec.n_features < 1) {
        throw std::invalid_argument("generate_synthetic: need at least 1 feature");
    }
    if (spec.correlation < 0.0 || spec.correlation > 1.0) {
        throw std::invalid_argument("generate_synthetic: correlation outside [0, 1]");
    }
    if (spec.noise < 0.0) {
        throw std::invalid_argument("generate_synthetic: negative noise");
    }
    const bool normal = spec.distribution == SyntheticSpec::TargetDistribution::kNormal;
    if (normal && !(spec.target_stdev > 0.0)) {
        throw std::invalid_argument("generate_synthetic: target_stdev must be positive");
    }
    if (!normal && !(spec.target_high > spec.target_low)) {
        throw std::invalid_argument("generate_synthetic: empty uniform target range");
    }

    Rng rng(spec.seed);
    Dataset ds;
    ds.role = Role::kRaw;
    for (std::size_t j = 0; j < spec.n_features; ++j) {
        ds.column_names.push_back("f" + std::to_string(j));
    }

    ds.targets.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        ds.targets.push_back(normal
                                 ? spec.target_mean + spec.target_stdev * rng.normal()
                                 : spec.target_low +
                                       (spec.target_high - spec.target_low) *
                                           rng.uniform_real());
    }

    // Standardize by the distribution's own moments so the feature scale does
    // not depend on the sample.
    const double center =
        normal ? spec.target_mean : 0.5 * (spec.target_low + spec.target_high);
    const double scale = normal
                             ? spec.target_stdev
                             : (spec.target_high - spec.target_low) / std::sqrt(12.0);
    const double mix = std::sqrt(1.0 - spec.correlation * spec.correlation);

    ds.rows.reserve(spec.n_samples);
    ds.row_ids.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const double u = (ds.targets[i] - center) / scale;
        std::vector<double> row(spec.n_features);
        for (std::size_t j = 0; j < spec.n_features; ++j) {
            const double z = rng.normal();
            const double e = rng.normal();
            const double a = 1.0 + 0.25 * static_cast<double>(j % 4);
            const double b = 0.1 * static_cast<double>(j);
            row[j] = a * (spec.correlation * u + mix * z) + b + spec.noise * e;
        }
        ds.rows.push_back(std::move(row));
        ds.row_ids.push_back(static_cast<std::int64_t>(i));
    }
    return ds;
}

}  // namespace dca

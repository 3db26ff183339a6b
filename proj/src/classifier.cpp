#include "dca/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dca/rng.hpp"

namespace dca {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

int argmax_lowest(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

// Training data in canonical row order. Fits become invariant to the caller's
// row ordering because every fit sees this ordering instead.
struct CanonicalData {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<double> weights;                // normalized to mean 1
    std::vector<std::vector<int>> base_order;   // per feature: row indices sorted by value
};

CanonicalData canonicalize(const std::vector<std::vector<double>>& features,
                           const std::vector<int>& labels,
                           const std::vector<double>& sample_weights) {
    const std::size_t n = features.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        if (features[a] != features[b]) {
            return features[a] < features[b];
        }
        if (labels[a] != labels[b]) {
            return labels[a] < labels[b];
        }
        return sample_weights[a] < sample_weights[b];
    });

    CanonicalData data;
    data.rows.reserve(n);
    data.labels.reserve(n);
    data.weights.reserve(n);
    double weight_sum = 0.0;
    for (std::size_t i : perm) {
        data.rows.push_back(features[i]);
        data.labels.push_back(labels[i]);
        data.weights.push_back(sample_weights[i]);
        weight_sum += sample_weights[i];
    }
    const double mean = weight_sum / static_cast<double>(n);
    for (double& w : data.weights) {
        w /= mean;
    }

    const std::size_t n_features = data.rows.front().size();
    data.base_order.resize(n_features);
    for (std::size_t f = 0; f < n_features; ++f) {
        auto& order = data.base_order[f];
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double va = data.rows[static_cast<std::size_t>(a)][f];
            const double vb = data.rows[static_cast<std::size_t>(b)][f];
            if (va != vb) {
                return va < vb;
            }
            return a < b;
        });
    }
    return data;
}

enum class SplitMode { kGini, kGradient };

struct BuildConfig {
    SplitMode mode = SplitMode::kGini;
    int max_depth = 12;
    int min_leaf = 5;
    int n_classes = 0;        // gini mode
    double l2 = 1.0;          // gradient mode
    int feature_sample = 0;   // candidate features per node; 0 = all
    Rng* rng = nullptr;       // consumed only when feature_sample > 0
};

constexpr double kMinGain = 1e-12;

// Depth-first tree construction over presorted per-feature index arrays.
// Each node stable-partitions every feature's index segment so children keep
// their segments sorted without re-sorting.
class TreeBuilder {
  public:
    TreeBuilder(const CanonicalData& data, const std::vector<int>& multiplicity,
                const std::vector<double>& stat_weight, BuildConfig cfg,
                const std::vector<double>* grad, const std::vector<double>* hess)
        : data_(data),
          multiplicity_(multiplicity),
          stat_weight_(stat_weight),
          cfg_(cfg),
          grad_(grad),
          hess_(hess) {
        const std::size_t n_features = data.base_order.size();
        order_.resize(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            order_[f].reserve(data.rows.size());
            for (int r : data.base_order[f]) {
                if (multiplicity_[static_cast<std::size_t>(r)] > 0) {
                    order_[f].push_back(r);
                }
            }
        }
        scratch_.resize(order_.empty() ? 0 : order_[0].size());
        side_.assign(data.rows.size(), 0);
        feature_pool_.resize(n_features);
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    }

    Tree build() {
        tree_.nodes.clear();
        if (!order_.empty() && !order_[0].empty()) {
            build_node(0, 0, order_[0].size());
        }
        return std::move(tree_);
    }

  private:
    double value(int row, int feature) const {
        return data_.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(feature)];
    }

    std::vector<int> candidate_features() {
        const int n_features = static_cast<int>(order_.size());
        if (cfg_.feature_sample <= 0 || cfg_.feature_sample >= n_features) {
            return feature_pool_;
        }
        // Partial Fisher-Yates draw of feature_sample distinct indices.
        std::vector<int> pool = feature_pool_;
        for (int i = 0; i < cfg_.feature_sample; ++i) {
            const std::size_t j =
                i + cfg_.rng->uniform_index(pool.size() - static_cast<std::size_t>(i));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(cfg_.feature_sample));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    void make_gini_leaf(TreeNode& node, std::size_t lo, std::size_t hi) {
        std::vector<double> dist(static_cast<std::size_t>(cfg_.n_classes), 0.0);
        double total = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const int r = order_[0][i];
            const double w = stat_weight_[static_cast<std::size_t>(r)];
            dist[static_cast<std::size_t>(data_.labels[static_cast<std::size_t>(r)])] += w;
            total += w;
        }
        for (double& d : dist) {
            d /= total;
        }
        node.values = std::move(dist);
    }

    void make_gradient_leaf(TreeNode& node, std::size_t lo, std::size_t hi) {
        double g = 0.0;
        double h = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const int r = order_[0][i];
            g += (*grad_)[static_cast<std::size_t>(r)];
            h += (*hess_)[static_cast<std::size_t>(r)];
        }
        node.values = {-g / (h + cfg_.l2)};
    }

    struct SplitChoice {
        int feature = -1;
        double threshold = 0.0;
        double gain = kMinGain;
    };

    SplitChoice best_gini_split(const std::vector<int>& features, std::size_t lo,
                                std::size_t hi, const std::vector<double>& class_weight,
                                double total_weight, long total_count) {
        SplitChoice best;
        const auto n_classes = static_cast<std::size_t>(cfg_.n_classes);
        double parent_sq = 0.0;
        for (double w : class_weight) {
            parent_sq += w * w;
        }
        const double parent_impurity = 1.0 - parent_sq / (total_weight * total_weight);

        std::vector<double> left(n_classes);
        for (int f : features) {
            std::fill(left.begin(), left.end(), 0.0);
            double left_weight = 0.0;
            long left_count = 0;
            const auto& order = order_[static_cast<std::size_t>(f)];
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                const int r = order[i];
                const double w = stat_weight_[static_cast<std::size_t>(r)];
                left[static_cast<std::size_t>(data_.labels[static_cast<std::size_t>(r)])] += w;
                left_weight += w;
                left_count += multiplicity_[static_cast<std::size_t>(r)];

                const double v = value(r, f);
                const double v_next = value(order[i + 1], f);
                if (!(v_next > v)) {
                    continue;
                }
                const long right_count = total_count - left_count;
                if (left_count < cfg_.min_leaf || right_count < cfg_.min_leaf) {
                    continue;
                }
                const double right_weight = total_weight - left_weight;
                double left_sq = 0.0;
                double right_sq = 0.0;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    left_sq += left[c] * left[c];
                    const double rw = class_weight[c] - left[c];
                    right_sq += rw * rw;
                }
                const double left_impurity = 1.0 - left_sq / (left_weight * left_weight);
                const double right_impurity = 1.0 - right_sq / (right_weight * right_weight);
                const double gain = parent_impurity -
                                    (left_weight / total_weight) * left_impurity -
                                    (right_weight / total_weight) * right_impurity;
                if (gain > best.gain) {
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    SplitChoice best_gradient_split(const std::vector<int>& features, std::size_t lo,
                                    std::size_t hi, double total_g, double total_h,
                                    long total_count) {
        SplitChoice best;
        const double parent_term = total_g * total_g / (total_h + cfg_.l2);
        for (int f : features) {
            double left_g = 0.0;
            double left_h = 0.0;
            long left_count = 0;
            const auto& order = order_[static_cast<std::size_t>(f)];
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                const int r = order[i];
                left_g += (*grad_)[static_cast<std::size_t>(r)];
                left_h += (*hess_)[static_cast<std::size_t>(r)];
                left_count += multiplicity_[static_cast<std::size_t>(r)];

                const double v = value(r, f);
                const double v_next = value(order[i + 1], f);
                if (!(v_next > v)) {
                    continue;
                }
                const long right_count = total_count - left_count;
                if (left_count < cfg_.min_leaf || right_count < cfg_.min_leaf) {
                    continue;
                }
                const double right_g = total_g - left_g;
                const double right_h = total_h - left_h;
                const double gain = 0.5 * (left_g * left_g / (left_h + cfg_.l2) +
                                           right_g * right_g / (right_h + cfg_.l2) -
                                           parent_term);
                if (gain > best.gain) {
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    int build_node(int depth, std::size_t lo, std::size_t hi) {
        // Node statistics from the first feature's segment (same row set for all).
        long total_count = 0;
        double total_weight = 0.0;
        double total_g = 0.0;
        double total_h = 0.0;
        std::vector<double> class_weight;
        bool pure = true;
        if (cfg_.mode == SplitMode::kGini) {
            class_weight.assign(static_cast<std::size_t>(cfg_.n_classes), 0.0);
            const int first_label =
                data_.labels[static_cast<std::size_t>(order_[0][lo])];
            for (std::size_t i = lo; i < hi; ++i) {
                const int r = order_[0][i];
                const double w = stat_weight_[static_cast<std::size_t>(r)];
                class_weight[static_cast<std::size_t>(
                    data_.labels[static_cast<std::size_t>(r)])] += w;
                total_weight += w;
                total_count += multiplicity_[static_cast<std::size_t>(r)];
                pure = pure && data_.labels[static_cast<std::size_t>(r)] == first_label;
            }
        } else {
            pure = false;
            for (std::size_t i = lo; i < hi; ++i) {
                const int r = order_[0][i];
                total_g += (*grad_)[static_cast<std::size_t>(r)];
                total_h += (*hess_)[static_cast<std::size_t>(r)];
                total_count += multiplicity_[static_cast<std::size_t>(r)];
            }
        }

        TreeNode node;
        SplitChoice split;
        const bool can_split =
            depth < cfg_.max_depth && total_count >= 2L * cfg_.min_leaf && !pure;
        if (can_split) {
            const std::vector<int> features = candidate_features();
            split = cfg_.mode == SplitMode::kGini
                        ? best_gini_split(features, lo, hi, class_weight, total_weight,
                                          total_count)
                        : best_gradient_split(features, lo, hi, total_g, total_h,
                                              total_count);
        }

        const int index = static_cast<int>(tree_.nodes.size());
        if (split.feature < 0) {
            if (cfg_.mode == SplitMode::kGini) {
                make_gini_leaf(node, lo, hi);
            } else {
                make_gradient_leaf(node, lo, hi);
            }
            tree_.nodes.push_back(std::move(node));
            return index;
        }

        node.feature = split.feature;
        node.threshold = split.threshold;
        tree_.nodes.push_back(std::move(node));

        // Stable partition of every feature's segment around the chosen split.
        std::size_t left_rows = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const int r = order_[0][i];
            const bool goes_left = value(r, split.feature) < split.threshold;
            side_[static_cast<std::size_t>(r)] = goes_left ? 1 : 0;
            left_rows += goes_left ? 1 : 0;
        }
        for (auto& order : order_) {
            std::copy(order.begin() + static_cast<std::ptrdiff_t>(lo),
                      order.begin() + static_cast<std::ptrdiff_t>(hi), scratch_.begin());
            std::size_t write_left = lo;
            std::size_t write_right = lo + left_rows;
            for (std::size_t i = 0; i < hi - lo; ++i) {
                const int r = scratch_[i];
                if (side_[static_cast<std::size_t>(r)]) {
                    order[write_left++] = r;
                } else {
                    order[write_right++] = r;
                }
            }
        }

        const int left_child = build_node(depth + 1, lo, lo + left_rows);
        const int right_child = build_node(depth + 1, lo + left_rows, hi);
        tree_.nodes[static_cast<std::size_t>(index)].left = left_child;
        tree_.nodes[static_cast<std::size_t>(index)].right = right_child;
        return index;
    }

    const CanonicalData& data_;
    const std::vector<int>& multiplicity_;
    const std::vector<double>& stat_weight_;
    BuildConfig cfg_;
    const std::vector<double>* grad_;
    const std::vector<double>* hess_;

    std::vector<std::vector<int>> order_;
    std::vector<int> scratch_;
    std::vector<char> side_;
    std::vector<int> feature_pool_;
    Tree tree_;
};

ClassifierModel fit_decision_tree(const CanonicalData& data, int n_classes,
                                  std::uint64_t seed, const DecisionTreeParams& params) {
    const std::size_t n = data.rows.size();
    std::vector<int> multiplicity(n, 1);

    BuildConfig cfg;
    cfg.mode = SplitMode::kGini;
    cfg.max_depth = params.max_depth;
    cfg.min_leaf = params.min_leaf;
    cfg.n_classes = n_classes;

    ClassifierModel model;
    model.kind = ClassifierKind::kDecisionTree;
    model.n_classes = n_classes;
    model.seed = seed;
    model.trees.push_back(
        TreeBuilder(data, multiplicity, data.weights, cfg, nullptr, nullptr).build());
    return model;
}

ClassifierModel fit_random_forest(const CanonicalData& data, int n_classes,
                                  std::uint64_t seed, const RandomForestParams& params) {
    const std::size_t n = data.rows.size();
    const auto n_features = static_cast<int>(data.base_order.size());
    const int sample =
        params.sample_features
            ? std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features)))))
            : 0;

    ClassifierModel model;
    model.kind = ClassifierKind::kRandomForest;
    model.n_classes = n_classes;
    model.seed = seed;
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));

    std::vector<int> multiplicity(n);
    std::vector<double> stat_weight(n);
    for (int t = 0; t < params.n_trees; ++t) {
        Rng tree_rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        if (params.bootstrap) {
            std::fill(multiplicity.begin(), multiplicity.end(), 0);
            for (std::size_t draw = 0; draw < n; ++draw) {
                ++multiplicity[tree_rng.uniform_index(n)];
            }
        } else {
            std::fill(multiplicity.begin(), multiplicity.end(), 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            stat_weight[i] = data.weights[i] * multiplicity[i];
        }

        BuildConfig cfg;
        cfg.mode = SplitMode::kGini;
        cfg.max_depth = params.max_depth;
        cfg.min_leaf = params.min_leaf;
        cfg.n_classes = n_classes;
        cfg.feature_sample = sample;
        cfg.rng = &tree_rng;
        model.trees.push_back(
            TreeBuilder(data, multiplicity, stat_weight, cfg, nullptr, nullptr).build());
    }
    return model;
}

ClassifierModel fit_gradient_boosted(const CanonicalData& data, int n_classes,
                                     std::uint64_t seed,
                                     const GradientBoostingParams& params) {
    const std::size_t n = data.rows.size();
    const auto n_classes_sz = static_cast<std::size_t>(n_classes);

    ClassifierModel model;
    model.kind = ClassifierKind::kGradientBoostedTrees;
    model.n_classes = n_classes;
    model.seed = seed;
    model.learning_rate = params.learning_rate;

    // Prior log-odds initialization per one-vs-rest chain.
    std::vector<double> prior(n_classes_sz, 0.0);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        prior[static_cast<std::size_t>(data.labels[i])] += data.weights[i];
        weight_sum += data.weights[i];
    }
    model.base_scores.resize(n_classes_sz);
    for (std::size_t c = 0; c < n_classes_sz; ++c) {
        const double p = std::clamp(prior[c] / weight_sum, 1e-12, 1.0 - 1e-12);
        model.base_scores[c] = std::log(p / (1.0 - p));
    }

    std::vector<std::vector<double>> margins(n_classes_sz, std::vector<double>(n));
    for (std::size_t c = 0; c < n_classes_sz; ++c) {
        std::fill(margins[c].begin(), margins[c].end(), model.base_scores[c]);
    }

    std::vector<int> multiplicity(n, 1);
    std::vector<double> grad(n);
    std::vector<double> hess(n);

    BuildConfig cfg;
    cfg.mode = SplitMode::kGradient;
    cfg.max_depth = params.max_depth;
    cfg.min_leaf = params.min_leaf;
    cfg.l2 = params.l2;

    model.trees.reserve(static_cast<std::size_t>(params.n_rounds) * n_classes_sz);
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t c = 0; c < n_classes_sz; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(margins[c][i]);
                const double y = data.labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
                grad[i] = data.weights[i] * (p - y);
                hess[i] = data.weights[i] * std::max(p * (1.0 - p), 1e-12);
            }
            Tree tree =
                TreeBuilder(data, multiplicity, data.weights, cfg, &grad, &hess).build();
            for (std::size_t i = 0; i < n; ++i) {
                margins[c][i] += params.learning_rate * tree.leaf_for(data.rows[i]).values[0];
            }
            model.trees.push_back(std::move(tree));
        }

        // Weighted mean one-vs-rest logistic loss after this round.
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sample_loss = 0.0;
            for (std::size_t c = 0; c < n_classes_sz; ++c) {
                const double p = std::clamp(sigmoid(margins[c][i]), 1e-12, 1.0 - 1e-12);
                const double y = data.labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
                sample_loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
            }
            loss += data.weights[i] * sample_loss;
        }
        model.training_loss_trace.push_back(loss / weight_sum);
    }
    return model;
}

}  // namespace

std::string classifier_kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::kDecisionTree: return "decision_tree";
        case ClassifierKind::kRandomForest: return "random_forest";
        case ClassifierKind::kGradientBoostedTrees: return "gradient_boosted_trees";
    }
    return "unknown";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
    if (name == "decision_tree") {
        return ClassifierKind::kDecisionTree;
    }
    if (name == "random_forest") {
        return ClassifierKind::kRandomForest;
    }
    if (name == "gradient_boosted_trees") {
        return ClassifierKind::kGradientBoostedTrees;
    }
    throw std::invalid_argument("classifier_kind_from_name: unknown kind '" + name + "'");
}

const std::vector<ClassifierKind>& all_classifier_kinds() {
    static const std::vector<ClassifierKind> kinds = {
        ClassifierKind::kDecisionTree,
        ClassifierKind::kRandomForest,
        ClassifierKind::kGradientBoostedTrees,
    };
    return kinds;
}

const TreeNode& Tree::leaf_for(const std::vector<double>& row) const {
    if (nodes.empty()) {
        throw std::runtime_error("Tree::leaf_for: empty tree");
    }
    int index = 0;
    while (!nodes[static_cast<std::size_t>(index)].is_leaf()) {
        const TreeNode& node = nodes[static_cast<std::size_t>(index)];
        index = row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                             : node.right;
    }
    return nodes[static_cast<std::size_t>(index)];
}

int ClassifierModel::predict(const std::vector<double>& row) const {
    switch (kind) {
        case ClassifierKind::kDecisionTree:
            return argmax_lowest(trees.front().leaf_for(row).values);
        case ClassifierKind::kRandomForest: {
            std::vector<double> votes(static_cast<std::size_t>(n_classes), 0.0);
            for (const Tree& tree : trees) {
                const std::vector<double>& dist = tree.leaf_for(row).values;
                for (std::size_t c = 0; c < votes.size(); ++c) {
                    votes[c] += dist[c];
                }
            }
            return argmax_lowest(votes);
        }
        case ClassifierKind::kGradientBoostedTrees: {
            std::vector<double> margin = base_scores;
            const auto n_classes_sz = static_cast<std::size_t>(n_classes);
            for (std::size_t t = 0; t < trees.size(); ++t) {
                margin[t % n_classes_sz] += learning_rate * trees[t].leaf_for(row).values[0];
            }
            return argmax_lowest(margin);
        }
    }
    throw std::runtime_error("ClassifierModel::predict: unknown kind");
}

std::vector<int> ClassifierModel::predict_all(
    const std::vector<std::vector<double>>& rows) const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(predict(row));
    }
    return out;
}

std::vector<int> pseudo_labels(const std::vector<double>& targets,
                               const SegmentationList& seg) {
    seg.check_valid("pseudo_labels");
    std::vector<int> labels;
    labels.reserve(targets.size());
    for (double t : targets) {
        labels.push_back(interval_of(t, seg));
    }
    return labels;
}

ClassifierModel fit_classifier(ClassifierKind kind,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<int>& labels,
                               const std::vector<double>& sample_weights, int n_classes,
                               std::uint64_t seed, const ClassifierParams& params) {
    if (features.empty() || features.size() != labels.size() ||
        features.size() != sample_weights.size()) {
        throw std::invalid_argument("fit_classifier: feature/label/weight sizes disagree");
    }
    if (n_classes < 1) {
        throw std::invalid_argument("fit_classifier: n_classes must be >= 1");
    }
    for (double w : sample_weights) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("fit_classifier: sample weights must be positive");
        }
    }
    for (int label : labels) {
        if (label < 0 || label >= n_classes) {
            throw std::invalid_argument("fit_classifier: label outside [0, n_classes)");
        }
    }

    const CanonicalData data = canonicalize(features, labels, sample_weights);
    switch (kind) {
        case ClassifierKind::kDecisionTree:
            return fit_decision_tree(data, n_classes, seed, params.tree);
        case ClassifierKind::kRandomForest:
            return fit_random_forest(data, n_classes, seed, params.forest);
        case ClassifierKind::kGradientBoostedTrees:
            return fit_gradient_boosted(data, n_classes, seed, params.boosted);
    }
    throw std::invalid_argument("fit_classifier: unknown kind");
}

std::vector<ClassifierModel> train_candidates(
    const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
    const std::vector<double>& sample_weights, std::uint64_t seed,
    const std::vector<ClassifierKind>& kinds, const ClassifierParams& params) {
    if (labels.empty()) {
        throw std::invalid_argument("train_candidates: empty training data");
    }
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
    for (int label : labels) {
        if (label < 0) {
            throw std::invalid_argument("train_candidates: negative label");
        }
        seen[static_cast<std::size_t>(label)] = true;
    }
    for (std::size_t c = 0; c < seen.size(); ++c) {
        if (!seen[c]) {
            throw std::runtime_error("train_candidates: class " + std::to_string(c) +
                                     " absent from labels");
        }
    }
    if (labels.size() < static_cast<std::size_t>(n_classes)) {
        throw std::invalid_argument("train_candidates: fewer samples than classes");
    }

    // One independent stream per kind: results do not depend on launch order,
    // and adding a candidate never changes the others.
    std::vector<std::future<ClassifierModel>> futures;
    futures.reserve(kinds.size());
    for (ClassifierKind kind : kinds) {
        const std::uint64_t kind_seed =
            mix_seed(seed, 1000 + static_cast<std::uint64_t>(kind));
        futures.push_back(std::async(std::launch::async, [&, kind, kind_seed] {
            return fit_classifier(kind, features, labels, sample_weights, n_classes,
                                  kind_seed, params);
        }));
    }
    std::vector<ClassifierModel> models;
    models.reserve(kinds.size());
    for (auto& future : futures) {
        models.push_back(future.get());
    }
    return models;
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * n_classes + predicted];
}

std::int64_t& ConfusionMatrix::at(int truth, int predicted) {
    return counts[static_cast<std::size_t>(truth) * n_classes + predicted];
}

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t sum = 0;
    for (int c = 0; c < n_classes; ++c) {
        sum += at(c, c);
    }
    return sum;
}

ConfusionMatrix confusion_from_predictions(const std::vector<int>& truths,
                                           const std::vector<int>& predictions,
                                           int n_classes) {
    if (truths.size() != predictions.size()) {
        throw std::invalid_argument("confusion_from_predictions: size mismatch");
    }
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] < 0 || truths[i] >= n_classes || predictions[i] < 0 ||
            predictions[i] >= n_classes) {
            throw std::invalid_argument("confusion_from_predictions: label out of range");
        }
        ++cm.at(truths[i], predictions[i]);
    }
    return cm;
}

ConfusionMatrix confusion(const ClassifierModel& model,
                          const std::vector<std::vector<double>>& features,
                          const std::vector<int>& labels) {
    return confusion_from_predictions(labels, model.predict_all(features),
                                      model.n_classes);
}

double classification_loss(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) {
        throw std::invalid_argument("classification_loss: empty confusion matrix");
    }
    return static_cast<double>(total - cm.trace()) / static_cast<double>(total);
}

}  // namespace dca

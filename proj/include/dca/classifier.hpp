#ifndef DCA_CLASSIFIER_HPP
#define DCA_CLASSIFIER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dca/segmentation.hpp"

namespace dca {

// ---------------------------------------------------------------------------
// Interval classifiers trained on pseudo-labels
// ---------------------------------------------------------------------------

enum class ClassifierKind {
    kDecisionTree,
    kRandomForest,
    kGradientBoostedTrees,
};

std::string classifier_kind_name(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(const std::string& name);

// Fixed candidate order; also the tie-break order when scores match.
const std::vector<ClassifierKind>& all_classifier_kinds();

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    // Leaf payload: class distribution (classification) or {value} (regression).
    std::vector<double> values;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(const std::vector<double>& row) const;
};

struct DecisionTreeParams {
    int max_depth = 12;
    int min_leaf = 5;
};

struct RandomForestParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf = 5;
    bool bootstrap = true;
    bool sample_features = true;  // sqrt(feature count) candidates per node
};

struct GradientBoostingParams {
    int n_rounds = 100;
    int max_depth = 6;
    int min_leaf = 5;
    double learning_rate = 0.1;
    double l2 = 1.0;  // leaf-weight regularization
};

struct ClassifierParams {
    DecisionTreeParams tree;
    RandomForestParams forest;
    GradientBoostingParams boosted;
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::kDecisionTree;
    int n_classes = 0;
    std::uint64_t seed = 0;

    // Decision tree: 1 classification tree. Random forest: n_trees
    // classification trees. Boosted: n_rounds * n_classes regression trees in
    // round-major order, one one-vs-rest chain per class.
    std::vector<Tree> trees;
    std::vector<double> base_scores;          // boosted only: prior log-odds per class
    double learning_rate = 0.1;               // boosted only
    std::vector<double> training_loss_trace;  // boosted only: per-round train logloss

    int predict(const std::vector<double>& row) const;
    std::vector<int> predict_all(const std::vector<std::vector<double>>& rows) const;
};

// Interval index of each target under the segmentation; the classification
// targets for candidate training.
std::vector<int> pseudo_labels(const std::vector<double>& targets,
                               const SegmentationList& seg);

// Fits one model. Training is invariant to row permutation (rows are put in a
// canonical order first) and to uniform weight scaling (weights are normalized
// to mean 1).
ClassifierModel fit_classifier(ClassifierKind kind,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<int>& labels,
                               const std::vector<double>& sample_weights, int n_classes,
                               std::uint64_t seed, const ClassifierParams& params = {});

// Fits every requested kind, each from an independent seed stream derived from
// (seed, kind), so adding or removing a candidate never perturbs the others.
std::vector<ClassifierModel> train_candidates(
    const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
    const std::vector<double>& sample_weights, std::uint64_t seed,
    const std::vector<ClassifierKind>& kinds = all_classifier_kinds(),
    const ClassifierParams& params = {});

struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<std::int64_t> counts;  // row-major, rows = true, columns = predicted

    std::int64_t at(int truth, int predicted) const;
    std::int64_t& at(int truth, int predicted);
    std::int64_t total() const;
    std::int64_t trace() const;
};

ConfusionMatrix confusion_from_predictions(const std::vector<int>& truths,
                                           const std::vector<int>& predictions,
                                           int n_classes);

ConfusionMatrix confusion(const ClassifierModel& model,
                          const std::vector<std::vector<double>>& features,
                          const std::vector<int>& labels);

// Off-diagonal fraction: (total - trace) / total.
double classification_loss(const ConfusionMatrix& cm);

}  // namespace dca

#endif  // DCA_CLASSIFIER_HPP

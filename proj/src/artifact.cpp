#include "dca/artifact.hpp"

#include <fstream>
#include <stdexcept>

namespace dca {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json tree_to_json(const Tree& tree) {
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& node : tree.nodes) {
        nodes.push_back({
            {"feature", node.feature},
            {"threshold", node.threshold},
            {"left", node.left},
            {"right", node.right},
            {"values", node.values},
        });
    }
    return nodes;
}

Tree tree_from_json(const ordered_json& doc) {
    Tree tree;
    for (const ordered_json& entry : doc) {
        TreeNode node;
        node.feature = entry.at("feature").get<int>();
        node.threshold = entry.at("threshold").get<double>();
        node.left = entry.at("left").get<int>();
        node.right = entry.at("right").get<int>();
        node.values = entry.at("values").get<std::vector<double>>();
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

ordered_json classifier_to_json(const ClassifierModel& model) {
    ordered_json trees = ordered_json::array();
    for (const Tree& tree : model.trees) {
        trees.push_back(tree_to_json(tree));
    }
    return {
        {"kind", classifier_kind_name(model.kind)},
        {"n_classes", model.n_classes},
        {"seed", model.seed},
        {"learning_rate", model.learning_rate},
        {"base_scores", model.base_scores},
        {"training_loss_trace", model.training_loss_trace},
        {"trees", std::move(trees)},
    };
}

ClassifierModel classifier_from_json(const ordered_json& doc) {
    ClassifierModel model;
    model.kind = classifier_kind_from_name(doc.at("kind").get<std::string>());
    model.n_classes = doc.at("n_classes").get<int>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.learning_rate = doc.at("learning_rate").get<double>();
    model.base_scores = doc.at("base_scores").get<std::vector<double>>();
    model.training_loss_trace =
        doc.at("training_loss_trace").get<std::vector<double>>();
    for (const ordered_json& tree : doc.at("trees")) {
        model.trees.push_back(tree_from_json(tree));
    }
    return model;
}

ordered_json normalization_to_json(const NormalizationParams& params) {
    return {
        {"feature_min", params.feature_min},
        {"feature_max", params.feature_max},
        {"feature_constant", params.feature_constant},
        {"target_min", params.target_min},
        {"target_max", params.target_max},
        {"target_constant", params.target_constant},
    };
}

NormalizationParams normalization_from_json(const ordered_json& doc) {
    NormalizationParams params;
    params.feature_min = doc.at("feature_min").get<std::vector<double>>();
    params.feature_max = doc.at("feature_max").get<std::vector<double>>();
    params.feature_constant = doc.at("feature_constant").get<std::vector<bool>>();
    params.target_min = doc.at("target_min").get<double>();
    params.target_max = doc.at("target_max").get<double>();
    params.target_constant = doc.at("target_constant").get<bool>();
    return params;
}

}  // namespace

ordered_json artifact_to_json(const ModelArtifact& artifact) {
    const IntervalEnsemble& ensemble = artifact.ensemble;

    ordered_json regressors = ordered_json::array();
    for (const RegressorModel& model : ensemble.regressors) {
        regressors.push_back({
            {"kind", regressor_kind_name(model.kind)},
            {"coefficients", model.coefficients},
            {"intercept", model.intercept},
        });
    }

    ordered_json trace = ordered_json::array();
    for (const KindTrace& kind_trace : artifact.trace) {
        trace.push_back({
            {"kind", classifier_kind_name(kind_trace.kind)},
            {"losses", kind_trace.losses},
            {"best_loss", kind_trace.best_loss},
            {"best_iteration", kind_trace.best_iteration},
            {"score", kind_trace.score},
        });
    }

    return {
        {"format_version", kArtifactFormatVersion},
        {"column_names", ensemble.column_names},
        {"classifier", classifier_to_json(ensemble.classifier)},
        {"segmentation",
         {{"cuts", ensemble.segmentation.cuts},
          {"n_intervals", ensemble.segmentation.n_intervals}}},
        {"regressors", std::move(regressors)},
        {"normalization", normalization_to_json(ensemble.normalization)},
        {"exclusion",
         {{"factors", ensemble.exclusion.factors},
          {"drop_first", ensemble.exclusion.drop_first},
          {"drop_last", ensemble.exclusion.drop_last}}},
        {"train_target_min", ensemble.train_target_min},
        {"train_target_max", ensemble.train_target_max},
        {"neighbor_divisor", ensemble.neighbor_divisor},
        {"loss_trace", std::move(trace)},
        {"dc_error", artifact.dc_error},
        {"warnings", {{"stalled", artifact.stalled}, {"unstable", artifact.unstable}}},
        {"config_snapshot", artifact.config_snapshot},
    };
}

ModelArtifact artifact_from_json(const nlohmann::ordered_json& doc) {
    const int version = doc.at("format_version").get<int>();
    if (version != kArtifactFormatVersion) {
        throw std::runtime_error("artifact_from_json: format version " +
                                 std::to_string(version) + " not supported (expected " +
                                 std::to_string(kArtifactFormatVersion) + ")");
    }

    ModelArtifact artifact;
    IntervalEnsemble& ensemble = artifact.ensemble;
    ensemble.column_names = doc.at("column_names").get<std::vector<std::string>>();
    ensemble.classifier = classifier_from_json(doc.at("classifier"));
    ensemble.segmentation.cuts =
        doc.at("segmentation").at("cuts").get<std::vector<double>>();
    ensemble.segmentation.n_intervals =
        doc.at("segmentation").at("n_intervals").get<int>();
    for (const ordered_json& entry : doc.at("regressors")) {
        RegressorModel model;
        model.kind = regressor_kind_from_name(entry.at("kind").get<std::string>());
        model.coefficients = entry.at("coefficients").get<std::vector<double>>();
        model.intercept = entry.at("intercept").get<double>();
        ensemble.regressors.push_back(std::move(model));
    }
    ensemble.normalization = normalization_from_json(doc.at("normalization"));
    ensemble.exclusion.factors =
        doc.at("exclusion").at("factors").get<std::vector<double>>();
    ensemble.exclusion.drop_first = doc.at("exclusion").at("drop_first").get<bool>();
    ensemble.exclusion.drop_last = doc.at("exclusion").at("drop_last").get<bool>();
    ensemble.train_target_min = doc.at("train_target_min").get<double>();
    ensemble.train_target_max = doc.at("train_target_max").get<double>();
    ensemble.neighbor_divisor = doc.at("neighbor_divisor").get<int>();

    for (const ordered_json& entry : doc.at("loss_trace")) {
        KindTrace kind_trace;
        kind_trace.kind = classifier_kind_from_name(entry.at("kind").get<std::string>());
        kind_trace.losses = entry.at("losses").get<std::vector<double>>();
        kind_trace.best_loss = entry.at("best_loss").get<double>();
        kind_trace.best_iteration = entry.at("best_iteration").get<int>();
        kind_trace.score = entry.at("score").get<double>();
        artifact.trace.push_back(std::move(kind_trace));
    }
    artifact.dc_error = doc.at("dc_error").get<double>();
    artifact.stalled = doc.at("warnings").at("stalled").get<bool>();
    artifact.unstable = doc.at("warnings").at("unstable").get<bool>();
    artifact.config_snapshot = doc.at("config_snapshot");
    return artifact;
}

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("save_artifact: cannot write '" + path + "'");
    }
    file << artifact_to_json(artifact).dump(2) << '\n';
    if (!file) {
        throw std::runtime_error("save_artifact: write failed for '" + path + "'");
    }
}

ModelArtifact load_artifact(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("load_artifact: cannot open '" + path + "'");
    }
    ordered_json doc;
    try {
        doc = ordered_json::parse(file);
    } catch (const ordered_json::parse_error& error) {
        throw std::runtime_error("load_artifact: '" + path + "' is not valid JSON: " +
                                 error.what());
    }
    return artifact_from_json(doc);
}

}  // namespace dca

#include "dca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "dca/classifier.hpp"
#include "dca/rng.hpp"
#include "dca/segmentation.hpp"

namespace dca {
namespace {

using nlohmann::ordered_json;

// Seed-stream tags so the split, the train_t/train_p split, and the loop all
// draw from independent deterministic streams.
constexpr std::uint64_t kSplitTag = 101;
constexpr std::uint64_t kTrainSplitTag = 102;
constexpr std::uint64_t kLoopTag = 103;

std::string format_double(double value) {
    char buffer[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
        if (std::stod(buffer) == value) break;
    }
    return buffer;
}

template <typename F>
auto stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

// Ingestion failures are input problems, not internal ones.
template <typename F>
auto stage_as_config(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    }
}

// --- strict JSON field access -----------------------------------------------

[[noreturn]] void fail_field(const std::string& key, const std::string& want) {
    throw ConfigError("parse_run_config: field '" + key + "' must be " + want);
}

double get_number(const ordered_json& doc, const std::string& key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) fail_field(key, "a number");
    return v.get<double>();
}

int get_int(const ordered_json& doc, const std::string& key, int fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number_integer()) fail_field(key, "an integer");
    return v.get<int>();
}

bool get_bool(const ordered_json& doc, const std::string& key, bool fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_boolean()) fail_field(key, "a boolean");
    return v.get<bool>();
}

std::string get_string(const ordered_json& doc, const std::string& key,
                       const std::string& fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_string()) fail_field(key, "a string");
    return v.get<std::string>();
}

std::vector<double> get_number_list(const ordered_json& doc, const std::string& key,
                                    std::vector<double> fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_array()) fail_field(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& item : v) {
        if (!item.is_number()) fail_field(key, "an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

std::vector<std::string> get_string_list(const ordered_json& doc, const std::string& key,
                                         std::vector<std::string> fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_array()) fail_field(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) fail_field(key, "an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

void reject_unknown_keys(const ordered_json& doc, const std::set<std::string>& known,
                         const std::string& context) {
    for (const auto& item : doc.items()) {
        if (known.count(item.key()) == 0) {
            throw ConfigError("parse_run_config: unknown key '" + item.key() + "' in " +
                              context);
        }
    }
}

ClassifierKind kind_from_name(const std::string& name) {
    for (ClassifierKind kind : all_classifier_kinds()) {
        if (name == classifier_kind_name(kind)) return kind;
    }
    throw ConfigError("parse_run_config: unknown classifier kind '" + name + "'");
}

// --- CSV primitives ----------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim_copy(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Generic numeric table: headers plus rows.  Rows containing an empty cell are
// dropped and counted; any other non-numeric cell is an error.
struct CsvTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> rows;
    std::vector<std::int64_t> row_ids;  // position in the file, zero-based
    std::size_t dropped_rows = 0;
};

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv_table: cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_csv_table: '" + path + "' is empty");
    }
    for (const auto& cell : split_csv_line(line)) table.headers.push_back(trim_copy(cell));
    std::int64_t row_id = 0;
    while (std::getline(in, line)) {
        if (trim_copy(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != table.headers.size()) {
            throw std::runtime_error("read_csv_table: row " + std::to_string(row_id) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, expected " +
                                     std::to_string(table.headers.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        bool missing = false;
        for (const auto& raw : cells) {
            std::string cell = trim_copy(raw);
            if (cell.empty()) {
                missing = true;
                break;
            }
            try {
                std::size_t used = 0;
                double value = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(value);
            } catch (const std::exception&) {
                throw std::runtime_error("read_csv_table: cell '" + cell +
                                         "' is not numeric");
            }
        }
        if (missing) {
            ++table.dropped_rows;
        } else {
            table.rows.push_back(std::move(row));
            table.row_ids.push_back(row_id);
        }
        ++row_id;
    }
    return table;
}

std::size_t header_index(const CsvTable& table, const std::string& name,
                         const std::string& context) {
    for (std::size_t i = 0; i < table.headers.size(); ++i) {
        if (table.headers[i] == name) return i;
    }
    throw std::runtime_error(context + ": column '" + name + "' not found");
}

// --- metric rows for compare ---------------------------------------------------

struct MethodRow {
    std::string method;
    int clusters = 1;
    std::size_t n_test = 0;
    std::size_t retained = 0;
    double excluded_rate = 0.0;
    double mse = 0.0;                 // normalized target scale
    double r2 = 0.0;
    bool r2_defined = false;
    double average_accuracy = 0.0;    // original target scale
    std::map<double, double> within;  // original target scale
    double dc_error = 0.0;
    bool has_dc_error = false;
    std::size_t missed_count = 0;
    double missed_rate = 0.0;
    std::size_t overkill_count = 0;
    double overkill_rate = 0.0;
};

MethodRow make_row(const std::string& method, int clusters,
                   const std::vector<PredictionOutcome>& outcomes,
                   const std::vector<double>& truths_raw,
                   const NormalizationParams& params, const RunConfig& config) {
    MethodRow row;
    row.method = method;
    row.clusters = clusters;
    row.n_test = outcomes.size();

    std::vector<double> retained_pred_norm;
    std::vector<double> retained_truth_norm;
    std::vector<double> retained_pred_raw;
    std::vector<double> retained_truth_raw;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].excluded) continue;
        retained_pred_raw.push_back(outcomes[i].predicted);
        retained_truth_raw.push_back(truths_raw[i]);
        retained_pred_norm.push_back(normalize_target_value(outcomes[i].predicted, params));
        retained_truth_norm.push_back(normalize_target_value(truths_raw[i], params));
    }
    row.retained = retained_pred_raw.size();
    row.excluded_rate =
        outcomes.empty()
            ? 0.0
            : static_cast<double>(outcomes.size() - row.retained) / outcomes.size();
    // Squared error in the normalized target scale; ratio metrics in the
    // original scale.
    MetricsView norm_view = metrics_view(retained_truth_norm, retained_pred_norm, {});
    row.mse = norm_view.mse;
    row.r2 = norm_view.r2;
    row.r2_defined = norm_view.r2_defined;
    MetricsView raw_view = metrics_view(retained_truth_raw, retained_pred_raw, config.taus);
    row.average_accuracy = raw_view.average_accuracy;
    row.within = raw_view.within;
    MissOverkill mo = miss_overkill(outcomes, truths_raw, config.accuracy_tau);
    row.missed_count = mo.missed_count;
    row.missed_rate = mo.missed_rate;
    row.overkill_count = mo.overkill_count;
    row.overkill_rate = mo.overkill_rate;
    return row;
}

ordered_json row_to_json(const MethodRow& row) {
    ordered_json j;
    j["method"] = row.method;
    j["clusters"] = row.clusters;
    j["n_test"] = row.n_test;
    j["retained"] = row.retained;
    j["excluded_rate"] = row.excluded_rate;
    j["mse"] = row.mse;
    if (row.r2_defined) {
        j["r2"] = row.r2;
    } else {
        j["r2"] = nullptr;
    }
    j["average_accuracy"] = row.average_accuracy;
    ordered_json within = ordered_json::object();
    for (const auto& [tau, ratio] : row.within) {
        within[format_double(tau)] = ratio;
    }
    j["within"] = within;
    if (row.has_dc_error) {
        j["dc_error"] = row.dc_error;
    } else {
        j["dc_error"] = nullptr;
    }
    j["missed_count"] = row.missed_count;
    j["missed_rate"] = row.missed_rate;
    j["overkill_count"] = row.overkill_count;
    j["overkill_rate"] = row.overkill_rate;
    return j;
}

std::vector<PredictionOutcome> outcomes_from_predictions(
    const std::vector<double>& predictions_raw, const std::vector<std::int64_t>& row_ids) {
    std::vector<PredictionOutcome> outcomes(predictions_raw.size());
    for (std::size_t i = 0; i < predictions_raw.size(); ++i) {
        outcomes[i].row_id = row_ids[i];
        outcomes[i].interval = 0;
        outcomes[i].predicted = predictions_raw[i];
        outcomes[i].range_low = 0.0;
        outcomes[i].range_high = 0.0;
        outcomes[i].range_empty = false;
        outcomes[i].excluded = false;
    }
    return outcomes;
}

void write_text_file(const std::string& path, const std::string& content,
                     const std::string& context) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(context + ": cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error(context + ": failed writing '" + path + "'");
}

}  // namespace

// --- configuration ------------------------------------------------------------

RunConfig parse_run_config(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("parse_run_config: configuration root must be an object");
    }
    static const std::set<std::string> known = {
        "input",          "target_column",    "train_fraction",  "iqr_multiplier",
        "seed",           "seeds",            "n_intervals",     "manual_ratios",
        "auto_strategy",  "bandwidth",        "kinds",           "max_iterations",
        "step_fraction",  "convergence",      "classifier_params",
        "regressor",      "neighbor_divisor", "exclusion",       "taus",
        "accuracy_tau",   "baselines",        "cluster_count",   "artifact_path",
        "report_path",    "test_csv_path",    "compare_json_path",
        "compare_csv_path"};
    reject_unknown_keys(doc, known, "configuration");

    RunConfig config;
    config.input = get_string(doc, "input", "");
    config.target_column = get_string(doc, "target_column", "");
    config.train_fraction = get_number(doc, "train_fraction", config.train_fraction);
    config.iqr_multiplier = get_number(doc, "iqr_multiplier", config.iqr_multiplier);
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
            fail_field("seed", "a non-negative integer");
        }
        if (doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() < 0) {
            fail_field("seed", "a non-negative integer");
        }
        config.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("seeds")) {
        const auto& v = doc.at("seeds");
        if (!v.is_array()) fail_field("seeds", "an array of non-negative integers");
        for (const auto& item : v) {
            if (!item.is_number_integer() && !item.is_number_unsigned()) {
                fail_field("seeds", "an array of non-negative integers");
            }
            if (item.is_number_integer() && item.get<long long>() < 0) {
                fail_field("seeds", "an array of non-negative integers");
            }
            config.seeds.push_back(item.get<std::uint64_t>());
        }
    }
    config.n_intervals = get_int(doc, "n_intervals", config.n_intervals);
    config.manual_ratios = get_number_list(doc, "manual_ratios", {});
    config.auto_strategy = get_string(doc, "auto_strategy", config.auto_strategy);
    config.bandwidth = get_number(doc, "bandwidth", config.bandwidth);
    config.kinds = get_string_list(doc, "kinds", config.kinds);
    config.max_iterations = get_int(doc, "max_iterations", config.max_iterations);
    config.step_fraction = get_number(doc, "step_fraction", config.step_fraction);

    if (doc.contains("convergence")) {
        const auto& c = doc.at("convergence");
        if (!c.is_object()) fail_field("convergence", "an object");
        reject_unknown_keys(c,
                            {"stall_window", "stall_tolerance", "instability_window",
                             "instability_threshold"},
                            "convergence");
        config.convergence.stall_window =
            get_int(c, "stall_window", config.convergence.stall_window);
        config.convergence.stall_tolerance =
            get_number(c, "stall_tolerance", config.convergence.stall_tolerance);
        config.convergence.instability_window =
            get_int(c, "instability_window", config.convergence.instability_window);
        config.convergence.instability_threshold = get_number(
            c, "instability_threshold", config.convergence.instability_threshold);
        if (config.convergence.stall_window < 2) {
            throw ConfigError("parse_run_config: convergence.stall_window must be >= 2");
        }
        if (config.convergence.instability_window < 2) {
            throw ConfigError(
                "parse_run_config: convergence.instability_window must be >= 2");
        }
    }

    if (doc.contains("classifier_params")) {
        const auto& p = doc.at("classifier_params");
        if (!p.is_object()) fail_field("classifier_params", "an object");
        reject_unknown_keys(p, {"tree", "forest", "boosted"}, "classifier_params");
        if (p.contains("tree")) {
            const auto& t = p.at("tree");
            reject_unknown_keys(t, {"max_depth", "min_leaf"}, "classifier_params.tree");
            config.classifier_params.tree.max_depth =
                get_int(t, "max_depth", config.classifier_params.tree.max_depth);
            config.classifier_params.tree.min_leaf =
                get_int(t, "min_leaf", config.classifier_params.tree.min_leaf);
        }
        if (p.contains("forest")) {
            const auto& f = p.at("forest");
            reject_unknown_keys(
                f, {"n_trees", "max_depth", "min_leaf", "bootstrap", "sample_features"},
                "classifier_params.forest");
            config.classifier_params.forest.n_trees =
                get_int(f, "n_trees", config.classifier_params.forest.n_trees);
            config.classifier_params.forest.max_depth =
                get_int(f, "max_depth", config.classifier_params.forest.max_depth);
            config.classifier_params.forest.min_leaf =
                get_int(f, "min_leaf", config.classifier_params.forest.min_leaf);
            config.classifier_params.forest.bootstrap =
                get_bool(f, "bootstrap", config.classifier_params.forest.bootstrap);
            config.classifier_params.forest.sample_features = get_bool(
                f, "sample_features", config.classifier_params.forest.sample_features);
        }
        if (p.contains("boosted")) {
            const auto& b = p.at("boosted");
            reject_unknown_keys(
                b, {"n_rounds", "max_depth", "min_leaf", "learning_rate", "l2"},
                "classifier_params.boosted");
            config.classifier_params.boosted.n_rounds =
                get_int(b, "n_rounds", config.classifier_params.boosted.n_rounds);
            config.classifier_params.boosted.max_depth =
                get_int(b, "max_depth", config.classifier_params.boosted.max_depth);
            config.classifier_params.boosted.min_leaf =
                get_int(b, "min_leaf", config.classifier_params.boosted.min_leaf);
            config.classifier_params.boosted.learning_rate = get_number(
                b, "learning_rate", config.classifier_params.boosted.learning_rate);
            config.classifier_params.boosted.l2 =
                get_number(b, "l2", config.classifier_params.boosted.l2);
        }
    }

    config.regressor = get_string(doc, "regressor", config.regressor);
    config.neighbor_divisor = get_int(doc, "neighbor_divisor", config.neighbor_divisor);

    if (doc.contains("exclusion")) {
        const auto& e = doc.at("exclusion");
        if (!e.is_object()) fail_field("exclusion", "an object");
        reject_unknown_keys(e, {"factor", "factors", "drop_first", "drop_last"},
                            "exclusion");
        if (e.contains("factor") && e.contains("factors")) {
            throw ConfigError(
                "parse_run_config: exclusion accepts either 'factor' or 'factors', not "
                "both");
        }
        config.exclusion_factor = get_number(e, "factor", config.exclusion_factor);
        config.exclusion_factors = get_number_list(e, "factors", {});
        config.drop_first = get_bool(e, "drop_first", false);
        config.drop_last = get_bool(e, "drop_last", false);
    }

    config.taus = get_number_list(doc, "taus", config.taus);
    config.accuracy_tau = get_number(doc, "accuracy_tau", config.accuracy_tau);
    config.baselines = get_string_list(doc, "baselines", config.baselines);
    config.cluster_count = get_int(doc, "cluster_count", config.cluster_count);
    config.artifact_path = get_string(doc, "artifact_path", config.artifact_path);
    config.report_path = get_string(doc, "report_path", config.report_path);
    config.test_csv_path = get_string(doc, "test_csv_path", config.test_csv_path);
    config.compare_json_path =
        get_string(doc, "compare_json_path", config.compare_json_path);
    config.compare_csv_path = get_string(doc, "compare_csv_path", config.compare_csv_path);

    // Range validation.
    if (config.input.empty()) throw ConfigError("parse_run_config: 'input' is required");
    if (config.target_column.empty()) {
        throw ConfigError("parse_run_config: 'target_column' is required");
    }
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw ConfigError("parse_run_config: train_fraction must be in (0, 1)");
    }
    if (config.n_intervals < 1) {
        throw ConfigError("parse_run_config: n_intervals must be >= 1");
    }
    if (!config.manual_ratios.empty()) {
        if (static_cast<int>(config.manual_ratios.size()) != config.n_intervals) {
            throw ConfigError(
                "parse_run_config: manual_ratios must have n_intervals entries");
        }
        for (double r : config.manual_ratios) {
            if (!(r > 0.0)) {
                throw ConfigError("parse_run_config: manual_ratios must be positive");
            }
        }
    }
    if (config.auto_strategy != "fluctuation" && config.auto_strategy != "density") {
        throw ConfigError(
            "parse_run_config: auto_strategy must be 'fluctuation' or 'density'");
    }
    if (config.bandwidth < 0.0) {
        throw ConfigError("parse_run_config: bandwidth must be >= 0");
    }
    if (config.kinds.empty()) {
        throw ConfigError("parse_run_config: kinds must not be empty");
    }
    {
        std::set<std::string> seen;
        for (const auto& name : config.kinds) {
            kind_from_name(name);
            if (!seen.insert(name).second) {
                throw ConfigError("parse_run_config: duplicate classifier kind '" + name +
                                  "'");
            }
        }
    }
    if (config.max_iterations < 1) {
        throw ConfigError("parse_run_config: max_iterations must be >= 1");
    }
    if (!(config.step_fraction > 0.0 && config.step_fraction <= 0.5)) {
        throw ConfigError("parse_run_config: step_fraction must be in (0, 0.5]");
    }
    if (config.regressor != "ordinary_least_squares") {
        throw ConfigError("parse_run_config: unknown regressor '" + config.regressor +
                          "'");
    }
    if (config.neighbor_divisor < 1) {
        throw ConfigError("parse_run_config: neighbor_divisor must be >= 1");
    }
    if (!(config.exclusion_factor >= 1.0)) {
        throw ConfigError("parse_run_config: exclusion factor must be >= 1");
    }
    if (!config.exclusion_factors.empty()) {
        if (static_cast<int>(config.exclusion_factors.size()) != config.n_intervals) {
            throw ConfigError(
                "parse_run_config: exclusion.factors must have n_intervals entries");
        }
        for (double f : config.exclusion_factors) {
            if (!(f >= 1.0)) {
                throw ConfigError("parse_run_config: exclusion factors must be >= 1");
            }
        }
    }
    if (config.taus.empty()) throw ConfigError("parse_run_config: taus must not be empty");
    for (double tau : config.taus) {
        if (!(tau > 0.0)) throw ConfigError("parse_run_config: taus must be positive");
    }
    if (!(config.accuracy_tau > 0.0)) {
        throw ConfigError("parse_run_config: accuracy_tau must be positive");
    }
    for (const auto& name : config.baselines) {
        if (name != "dp" && name != "kc" && name != "gc") {
            throw ConfigError("parse_run_config: unknown baseline '" + name + "'");
        }
    }
    if (config.cluster_count < 0) {
        throw ConfigError("parse_run_config: cluster_count must be >= 0");
    }
    if (config.max_iterations < config.convergence.stall_window) {
        // Allowed: the stall check simply never fires.
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_run_config: cannot open '" + path + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("load_run_config: ") + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& config) {
    ordered_json j;
    j["input"] = config.input;
    j["target_column"] = config.target_column;
    j["train_fraction"] = config.train_fraction;
    j["iqr_multiplier"] = config.iqr_multiplier;
    j["seed"] = config.seed;
    if (!config.seeds.empty()) j["seeds"] = config.seeds;
    j["n_intervals"] = config.n_intervals;
    if (!config.manual_ratios.empty()) j["manual_ratios"] = config.manual_ratios;
    j["auto_strategy"] = config.auto_strategy;
    j["bandwidth"] = config.bandwidth;
    j["kinds"] = config.kinds;
    j["max_iterations"] = config.max_iterations;
    j["step_fraction"] = config.step_fraction;
    j["convergence"] = {{"stall_window", config.convergence.stall_window},
                        {"stall_tolerance", config.convergence.stall_tolerance},
                        {"instability_window", config.convergence.instability_window},
                        {"instability_threshold", config.convergence.instability_threshold}};
    j["classifier_params"] = {
        {"tree",
         {{"max_depth", config.classifier_params.tree.max_depth},
          {"min_leaf", config.classifier_params.tree.min_leaf}}},
        {"forest",
         {{"n_trees", config.classifier_params.forest.n_trees},
          {"max_depth", config.classifier_params.forest.max_depth},
          {"min_leaf", config.classifier_params.forest.min_leaf},
          {"bootstrap", config.classifier_params.forest.bootstrap},
          {"sample_features", config.classifier_params.forest.sample_features}}},
        {"boosted",
         {{"n_rounds", config.classifier_params.boosted.n_rounds},
          {"max_depth", config.classifier_params.boosted.max_depth},
          {"min_leaf", config.classifier_params.boosted.min_leaf},
          {"learning_rate", config.classifier_params.boosted.learning_rate},
          {"l2", config.classifier_params.boosted.l2}}}};
    j["regressor"] = config.regressor;
    j["neighbor_divisor"] = config.neighbor_divisor;
    ordered_json exclusion;
    if (!config.exclusion_factors.empty()) {
        exclusion["factors"] = config.exclusion_factors;
    } else {
        exclusion["factor"] = config.exclusion_factor;
    }
    exclusion["drop_first"] = config.drop_first;
    exclusion["drop_last"] = config.drop_last;
    j["exclusion"] = exclusion;
    j["taus"] = config.taus;
    j["accuracy_tau"] = config.accuracy_tau;
    j["baselines"] = config.baselines;
    j["cluster_count"] = config.cluster_count;
    j["artifact_path"] = config.artifact_path;
    j["report_path"] = config.report_path;
    if (!config.test_csv_path.empty()) j["test_csv_path"] = config.test_csv_path;
    j["compare_json_path"] = config.compare_json_path;
    j["compare_csv_path"] = config.compare_csv_path;
    return j;
}

LoopConfig loop_config_from(const RunConfig& config, std::uint64_t seed) {
    LoopConfig loop;
    loop.n_intervals = config.n_intervals;
    loop.manual_ratios = config.manual_ratios;
    loop.segmentation.bandwidth = config.bandwidth;
    loop.segmentation.strategy = config.auto_strategy == "density"
                                     ? AutoStrategy::kDensity
                                     : AutoStrategy::kFluctuation;
    loop.kinds.clear();
    for (const auto& name : config.kinds) loop.kinds.push_back(kind_from_name(name));
    loop.classifier_params = config.classifier_params;
    loop.max_iterations = config.max_iterations;
    loop.step_fraction = config.step_fraction;
    loop.convergence = config.convergence;
    loop.seed = mix_seed(seed, kLoopTag);
    return loop;
}

ExclusionConfig exclusion_config_from(const RunConfig& config) {
    if (!config.exclusion_factors.empty()) {
        ExclusionConfig excl;
        excl.factors = config.exclusion_factors;
        excl.drop_first = config.drop_first;
        excl.drop_last = config.drop_last;
        return excl;
    }
    return uniform_exclusion_config(config.n_intervals, config.exclusion_factor,
                                    config.drop_first, config.drop_last);
}

// --- data preparation -----------------------------------------------------------

PreparedData prepare_data(const RunConfig& config, std::uint64_t seed) {
    PreparedData prepared;
    LoadResult loaded = stage_as_config("ingest", [&] {
        return load_csv(config.input, config.target_column);
    });
    prepared.dropped_rows = loaded.dropped_rows;

    Dataset filtered = loaded.dataset;
    if (config.iqr_multiplier > 0.0) {
        auto [kept, removed] = stage("preprocess", [&] {
            return iqr_filter(loaded.dataset, config.iqr_multiplier);
        });
        filtered = std::move(kept);
        prepared.removed_outliers = removed;
    }

    stage("split", [&] {
        auto [train, test] = split(filtered, config.train_fraction, mix_seed(seed, kSplitTag));
        prepared.train_raw = std::move(train);
        prepared.test_raw = std::move(test);
        return 0;
    });

    stage("normalize", [&] {
        auto [train_norm, params] = normalize(prepared.train_raw);
        prepared.train_norm = std::move(train_norm);
        prepared.params = params;
        prepared.test_norm = apply_normalization(prepared.test_raw, params);
        return 0;
    });

    stage("split", [&] {
        auto [train_t, train_p] = split_tt(prepared.train_norm, mix_seed(seed, kTrainSplitTag));
        prepared.train_t = std::move(train_t);
        prepared.train_p = std::move(train_p);
        return 0;
    });
    return prepared;
}

// --- training ---------------------------------------------------------------------

namespace {

ordered_json kind_trace_to_json(const KindTrace& trace) {
    ordered_json j;
    j["kind"] = classifier_kind_name(trace.kind);
    j["best_loss"] = trace.best_loss;
    j["best_iteration"] = trace.best_iteration;
    j["score"] = trace.score;
    j["losses"] = trace.losses;
    return j;
}

std::vector<std::size_t> interval_counts(const std::vector<double>& targets,
                                         const SegmentationList& seg) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(seg.n_intervals), 0);
    for (double t : targets) ++counts[static_cast<std::size_t>(interval_of(t, seg))];
    return counts;
}

}  // namespace

TrainProduct run_training(const RunConfig& config, std::uint64_t seed) {
    PreparedData prepared = prepare_data(config, seed);

    LoopConfig loop = loop_config_from(config, seed);
    DynamicClassificationResult dc = stage("refine", [&] {
        return run_dynamic_classification(prepared.train_t, prepared.train_p, loop);
    });

    ExclusionConfig excl = exclusion_config_from(config);
    IntervalEnsemble ensemble = stage("assemble", [&] {
        return build_ensemble(prepared.train_norm, dc, prepared.params, excl,
                              config.neighbor_divisor);
    });

    TrainProduct product;
    product.artifact.ensemble = std::move(ensemble);
    product.artifact.trace = dc.trace;
    product.artifact.dc_error = dc.dc_error;
    product.artifact.stalled = dc.stalled;
    product.artifact.unstable = dc.unstable;
    ordered_json snapshot = run_config_to_json(config);
    snapshot["seed"] = seed;
    product.artifact.config_snapshot = snapshot;

    ordered_json report;
    report["command"] = "train";
    report["seed"] = seed;
    report["rows"] = {{"usable", prepared.train_raw.size() + prepared.test_raw.size()},
                      {"dropped_on_ingest", prepared.dropped_rows},
                      {"removed_outliers", prepared.removed_outliers},
                      {"train", prepared.train_raw.size()},
                      {"test", prepared.test_raw.size()},
                      {"train_t", prepared.train_t.size()},
                      {"train_p", prepared.train_p.size()}};
    report["best_kind"] = classifier_kind_name(dc.best_kind);
    report["dc_error"] = dc.dc_error;
    report["iterations_run"] = dc.iterations_run;
    report["warnings"] = {{"stalled", dc.stalled}, {"unstable", dc.unstable}};
    ordered_json traces = ordered_json::array();
    for (const auto& trace : dc.trace) traces.push_back(kind_trace_to_json(trace));
    report["kind_traces"] = traces;
    report["segmentation"] = {{"n_intervals", dc.optimal_segmentation.n_intervals},
                              {"cuts", dc.optimal_segmentation.cuts}};
    {
        std::vector<double> cuts_original;
        for (double c : dc.optimal_segmentation.cuts) {
            cuts_original.push_back(denormalize_target_value(c, prepared.params));
        }
        report["segmentation"]["cuts_original_scale"] = cuts_original;
    }
    report["interval_train_counts"] =
        interval_counts(prepared.train_norm.targets, dc.optimal_segmentation);
    report["artifact_path"] = config.artifact_path;
    product.report = std::move(report);
    product.test_raw = std::move(prepared.test_raw);
    return product;
}

nlohmann::ordered_json cmd_train(const RunConfig& config) {
    TrainProduct product = run_training(config, config.seed);
    stage("emit", [&] {
        save_artifact(product.artifact, config.artifact_path);
        write_text_file(config.report_path, product.report.dump(2) + "\n", "cmd_train");
        if (!config.test_csv_path.empty()) {
            write_dataset_csv(product.test_raw, config.test_csv_path,
                              config.target_column);
        }
        return 0;
    });
    return product.report;
}

// --- prediction ----------------------------------------------------------------

nlohmann::ordered_json cmd_predict(const std::string& artifact_path,
                                   const std::string& input_csv,
                                   const std::string& output_csv) {
    ModelArtifact artifact = stage_as_config(
        "ingest", [&] { return load_artifact(artifact_path); });
    CsvTable table =
        stage_as_config("ingest", [&] { return read_csv_table(input_csv); });

    // Align input columns to the training feature order by header name; a
    // target column in the input, if any, is simply ignored.
    const auto& wanted = artifact.ensemble.column_names;
    std::vector<std::size_t> source_index;
    for (const auto& name : wanted) {
        source_index.push_back(stage_as_config(
            "ingest", [&] { return header_index(table, name, "cmd_predict"); }));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<double> selected;
        selected.reserve(source_index.size());
        for (std::size_t idx : source_index) selected.push_back(row[idx]);
        rows.push_back(std::move(selected));
    }

    std::vector<PredictionOutcome> outcomes = stage("predict", [&] {
        auto out = artifact.ensemble.predict(rows, table.row_ids);
        return apply_exclusion(std::move(out), artifact.ensemble.valid_ranges());
    });
    stage("emit", [&] {
        write_outcomes_csv(outcomes, output_csv);
        return 0;
    });

    ordered_json report;
    report["command"] = "predict";
    report["rows"] = {{"predicted", outcomes.size()},
                      {"dropped_on_ingest", table.dropped_rows}};
    if (outcomes.empty()) {
        report["excluded"] = 0;
        report["excluded_rate"] = 0.0;
    } else {
        ExclusionSummary summary = exclusion_summary(
            outcomes, artifact.ensemble.segmentation.n_intervals);
        report["excluded"] = summary.excluded;
        report["excluded_rate"] = summary.excluded_rate;
    }
    report["output_csv"] = output_csv;
    return report;
}

// --- evaluation -----------------------------------------------------------------

nlohmann::ordered_json cmd_evaluate(const std::string& outcomes_csv,
                                    const std::string& data_csv,
                                    const std::string& target_column,
                                    const std::vector<double>& taus,
                                    double accuracy_tau,
                                    const std::string& report_path) {
    if (taus.empty()) throw ConfigError("cmd_evaluate: taus must not be empty");
    for (double tau : taus) {
        if (!(tau > 0.0)) throw ConfigError("cmd_evaluate: taus must be positive");
    }
    if (!(accuracy_tau > 0.0)) {
        throw ConfigError("cmd_evaluate: accuracy_tau must be positive");
    }
    std::vector<PredictionOutcome> outcomes = stage_as_config(
        "ingest", [&] { return read_outcomes_csv(outcomes_csv); });
    LoadResult loaded = stage_as_config(
        "ingest", [&] { return load_csv(data_csv, target_column); });

    std::map<std::int64_t, double> truth_by_id;
    for (std::size_t i = 0; i < loaded.dataset.size(); ++i) {
        truth_by_id[loaded.dataset.row_ids[i]] = loaded.dataset.targets[i];
    }
    std::vector<double> truths;
    truths.reserve(outcomes.size());
    for (const auto& outcome : outcomes) {
        auto it = truth_by_id.find(outcome.row_id);
        if (it == truth_by_id.end()) {
            throw ConfigError("cmd_evaluate: outcome row id " +
                              std::to_string(outcome.row_id) +
                              " has no matching row in '" + data_csv + "'");
        }
        truths.push_back(it->second);
    }

    EvaluationReport evaluation = stage("evaluate", [&] {
        return evaluate_outcomes(outcomes, truths, taus, accuracy_tau, 0.0);
    });

    auto view_to_json = [](const MetricsView& view) {
        ordered_json j;
        j["count"] = view.count;
        j["mse"] = view.mse;
        if (view.r2_defined) {
            j["r2"] = view.r2;
        } else {
            j["r2"] = nullptr;
        }
        j["average_accuracy"] = view.average_accuracy;
        ordered_json within = ordered_json::object();
        for (const auto& [tau, ratio] : view.within) within[format_double(tau)] = ratio;
        j["within"] = within;
        return j;
    };

    int n_intervals = 1;
    for (const auto& outcome : outcomes) {
        n_intervals = std::max(n_intervals, outcome.interval + 1);
    }
    ExclusionSummary summary = exclusion_summary(outcomes, n_intervals);

    ordered_json report;
    report["command"] = "evaluate";
    report["all"] = view_to_json(evaluation.all);
    report["retained"] = view_to_json(evaluation.retained);
    report["excluded_rate"] = evaluation.excluded_rate;
    report["accuracy_tau"] = accuracy_tau;
    report["misses"] = {{"missed_count", evaluation.misses.missed_count},
                        {"missed_rate", evaluation.misses.missed_rate},
                        {"overkill_count", evaluation.misses.overkill_count},
                        {"overkill_rate", evaluation.misses.overkill_rate},
                        {"inaccurate_total", evaluation.misses.inaccurate_total},
                        {"accurate_total", evaluation.misses.accurate_total}};
    report["per_interval"] = {{"total", summary.per_interval_total},
                              {"excluded", summary.per_interval_excluded}};
    stage("emit", [&] {
        write_text_file(report_path, report.dump(2) + "\n", "cmd_evaluate");
        return 0;
    });
    return report;
}

// --- comparison -----------------------------------------------------------------

nlohmann::ordered_json cmd_compare(const RunConfig& config) {
    std::vector<std::uint64_t> seeds = config.seeds;
    if (seeds.empty()) seeds.push_back(config.seed);
    int clusters = config.cluster_count > 0 ? config.cluster_count : config.n_intervals;

    ordered_json runs = ordered_json::array();
    std::ostringstream csv;
    csv << "seed,method,clusters,n_test,retained,excluded_rate,mse,r2,average_accuracy";
    for (double tau : config.taus) csv << ",within_" << format_double(tau);
    csv << ",dc_error,missed_count,missed_rate,overkill_count,overkill_rate\n";

    for (std::uint64_t seed : seeds) {
        PreparedData prepared = prepare_data(config, seed);
        std::vector<MethodRow> rows;

        auto add_baseline = [&](const BaselinePrediction& pred) {
            auto outcomes =
                outcomes_from_predictions(pred.predictions, prepared.test_raw.row_ids);
            // Baseline models predict in the normalized scale; report raw-scale
            // ratios from denormalized values.
            for (auto& outcome : outcomes) {
                outcome.predicted = denormalize_target_value(outcome.predicted, prepared.params);
            }
            rows.push_back(make_row(pred.method, static_cast<int>(pred.cluster_count),
                                    outcomes, prepared.test_raw.targets, prepared.params,
                                    config));
        };

        for (const auto& name : config.baselines) {
            if (name == "dp") {
                add_baseline(stage("baseline", [&] {
                    return baseline_dp(prepared.train_norm, prepared.test_norm);
                }));
            } else if (name == "kc") {
                add_baseline(stage("baseline", [&] {
                    return baseline_kmeans(prepared.train_norm, prepared.test_norm,
                                           clusters, mix_seed(seed, 201));
                }));
            } else if (name == "gc") {
                add_baseline(stage("baseline", [&] {
                    return baseline_gmm(prepared.train_norm, prepared.test_norm,
                                        clusters, mix_seed(seed, 202));
                }));
            }
        }

        // Dynamic classification with and without exclusion, same artifacts.
        LoopConfig loop = loop_config_from(config, seed);
        DynamicClassificationResult dc = stage("refine", [&] {
            return run_dynamic_classification(prepared.train_t, prepared.train_p, loop);
        });
        ExclusionConfig excl = exclusion_config_from(config);
        IntervalEnsemble ensemble = stage("assemble", [&] {
            return build_ensemble(prepared.train_norm, dc, prepared.params, excl,
                                  config.neighbor_divisor);
        });
        std::vector<PredictionOutcome> outcomes = stage("predict", [&] {
            return ensemble.predict(prepared.test_raw.rows, prepared.test_raw.row_ids);
        });
        MethodRow dc_row = make_row("dc", config.n_intervals, outcomes,
                                    prepared.test_raw.targets, prepared.params, config);
        dc_row.dc_error = dc.dc_error;
        dc_row.has_dc_error = true;
        rows.push_back(dc_row);

        std::vector<PredictionOutcome> excluded_outcomes =
            apply_exclusion(outcomes, ensemble.valid_ranges());
        MethodRow dce_row = make_row("dc_exclusion", config.n_intervals, excluded_outcomes,
                                     prepared.test_raw.targets, prepared.params, config);
        dce_row.dc_error = dc.dc_error;
        dce_row.has_dc_error = true;
        rows.push_back(dce_row);

        ordered_json run;
        run["seed"] = seed;
        run["rows"] = {{"train", prepared.train_raw.size()},
                       {"test", prepared.test_raw.size()},
                       {"dropped_on_ingest", prepared.dropped_rows},
                       {"removed_outliers", prepared.removed_outliers}};
        ordered_json methods = ordered_json::array();
        for (const auto& row : rows) {
            methods.push_back(row_to_json(row));
            csv << seed << ',' << row.method << ',' << row.clusters << ',' << row.n_test
                << ',' << row.retained << ',' << format_double(row.excluded_rate) << ','
                << format_double(row.mse) << ','
                << (row.r2_defined ? format_double(row.r2) : "") << ','
                << format_double(row.average_accuracy);
            for (double tau : config.taus) {
                auto it = row.within.find(tau);
                csv << ',' << (it == row.within.end() ? "" : format_double(it->second));
            }
            csv << ',' << (row.has_dc_error ? format_double(row.dc_error) : "") << ','
                << row.missed_count << ',' << format_double(row.missed_rate) << ','
                << row.overkill_count << ',' << format_double(row.overkill_rate) << '\n';
        }
        run["methods"] = methods;
        runs.push_back(run);
    }

    ordered_json report;
    report["command"] = "compare";
    report["config"] = run_config_to_json(config);
    report["runs"] = runs;
    stage("emit", [&] {
        write_text_file(config.compare_json_path, report.dump(2) + "\n", "cmd_compare");
        write_text_file(config.compare_csv_path, csv.str(), "cmd_compare");
        return 0;
    });
    return report;
}

// --- synthesis ------------------------------------------------------------------

nlohmann::ordered_json cmd_synth(const SyntheticSpec& spec, const std::string& output_csv) {
    Dataset ds = stage("synth", [&] { return generate_synthetic(spec); });
    stage("emit", [&] {
        write_dataset_csv(ds, output_csv, "target");
        return 0;
    });
    ordered_json report;
    report["command"] = "synth";
    report["rows"] = ds.size();
    report["features"] = ds.feature_count();
    report["output_csv"] = output_csv;
    return report;
}

// --- persistence helpers ----------------------------------------------------------

void write_outcomes_csv(const std::vector<PredictionOutcome>& outcomes,
                        const std::string& path) {
    std::ostringstream out;
    out << "row_id,interval,prediction,range_low,range_high,range_empty,excluded\n";
    for (const auto& o : outcomes) {
        out << o.row_id << ',' << o.interval << ',' << format_double(o.predicted) << ','
            << format_double(o.range_low) << ',' << format_double(o.range_high) << ','
            << (o.range_empty ? 1 : 0) << ',' << (o.excluded ? 1 : 0) << '\n';
    }
    write_text_file(path, out.str(), "write_outcomes_csv");
}

std::vector<PredictionOutcome> read_outcomes_csv(const std::string& path) {
    CsvTable table = read_csv_table(path);
    const std::vector<std::string> expected = {"row_id",    "interval",    "prediction",
                                               "range_low", "range_high", "range_empty",
                                               "excluded"};
    if (table.headers != expected) {
        throw std::runtime_error("read_outcomes_csv: '" + path +
                                 "' does not have the outcome-table header");
    }
    std::vector<PredictionOutcome> outcomes;
    outcomes.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        PredictionOutcome o;
        o.row_id = static_cast<std::int64_t>(row[0]);
        o.interval = static_cast<int>(row[1]);
        o.predicted = row[2];
        o.range_low = row[3];
        o.range_high = row[4];
        o.range_empty = row[5] != 0.0;
        o.excluded = row[6] != 0.0;
        outcomes.push_back(o);
    }
    return outcomes;
}

void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& target_name) {
    std::ostringstream out;
    for (const auto& name : ds.column_names) out << name << ',';
    out << target_name << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.rows[i]) out << format_double(v) << ',';
        out << format_double(ds.targets[i]) << '\n';
    }
    write_text_file(path, out.str(), "write_dataset_csv");
}

}  // namespace dca

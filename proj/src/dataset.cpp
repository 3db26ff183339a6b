#include "dca/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dca/rng.hpp"

namespace dca {

namespace {

// Splits one CSV line on commas; no quoting support (inputs are numeric).
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string& cell, double& out) {
    const std::string text = trim(cell);
    if (text.empty()) {
        return false;
    }
    std::size_t consumed = 0;
    try {
        out = std::stod(text, &consumed);
    } catch (const std::exception&) {
        throw std::runtime_error("load_csv: cell '" + text + "' is not numeric");
    }
    if (consumed != text.size()) {
        throw std::runtime_error("load_csv: cell '" + text + "' is not numeric");
    }
    return true;
}

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& indices, Role role) {
    Dataset out;
    out.column_names = ds.column_names;
    out.role = role;
    out.rows.reserve(indices.size());
    out.targets.reserve(indices.size());
    out.row_ids.reserve(indices.size());
    for (std::size_t idx : indices) {
        out.rows.push_back(ds.rows[idx]);
        out.targets.push_back(ds.targets[idx]);
        out.row_ids.push_back(ds.row_ids[idx]);
    }
    return out;
}

}  // namespace

std::string role_name(Role role) {
    switch (role) {
        case Role::kRaw: return "raw";
        case Role::kTrain: return "train";
        case Role::kTest: return "test";
        case Role::kTrainT: return "train_t";
        case Role::kTrainP: return "train_p";
    }
    return "unknown";
}

void Dataset::check_consistent(const std::string& context) const {
    if (targets.size() != rows.size() || row_ids.size() != rows.size()) {
        throw std::runtime_error(context + ": row/target/id counts disagree");
    }
    for (const auto& row : rows) {
        if (row.size() != column_names.size()) {
            throw std::runtime_error(context + ": row width differs from header");
        }
    }
}

LoadResult load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("load_csv: cannot open '" + path + "'");
    }

    std::string line;
    if (!std::getline(file, line)) {
        throw std::runtime_error("load_csv: '" + path + "' is empty");
    }
    std::vector<std::string> headers = split_line(line);
    for (auto& h : headers) {
        h = trim(h);
    }

    std::size_t target_index = headers.size();
    for (std::size_t i = 0; i < headers.size(); ++i) {
        if (headers[i] == target_column) {
            target_index = i;
            break;
        }
    }
    if (target_index == headers.size()) {
        throw std::runtime_error("load_csv: target column '" + target_column +
                                 "' not found in '" + path + "'");
    }

    LoadResult result;
    Dataset& ds = result.dataset;
    for (std::size_t i = 0; i < headers.size(); ++i) {
        if (i != target_index) {
            ds.column_names.push_back(headers[i]);
        }
    }

    std::int64_t row_id = 0;
    while (std::getline(file, line)) {
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != headers.size()) {
            throw std::runtime_error("load_csv: row " + std::to_string(row_id) +
                                     " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(headers.size()));
        }

        std::vector<double> features;
        features.reserve(headers.size() - 1);
        double target = 0.0;
        bool missing = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double value = 0.0;
            if (!parse_number(cells[i], value)) {
                missing = true;
                break;
            }
            if (i == target_index) {
                target = value;
            } else {
                features.push_back(value);
            }
        }

        if (missing) {
            ++result.dropped_rows;
        } else {
            ds.rows.push_back(std::move(features));
            ds.targets.push_back(target);
            ds.row_ids.push_back(row_id);
        }
        ++row_id;
    }

    if (ds.rows.empty()) {
        throw std::runtime_error("load_csv: no usable rows in '" + path + "'");
    }
    ds.check_consistent("load_csv");
    return result;
}

double quantile_linear(const std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty()) {
        throw std::invalid_argument("quantile_linear: empty input");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("quantile_linear: q outside [0, 1]");
    }
    const std::size_t n = sorted_values.size();
    if (n == 1) {
        return sorted_values.front();
    }
    const double h = static_cast<double>(n - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) {
        return sorted_values.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

std::pair<Dataset, std::size_t> iqr_filter(const Dataset& ds, double multiplier) {
    if (ds.size() == 0) {
        throw std::invalid_argument("iqr_filter: empty dataset");
    }
    if (multiplier <= 0.0) {
        throw std::invalid_argument("iqr_filter: multiplier must be positive");
    }

    const std::size_t n = ds.size();
    const std::size_t feature_count = ds.feature_count();

    // Bounds per column: feature columns first, target last.
    std::vector<double> lows(feature_count + 1);
    std::vector<double> highs(feature_count + 1);
    std::vector<double> column(n);
    for (std::size_t c = 0; c <= feature_count; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = (c < feature_count) ? ds.rows[i][c] : ds.targets[i];
        }
        std::sort(column.begin(), column.end());
        const double q1 = quantile_linear(column, 0.25);
        const double q3 = quantile_linear(column, 0.75);
        const double iqr = q3 - q1;
        lows[c] = q1 - multiplier * iqr;
        highs[c] = q3 + multiplier * iqr;
    }

    std::vector<std::size_t> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool inside = ds.targets[i] >= lows[feature_count] && ds.targets[i] <= highs[feature_count];
        for (std::size_t c = 0; inside && c < feature_count; ++c) {
            inside = ds.rows[i][c] >= lows[c] && ds.rows[i][c] <= highs[c];
        }
        if (inside) {
            kept.push_back(i);
        }
    }

    Dataset filtered = take_rows(ds, kept, ds.role);
    return {std::move(filtered), n - kept.size()};
}

std::pair<Dataset, NormalizationParams> normalize(const Dataset& ds) {
    if (ds.size() == 0) {
        throw std::invalid_argument("normalize: empty dataset");
    }

    NormalizationParams params;
    const std::size_t feature_count = ds.feature_count();
    params.feature_min.assign(feature_count, std::numeric_limits<double>::infinity());
    params.feature_max.assign(feature_count, -std::numeric_limits<double>::infinity());
    params.feature_constant.assign(feature_count, false);

    for (const auto& row : ds.rows) {
        for (std::size_t c = 0; c < feature_count; ++c) {
            params.feature_min[c] = std::min(params.feature_min[c], row[c]);
            params.feature_max[c] = std::max(params.feature_max[c], row[c]);
        }
    }
    for (std::size_t c = 0; c < feature_count; ++c) {
        params.feature_constant[c] = params.feature_max[c] == params.feature_min[c];
    }

    const auto [target_min_it, target_max_it] =
        std::minmax_element(ds.targets.begin(), ds.targets.end());
    params.target_min = *target_min_it;
    params.target_max = *target_max_it;
    params.target_constant = params.target_max == params.target_min;

    return {apply_normalization(ds, params), std::move(params)};
}

Dataset apply_normalization(const Dataset& ds, const NormalizationParams& params) {
    if (params.feature_min.size() != ds.feature_count()) {
        throw std::runtime_error("apply_normalization: column count differs from fit");
    }

    Dataset out = ds;
    for (auto& row : out.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (params.feature_constant[c]) {
                row[c] = 0.0;
            } else {
                row[c] = (row[c] - params.feature_min[c]) /
                         (params.feature_max[c] - params.feature_min[c]);
            }
        }
    }
    for (auto& t : out.targets) {
        t = normalize_target_value(t, params);
    }
    return out;
}

double normalize_target_value(double value, const NormalizationParams& params) {
    if (params.target_constant) {
        return 0.0;
    }
    return (value - params.target_min) / (params.target_max - params.target_min);
}

double denormalize_target_value(double value, const NormalizationParams& params) {
    if (params.target_constant) {
        return params.target_min;
    }
    return params.target_min + value * (params.target_max - params.target_min);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
    if (ds.size() < 2) {
        throw std::invalid_argument("split: need at least 2 rows");
    }
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("split: train_fraction must lie in (0, 1)");
    }

    const std::size_t n = ds.size();
    // ceil(n * f) with a tolerance against floating-point noise in the
    // product, so exact fractions (10 * 0.3) stay exact; the ceil sends the
    // odd row to the first-named output.
    auto train_count =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1.0 - 1e-9));
    train_count = std::min(std::max<std::size_t>(train_count, 1), n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    return {take_rows(ds, train_idx, Role::kTrain), take_rows(ds, test_idx, Role::kTest)};
}

std::pair<Dataset, Dataset> split_tt(const Dataset& train, std::uint64_t seed) {
    if (train.size() < 4) {
        throw std::invalid_argument("split_tt: need at least 4 rows");
    }
    auto [t, p] = split(train, 0.5, seed);
    t.role = Role::kTrainT;
    p.role = Role::kTrainP;
    return {std::move(t), std::move(p)};
}

}  // namespace dca

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rulens/error.hpp"
#include "rulens/random.hpp"

namespace rulens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sorted, distinct row indices into a Dataset.
using IndexSubset = std::vector<std::size_t>;

/// Observation matrix plus class labels.
///
/// Labels are stored as indices into `class_names`. Binary tasks read them as
/// {-1,+1} through signed_labels(), class index 1 being the positive class.
struct Dataset {
    Matrix observations;  // N x K
    std::vector<int> labels;
    std::vector<std::string> attribute_names;
    std::vector<std::string> class_names;

    std::size_t rows() const { return static_cast<std::size_t>(observations.rows()); }
    std::size_t attributes() const { return static_cast<std::size_t>(observations.cols()); }
    std::size_t classes() const { return class_names.size(); }

    Vector signed_labels(int positive_class = 1) const {
        Vector y(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i)
            y[static_cast<Eigen::Index>(i)] = labels[i] == positive_class ? 1.0 : -1.0;
        return y;
    }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(classes(), 0);
        for (int c : labels) ++counts[static_cast<std::size_t>(c)];
        return counts;
    }

    Dataset subset(std::span<const std::size_t> rows_to_keep) const {
        Dataset out;
        out.attribute_names = attribute_names;
        out.class_names = class_names;
        out.observations.resize(static_cast<Eigen::Index>(rows_to_keep.size()), observations.cols());
        out.labels.reserve(rows_to_keep.size());
        for (std::size_t i = 0; i < rows_to_keep.size(); ++i) {
            out.observations.row(static_cast<Eigen::Index>(i)) =
                observations.row(static_cast<Eigen::Index>(rows_to_keep[i]));
            out.labels.push_back(labels[rows_to_keep[i]]);
        }
        return out;
    }

    void validate() const {
        if (observations.rows() < 1 || observations.cols() < 1)
            throw DataError("dataset must have at least one row and one attribute");
        if (labels.size() != rows())
            throw DataError("label count does not match row count");
        if (attribute_names.size() != attributes())
            throw DataError("attribute name count does not match column count");
        if (!observations.allFinite()) throw DataError("dataset contains non-finite values");
        for (int c : labels)
            if (c < 0 || static_cast<std::size_t>(c) >= classes())
                throw DataError("label outside the declared classes");
    }
};

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_real(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') ++begin;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

} // namespace detail

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_fields(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError("empty CSV input (no header row)");
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return read_csv(in);
}

// Label column chosen by header name or zero-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

inline std::size_t resolve_label_column(const CsvTable& table, const LabelColumn& column) {
    if (const auto* index = std::get_if<std::size_t>(&column)) {
        if (*index >= table.header.size())
            throw DataError("label column index " + std::to_string(*index) + " out of range");
        return *index;
    }
    const auto& name = std::get<std::string>(column);
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw DataError("unknown label column: " + name);
    return static_cast<std::size_t>(it - table.header.begin());
}

// Numeric attribute block of a table, skipping `skip_column` when given.
inline Matrix table_attributes(const CsvTable& table, std::optional<std::size_t> skip_column,
                               std::vector<std::string>* names = nullptr) {
    const std::size_t width = table.header.size() - (skip_column ? 1 : 0);
    if (width == 0) throw DataError("no attribute columns");
    Matrix x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(width));
    if (names) names->clear();
    for (std::size_t c = 0, out_c = 0; c < table.header.size(); ++c) {
        if (skip_column && c == *skip_column) continue;
        if (names) names->push_back(table.header[c]);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto value = detail::parse_real(table.rows[r][c]);
            if (!value)
                throw DataError("row " + std::to_string(r + 1) + ", column " + std::to_string(c) +
                                " (" + table.header[c] + "): cannot parse '" + table.rows[r][c] +
                                "' as a finite real");
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_c)) = *value;
        }
        ++out_c;
    }
    return x;
}

/// Builds a Dataset from a parsed table.
///
/// Classes are ordered numerically when every label parses as a number and by
/// first appearance otherwise, so "-1,1" and "0,1" both map to {-1,+1}.
inline Dataset dataset_from_table(const CsvTable& table, const LabelColumn& label_column) {
    if (table.rows.empty()) throw DataError("no data rows");
    const std::size_t label_col = resolve_label_column(table, label_column);
    Dataset d;
    d.observations = table_attributes(table, label_col, &d.attribute_names);

    std::vector<std::string> order;
    bool numeric = true;
    for (const auto& row : table.rows) {
        const auto& label = row[label_col];
        if (label.empty()) throw DataError("empty label cell");
        if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
    }
    std::vector<double> numeric_value(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto v = detail::parse_real(order[i]);
        if (!v) { numeric = false; break; }
        numeric_value[i] = *v;
    }
    if (numeric) {
        std::vector<std::size_t> perm(order.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return numeric_value[a] < numeric_value[b]; });
        for (std::size_t i = 1; i < perm.size(); ++i)
            if (numeric_value[perm[i]] == numeric_value[perm[i - 1]])
                throw DataError("labels '" + order[perm[i - 1]] + "' and '" + order[perm[i]] +
                                "' denote the same numeric class");
        std::vector<std::string> sorted;
        for (auto p : perm) sorted.push_back(order[p]);
        order = std::move(sorted);
    }
    if (order.size() < 2) throw DataError("label column has fewer than 2 distinct classes");
    d.class_names = order;
    d.labels.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const auto it = std::find(order.begin(), order.end(), row[label_col]);
        d.labels.push_back(static_cast<int>(it - order.begin()));
    }
    d.validate();
    return d;
}

inline Dataset load_csv(const std::string& path, const LabelColumn& label_column) {
    return dataset_from_table(read_csv_file(path), label_column);
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-attribute mean and (population) standard deviation.
/// Constant columns record std = 1 so the transform never divides by zero.
struct ScalingParams {
    Vector means;
    Vector stds;

    static ScalingParams identity(std::size_t attributes) {
        const auto k = static_cast<Eigen::Index>(attributes);
        return {Vector::Zero(k), Vector::Ones(k)};
    }

    std::size_t size() const { return static_cast<std::size_t>(means.size()); }

    Matrix transform(const Matrix& x) const {
        if (static_cast<std::size_t>(x.cols()) != size())
            throw DataError("attribute count mismatch in transform");
        return (x.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array();
    }

    Vector transform_row(const Eigen::Ref<const Vector>& x) const {
        if (static_cast<std::size_t>(x.size()) != size())
            throw DataError("attribute count mismatch in transform");
        return (x - means).array() / stds.array();
    }
};

inline ScalingParams fit_scaling(const Matrix& x) {
    const auto n = static_cast<double>(x.rows());
    ScalingParams p;
    p.means.resize(x.cols());
    p.stds.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const auto col = x.col(c);
        const bool constant = (col.array() == col[0]).all();
        const double mean = col.sum() / n;
        p.means[c] = constant ? col[0] : mean;
        const double var = (col.array() - mean).square().sum() / n;
        p.stds[c] = constant || var <= 0.0 ? 1.0 : std::sqrt(var);
    }
    return p;
}

inline std::pair<Dataset, ScalingParams> standardize(const Dataset& d) {
    ScalingParams p = fit_scaling(d.observations);
    Dataset out = d;
    out.observations = p.transform(d.observations);
    return {std::move(out), std::move(p)};
}

// ---------------------------------------------------------------------------
// Splits, folds, subsamples

inline std::vector<std::vector<std::size_t>> rows_by_class(const Dataset& d) {
    std::vector<std::vector<std::size_t>> by_class(d.classes());
    for (std::size_t i = 0; i < d.rows(); ++i)
        by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);
    return by_class;
}

struct SplitIndices {
    IndexSubset train;
    IndexSubset test;
};

/// Draws exactly `per_class_counts[c]` training rows of each class c without
/// replacement; the remaining rows form the test part. Classes absent from the
/// map contribute no training rows.
inline SplitIndices stratified_split_indices(const Dataset& d,
                                             const std::map<int, std::size_t>& per_class_counts,
                                             std::uint64_t seed) {
    const auto by_class = rows_by_class(d);
    for (const auto& [cls, count] : per_class_counts) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= d.classes())
            throw UsageError("unknown class index " + std::to_string(cls));
        if (count > by_class[static_cast<std::size_t>(cls)].size())
            throw UsageError("requested " + std::to_string(count) + " rows of class '" +
                             d.class_names[static_cast<std::size_t>(cls)] + "' but only " +
                             std::to_string(by_class[static_cast<std::size_t>(cls)].size()) +
                             " exist");
    }
    Rng rng(seed);
    std::vector<char> in_train(d.rows(), 0);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const auto it = per_class_counts.find(static_cast<int>(c));
        if (it == per_class_counts.end()) continue;
        for (auto pos : sample_without_replacement(rng, by_class[c].size(), it->second))
            in_train[by_class[c][pos]] = 1;
    }
    SplitIndices out;
    for (std::size_t i = 0; i < d.rows(); ++i) (in_train[i] ? out.train : out.test).push_back(i);
    return out;
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d,
                                                    const std::map<int, std::size_t>& per_class_counts,
                                                    std::uint64_t seed) {
    const auto s = stratified_split_indices(d, per_class_counts, seed);
    return {d.subset(s.train), d.subset(s.test)};
}

/// k stratified folds; pair i uses fold i as the test part. For k = 2 this is
/// the (A,B), (B,A) swap.
inline std::vector<SplitIndices> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw UsageError("k-fold needs k >= 2");
    auto by_class = rows_by_class(d);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < k)
            throw UsageError("class '" + d.class_names[c] + "' has " +
                             std::to_string(by_class[c].size()) + " members, fewer than k=" +
                             std::to_string(k));
    Rng rng(seed);
    std::vector<std::size_t> fold_of(d.rows());
    std::size_t cursor = 0;  // carried across classes so fold sizes stay balanced
    for (auto& members : by_class) {
        shuffle(rng, members);
        for (auto row : members) fold_of[row] = cursor++ % k;
    }
    std::vector<SplitIndices> out(k);
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? out[f].test : out[f].train).push_back(i);
    return out;
}

/// Subsample size: values in (0,1] are fractions of the rows available
/// (floored, minimum 1); larger values are absolute integer counts.
struct SubsampleSize {
    double value = 0.25;

    std::size_t resolve(std::size_t n) const {
        if (!(value > 0.0) || !std::isfinite(value)) throw UsageError("subsample size must be positive");
        if (value <= 1.0)
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(value * static_cast<double>(n))));
        if (value != std::floor(value)) throw UsageError("subsample counts above 1 must be integers");
        if (value > static_cast<double>(n))
            throw UsageError("subsample size " + std::to_string(static_cast<std::size_t>(value)) +
                             " exceeds " + std::to_string(n) + " rows");
        return static_cast<std::size_t>(value);
    }
};

inline IndexSubset subsample(std::size_t n, SubsampleSize eta, Rng& rng) {
    auto rows = sample_without_replacement(rng, n, eta.resolve(n));
    std::sort(rows.begin(), rows.end());
    return rows;
}

inline IndexSubset subsample(const Dataset& d, SubsampleSize eta, std::uint64_t seed) {
    Rng rng(seed);
    return subsample(d.rows(), eta, rng);
}

} // namespace rulens

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "discrim/csv.hpp"
#include "discrim/types.hpp"

namespace discrim {

// Column-role mapping for load_dataset. Features default to every column
// that is not the truth/prediction column and not excluded; an explicit
// include list narrows that set. File column order is preserved either way.
struct CsvSchema {
    std::string truth_column;
    std::string pred_column;
    std::vector<std::string> include_features; // empty = all remaining columns
    std::vector<std::string> exclude_features;
};

// Immutable after load. Feature values are stored per column so subset scans
// during the search touch contiguous memory.
struct LabeledDataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> columns; // columns[f][row]
    std::vector<std::uint8_t> truth;          // 1 = positive
    std::vector<std::uint8_t> base_pred;      // 1 = predicted positive
    std::int64_t rows_dropped = 0;            // rows removed for missing/non-numeric features

    std::size_t row_count() const { return truth.size(); }
    std::size_t feature_count() const { return columns.size(); }

    double value(std::size_t row, std::size_t feature) const {
        return columns[feature][row];
    }

    int feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

// Row indices the active mode may flip, with the per-row primary flag
// (FP in ReduceFP, FN in ImproveTP) precomputed for the scorers.
struct WorkingSubset {
    Mode mode = Mode::ReduceFP;
    std::vector<std::int32_t> rows;
    std::vector<std::uint8_t> is_primary; // aligned with rows
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// {0,1} and {"negative","positive"} are the only accepted labels.
inline std::uint8_t parse_label(const std::string& raw, const std::string& column,
                                std::size_t line) {
    const std::string s = trim(raw);
    if (s == "1" || s == "positive") return 1;
    if (s == "0" || s == "negative") return 0;
    throw SchemaError("bad label '" + raw + "' in column '" + column + "' at line " +
                      std::to_string(line));
}

// Full-token finite parse; anything else counts as missing.
inline bool parse_number(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) return false;
    return std::isfinite(out);
}

} // namespace detail

// Loads a header-bearing CSV and maps columns per the schema. Rows with a
// missing or non-numeric feature value are dropped and counted; bad labels
// on surviving rows are an error, never coerced.
inline LabeledDataset load_dataset(const std::string& path, const CsvSchema& schema) {
    auto reader = csv::Reader::from_file(path);

    std::vector<std::string> header;
    if (!reader.next(header)) throw DataError("zero usable rows in " + path);

    std::unordered_map<std::string, int> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto [it, inserted] = col_of.emplace(detail::trim(header[i]), static_cast<int>(i));
        if (!inserted) throw SchemaError("duplicate column name '" + it->first + "'");
    }

    auto require_column = [&](const std::string& name) {
        auto it = col_of.find(name);
        if (it == col_of.end()) throw SchemaError("column '" + name + "' not found in " + path);
        return it->second;
    };

    if (schema.truth_column == schema.pred_column)
        throw SchemaError("truth and prediction columns must differ");
    const int truth_col = require_column(schema.truth_column);
    const int pred_col = require_column(schema.pred_column);

    for (const auto& name : schema.exclude_features) require_column(name);
    std::vector<int> feature_cols;
    std::vector<std::string> feature_names;
    if (schema.include_features.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string name = detail::trim(header[i]);
            if (static_cast<int>(i) == truth_col || static_cast<int>(i) == pred_col) continue;
            if (std::find(schema.exclude_features.begin(), schema.exclude_features.end(),
                          name) != schema.exclude_features.end())
                continue;
            feature_cols.push_back(static_cast<int>(i));
            feature_names.push_back(name);
        }
    } else {
        std::vector<int> wanted;
        for (const auto& name : schema.include_features) {
            const int c = require_column(name);
            if (c == truth_col || c == pred_col)
                throw SchemaError("feature '" + name + "' is the truth/prediction column");
            wanted.push_back(c);
        }
        // keep file column order
        std::sort(wanted.begin(), wanted.end());
        wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
        for (int c : wanted) {
            feature_cols.push_back(c);
            feature_names.push_back(detail::trim(header[c]));
        }
    }
    if (feature_cols.empty()) throw SchemaError("schema selects no feature columns");

    LabeledDataset ds;
    ds.feature_names = feature_names;
    ds.columns.resize(feature_cols.size());

    std::vector<std::string> row;
    std::vector<double> values(feature_cols.size());
    while (reader.next(row)) {
        if (row.size() != header.size())
            throw SchemaError("row at line " + std::to_string(reader.line()) + " has " +
                              std::to_string(row.size()) + " fields, header has " +
                              std::to_string(header.size()));
        bool usable = true;
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            if (!detail::parse_number(row[feature_cols[f]], values[f])) {
                usable = false;
                break;
            }
        }
        if (!usable) {
            ++ds.rows_dropped;
            continue;
        }
        ds.truth.push_back(detail::parse_label(row[truth_col], schema.truth_column, reader.line()));
        ds.base_pred.push_back(detail::parse_label(row[pred_col], schema.pred_column, reader.line()));
        for (std::size_t f = 0; f < feature_cols.size(); ++f) ds.columns[f].push_back(values[f]);
    }

    if (ds.row_count() == 0) throw DataError("zero usable rows in " + path);
    return ds;
}

inline ConfusionCounts confusion_counts(const LabeledDataset& ds) {
    if (ds.row_count() == 0) throw DataError("dataset is empty");
    ConfusionCounts c;
    for (std::size_t i = 0; i < ds.row_count(); ++i) {
        if (ds.base_pred[i]) {
            (ds.truth[i] ? c.tp : c.fp)++;
        } else {
            (ds.truth[i] ? c.fn : c.tn)++;
        }
    }
    return c;
}

inline WorkingSubset working_subset(const LabeledDataset& ds, Mode mode) {
    if (ds.row_count() == 0) throw DataError("dataset is empty");
    WorkingSubset ws;
    ws.mode = mode;
    const std::uint8_t wanted_pred = mode == Mode::ReduceFP ? 1 : 0;
    for (std::size_t i = 0; i < ds.row_count(); ++i) {
        if (ds.base_pred[i] != wanted_pred) continue;
        ws.rows.push_back(static_cast<std::int32_t>(i));
        // primary = flip target: FP when clearing positives, FN when rescuing negatives
        const bool primary = mode == Mode::ReduceFP ? ds.truth[i] == 0 : ds.truth[i] == 1;
        ws.is_primary.push_back(primary ? 1 : 0);
    }
    if (ws.rows.empty())
        throw DataError(mode == Mode::ReduceFP
                            ? "working subset is empty: no base-predicted positives"
                            : "working subset is empty: no base-predicted negatives");
    return ws;
}

} // namespace discrim

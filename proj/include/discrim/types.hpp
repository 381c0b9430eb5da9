#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace discrim {

// Error categories map 1:1 onto CLI exit codes (see tools/).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Which side of the base classifier's output the miner is allowed to flip.
//   ReduceFP:  operate on predicted positives, flip matches to negative.
//   ImproveTP: operate on predicted negatives, flip matches to positive.
enum class Mode { ReduceFP, ImproveTP };

inline std::string to_string(Mode m) {
    return m == Mode::ReduceFP ? "reduce_fp" : "improve_tp";
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "reduce_fp" || s == "reduce-fp") return Mode::ReduceFP;
    if (s == "improve_tp" || s == "improve-tp") return Mode::ImproveTP;
    throw SchemaError("unknown mode: " + s);
}

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

enum class Comparator : std::uint8_t { Less, GreaterEqual };

inline std::string to_string(Comparator c) {
    return c == Comparator::Less ? "<" : ">=";
}

inline Comparator comparator_from_string(const std::string& s) {
    if (s == "<") return Comparator::Less;
    if (s == ">=") return Comparator::GreaterEqual;
    throw SchemaError("unknown comparator: " + s);
}

// One feature-threshold atom. A discrimination path is a conjunction of these.
struct Rule {
    int feature_index = -1;
    Comparator op = Comparator::Less;
    double threshold = 0.0;

    bool matches(double value) const {
        return op == Comparator::Less ? value < threshold : value >= threshold;
    }
};

// Flip outcome of a rule conjunction, measured against the *base* quadrant
// totals. Primary is the quadrant being emptied on purpose (FP in ReduceFP,
// FN in ImproveTP); secondary is the collateral quadrant (TP, TN).
struct DeltaMetrics {
    std::int64_t delta_primary_count = 0;
    std::int64_t delta_secondary_count = 0;
    double delta_primary_pct = 0.0;
    double delta_secondary_pct = 0.0;

    bool operator==(const DeltaMetrics&) const = default;
};

// Base-quadrant denominators for DeltaMetrics percentages.
struct QuadrantTotals {
    std::int64_t primary_total = 0;
    std::int64_t secondary_total = 0;
};

inline QuadrantTotals quadrant_totals(const ConfusionCounts& c, Mode mode) {
    if (mode == Mode::ReduceFP) return {c.fp, c.tp};
    return {c.fn, c.tn};
}

inline DeltaMetrics make_delta_metrics(std::int64_t primary_count,
                                       std::int64_t secondary_count,
                                       const QuadrantTotals& base) {
    DeltaMetrics dm;
    dm.delta_primary_count = primary_count;
    dm.delta_secondary_count = secondary_count;
    dm.delta_primary_pct =
        base.primary_total > 0
            ? static_cast<double>(primary_count) / static_cast<double>(base.primary_total)
            : 0.0;
    dm.delta_secondary_pct =
        base.secondary_total > 0
            ? static_cast<double>(secondary_count) / static_cast<double>(base.secondary_total)
            : 0.0;
    return dm;
}

} // namespace discrim

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "discrim/dataset.hpp"
#include "discrim/objective.hpp"
#include "discrim/search.hpp"
#include "discrim/types.hpp"

namespace discrim::oracle {

// Exact reference threshold search: sorts the points and evaluates both
// comparators at every midpoint between consecutive distinct values, plus
// the all-match rule. No histograms anywhere; this is the slow path the
// reduced-histogram scan is measured against.
inline ThresholdSearchResult brute_force_threshold(std::span<const double> values,
                                                   std::span<const std::uint8_t> is_primary,
                                                   const QuadrantTotals& base,
                                                   const ObjectiveConfig& cfg, int depth,
                                                   int feature_index = -1) {
    if (values.empty() || values.size() != is_primary.size())
        throw std::invalid_argument("bad oracle input");

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // distinct values with per-group class counts, ascending
    std::vector<double> distinct;
    std::vector<std::int64_t> group_p, group_s;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double v = values[order[k]];
        if (distinct.empty() || v != distinct.back()) {
            distinct.push_back(v);
            group_p.push_back(0);
            group_s.push_back(0);
        }
        (is_primary[order[k]] ? group_p.back() : group_s.back())++;
    }
    if (distinct.size() < 2) throw DataError("constant feature: zero-width value range");

    std::int64_t total_p = 0, total_s = 0;
    for (std::size_t g = 0; g < distinct.size(); ++g) {
        total_p += group_p[g];
        total_s += group_s[g];
    }

    ThresholdSearchResult best_any, best_ok;
    auto consider = [&](Comparator op, double threshold, std::int64_t cp, std::int64_t cs) {
        const Rule rule{feature_index, op, threshold};
        const DeltaMetrics dm = make_delta_metrics(cp, cs, base);
        const double score = objective_score(dm, cfg);
        const ThresholdSearchResult cand{rule, dm, score,
                                         satisfies_constraint(dm, depth, cfg), true};
        if (!best_any.valid || rule_candidate_better(score, rule, best_any.score, best_any.rule))
            best_any = cand;
        if (cand.satisfied &&
            (!best_ok.valid || rule_candidate_better(score, rule, best_ok.score, best_ok.rule)))
            best_ok = cand;
    };

    consider(Comparator::GreaterEqual, distinct.front(), total_p, total_s);
    std::int64_t left_p = 0, left_s = 0;
    for (std::size_t g = 1; g < distinct.size(); ++g) {
        left_p += group_p[g - 1];
        left_s += group_s[g - 1];
        double mid = distinct[g - 1] + (distinct[g] - distinct[g - 1]) / 2.0;
        if (!(mid > distinct[g - 1] && mid <= distinct[g])) mid = distinct[g]; // rounding collapse
        consider(Comparator::Less, mid, left_p, left_s);
        consider(Comparator::GreaterEqual, mid, total_p - left_p, total_s - left_s);
    }
    return best_ok.valid ? best_ok : best_any;
}

// Per-object reference for path application: counts the working-subset
// objects matching the whole conjunction, split by quadrant. An empty rule
// list matches nothing (identity), mirroring apply_path.
inline DeltaMetrics naive_apply(std::span<const Rule> rules, const LabeledDataset& ds,
                                Mode mode) {
    const QuadrantTotals base = quadrant_totals(confusion_counts(ds), mode);
    std::int64_t flipped_primary = 0, flipped_secondary = 0;
    if (!rules.empty()) {
        const std::uint8_t wanted_pred = mode == Mode::ReduceFP ? 1 : 0;
        for (std::size_t row = 0; row < ds.row_count(); ++row) {
            if (ds.base_pred[row] != wanted_pred) continue;
            bool all = true;
            for (const Rule& r : rules) {
                if (!r.matches(ds.value(row, static_cast<std::size_t>(r.feature_index)))) {
                    all = false;
                    break;
                }
            }
            if (!all) continue;
            const bool primary = mode == Mode::ReduceFP ? ds.truth[row] == 0 : ds.truth[row] == 1;
            (primary ? flipped_primary : flipped_secondary)++;
        }
    }
    return make_delta_metrics(flipped_primary, flipped_secondary, base);
}

} // namespace discrim::oracle

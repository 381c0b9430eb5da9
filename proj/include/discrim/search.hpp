#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "discrim/dataset.hpp"
#include "discrim/histogram.hpp"
#include "discrim/objective.hpp"
#include "discrim/parallel.hpp"
#include "discrim/types.hpp"

namespace discrim {

struct ThresholdSearchResult {
    Rule rule;
    DeltaMetrics metrics;
    double score = 0.0;
    bool satisfied = false; // against the constraint schedule at the search depth
    bool valid = false;
};

// Candidate ordering everywhere: higher score first, then lower threshold,
// then '<' before '>='. Keeps the whole pipeline deterministic.
inline bool rule_candidate_better(double score_a, const Rule& a, double score_b, const Rule& b) {
    if (score_a != score_b) return score_a > score_b;
    if (a.threshold != b.threshold) return a.threshold < b.threshold;
    return a.op == Comparator::Less && b.op == Comparator::GreaterEqual;
}

// Scans every candidate threshold of a prebuilt histogram with both
// comparators, plus the all-match rule (>= lowest edge), using cumulative
// counts so each candidate costs O(1). Prefers the best schedule-satisfying
// rule; falls back to the best overall flagged unsatisfied.
inline ThresholdSearchResult best_threshold_for_feature(const ReducedHistogram& h,
                                                        const QuadrantTotals& base,
                                                        const ObjectiveConfig& cfg,
                                                        int depth) {
    const CumulativeCounts cum = cumulative_counts(h);
    const std::int64_t subset_p = cum.primary.back();
    const std::int64_t subset_s = cum.secondary.back();

    ThresholdSearchResult best_any, best_ok;
    auto consider = [&](Comparator op, double threshold, std::int64_t cp, std::int64_t cs) {
        const Rule rule{h.feature_index, op, threshold};
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

    consider(Comparator::GreaterEqual, h.edges.front(), subset_p, subset_s);
    for (std::size_t i = 1; i < h.bin_count(); ++i) {
        const std::int64_t left_p = cum.primary[i - 1];
        const std::int64_t left_s = cum.secondary[i - 1];
        consider(Comparator::Less, h.edges[i], left_p, left_s);
        consider(Comparator::GreaterEqual, h.edges[i], subset_p - left_p, subset_s - left_s);
    }
    return best_ok.valid ? best_ok : best_any;
}

struct FeatureCandidate {
    int feature_index = -1;
    ThresholdSearchResult best;
};

// Evaluates every eligible feature on the given subset and returns the top-k
// by score (ties: lower feature index, then lower threshold). Constant and
// already-used features are skipped; the result may be shorter than k.
inline std::vector<FeatureCandidate> rank_features(const LabeledDataset& ds,
                                                   std::span<const std::int32_t> rows,
                                                   std::span<const std::uint8_t> is_primary,
                                                   const std::vector<std::uint8_t>& feature_used,
                                                   const ObjectiveConfig& cfg,
                                                   const HistogramConfig& hcfg,
                                                   const QuadrantTotals& base, int depth,
                                                   unsigned threads) {
    const std::size_t nf = ds.feature_count();
    std::vector<FeatureCandidate> slots(nf);

    parallel_for(threads, nf, [&](std::size_t f) {
        if (feature_used[f]) return;
        const auto& column = ds.columns[f];
        std::vector<double> values(rows.size());
        double lo = column[rows[0]], hi = lo;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double v = column[rows[i]];
            values[i] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) return; // constant on this subset
        const ReducedHistogram h =
            build_reduced_histogram(values, is_primary, hcfg, static_cast<int>(f));
        FeatureCandidate cand;
        cand.feature_index = static_cast<int>(f);
        cand.best = best_threshold_for_feature(h, base, cfg, depth);
        slots[f] = cand;
    });

    std::vector<FeatureCandidate> ranked;
    ranked.reserve(nf);
    for (auto& s : slots)
        if (s.feature_index >= 0 && s.best.valid) ranked.push_back(std::move(s));
    std::sort(ranked.begin(), ranked.end(), [](const FeatureCandidate& a, const FeatureCandidate& b) {
        if (a.best.score != b.best.score) return a.best.score > b.best.score;
        if (a.feature_index != b.feature_index) return a.feature_index < b.feature_index;
        return a.best.rule.threshold < b.best.rule.threshold;
    });
    if (ranked.size() > static_cast<std::size_t>(cfg.beam_width))
        ranked.resize(static_cast<std::size_t>(cfg.beam_width));
    return ranked;
}

// Rule levels run d = 0..D-1; the empty root sits outside the schedule at
// depth -1 and carries no rule or metrics.
struct SearchNode {
    int id = 0;
    int parent = -1;
    int depth = -1;
    Rule rule;
    DeltaMetrics metrics;
    double score = 0.0;
    bool satisfied_at_depth = false; // constraint schedule at this node's depth
    bool expanded = false;
};

struct SearchGraph {
    std::vector<SearchNode> nodes; // nodes[0] is the root; ids are indices
    ObjectiveConfig cfg;
    HistogramConfig hcfg;
    QuadrantTotals base_totals;

    std::size_t node_count() const { return nodes.size(); }
};

// Conjunction of rules from the first level down to one node, with that
// node's metrics. Every non-root node of the graph yields one path.
struct DiscriminationPath {
    int node_id = 0;
    int depth = 0; // 0-based level of the terminal node; rules.size() == depth + 1
    std::vector<Rule> rules;
    DeltaMetrics metrics;
    double score = 0.0;
    bool satisfied = false; // secondary delta strictly under the final budget
};

namespace detail {

struct SubsetView {
    std::vector<std::int32_t> rows;
    std::vector<std::uint8_t> is_primary;
};

inline void dfs_expand(const LabeledDataset& ds, SearchGraph& graph, int node_id,
                       const SubsetView& subset, std::vector<std::uint8_t>& feature_used,
                       unsigned threads) {
    const int child_depth = graph.nodes[node_id].depth + 1;
    if (child_depth >= graph.cfg.total_depth) return;

    const auto ranked = rank_features(ds, subset.rows, subset.is_primary, feature_used,
                                      graph.cfg, graph.hcfg, graph.base_totals, child_depth,
                                      threads);
    if (ranked.empty()) return;
    graph.nodes[node_id].expanded = true;

    std::vector<int> child_ids;
    child_ids.reserve(ranked.size());
    for (const auto& cand : ranked) {
        SearchNode node;
        node.id = static_cast<int>(graph.nodes.size());
        node.parent = node_id;
        node.depth = child_depth;
        node.rule = cand.best.rule;
        node.metrics = cand.best.metrics;
        node.score = cand.best.score;
        node.satisfied_at_depth = cand.best.satisfied;
        child_ids.push_back(node.id);
        graph.nodes.push_back(node);
    }

    for (std::size_t c = 0; c < ranked.size(); ++c) {
        const auto& cand = ranked[c];
        const int cid = child_ids[c];
        // schedule violation prunes expansion; the node stays recorded
        if (!cand.best.satisfied) continue;
        if (child_depth + 1 >= graph.cfg.total_depth) continue;
        const std::int64_t cp = cand.best.metrics.delta_primary_count;
        const std::int64_t cs = cand.best.metrics.delta_secondary_count;
        if (cp + cs == 0 || cp == 0 || cs == 0) continue; // empty or one-class

        SubsetView child;
        child.rows.reserve(static_cast<std::size_t>(cp + cs));
        const auto& column = ds.columns[cand.feature_index];
        for (std::size_t i = 0; i < subset.rows.size(); ++i) {
            if (!cand.best.rule.matches(column[subset.rows[i]])) continue;
            child.rows.push_back(subset.rows[i]);
            child.is_primary.push_back(subset.is_primary[i]);
        }
        assert(static_cast<std::int64_t>(child.rows.size()) == cp + cs);

        feature_used[cand.feature_index] = 1;
        dfs_expand(ds, graph, cid, child, feature_used, threads);
        feature_used[cand.feature_index] = 0;
    }
}

} // namespace detail

// Depth-first construction of the full search graph: the root expands into
// the top-k features, every schedule-satisfying mixed-subset node expands
// recursively on its rule-filtered subset, down to total_depth levels.
// A feature appears at most once along any single path.
inline SearchGraph dfs_search(const LabeledDataset& ds, const ObjectiveConfig& cfg,
                              const HistogramConfig& hcfg, unsigned threads = 1) {
    cfg.validate();
    hcfg.validate();

    SearchGraph graph;
    graph.cfg = cfg;
    graph.hcfg = hcfg;
    graph.base_totals = quadrant_totals(confusion_counts(ds), cfg.mode);
    graph.nodes.push_back(SearchNode{}); // empty root, depth -1

    const WorkingSubset ws = working_subset(ds, cfg.mode);
    detail::SubsetView root_subset{ws.rows, ws.is_primary};
    std::vector<std::uint8_t> feature_used(ds.feature_count(), 0);
    detail::dfs_expand(ds, graph, 0, root_subset, feature_used, threads);
    return graph;
}

// One path per non-root node, ranked by score (ties: terminal rule's feature
// index, then threshold, then node id). The satisfied flag checks the
// final-depth budget regardless of the node's depth.
inline std::vector<DiscriminationPath> enumerate_paths(const SearchGraph& graph) {
    std::vector<DiscriminationPath> paths;
    paths.reserve(graph.nodes.size() > 0 ? graph.nodes.size() - 1 : 0);
    for (std::size_t i = 1; i < graph.nodes.size(); ++i) {
        const SearchNode& node = graph.nodes[i];
        DiscriminationPath p;
        p.node_id = node.id;
        p.depth = node.depth;
        p.metrics = node.metrics;
        p.score = node.score;
        p.satisfied = satisfies_final_budget(node.metrics, graph.cfg);
        for (int cur = node.id; cur != 0; cur = graph.nodes[cur].parent)
            p.rules.push_back(graph.nodes[cur].rule);
        std::reverse(p.rules.begin(), p.rules.end());
        paths.push_back(std::move(p));
    }
    std::sort(paths.begin(), paths.end(), [](const DiscriminationPath& a, const DiscriminationPath& b) {
        if (a.score != b.score) return a.score > b.score;
        const Rule& ra = a.rules.back();
        const Rule& rb = b.rules.back();
        if (ra.feature_index != rb.feature_index) return ra.feature_index < rb.feature_index;
        if (ra.threshold != rb.threshold) return ra.threshold < rb.threshold;
        return a.node_id < b.node_id;
    });
    return paths;
}

// Highest-score path that meets the final budget; if none does, the highest
// score overall (its satisfied flag already says so).
inline const DiscriminationPath& select_optimal_path(std::span<const DiscriminationPath> paths) {
    if (paths.empty()) throw DataError("no candidate paths");
    for (const auto& p : paths)
        if (p.satisfied) return p;
    return paths.front();
}

struct MineResult {
    SearchGraph graph;
    std::vector<DiscriminationPath> paths;   // ranked
    std::optional<std::size_t> selected;     // index into paths
    ConfusionCounts base;
};

inline MineResult mine_dataset(const LabeledDataset& ds, const ObjectiveConfig& cfg,
                               const HistogramConfig& hcfg, unsigned threads = 1) {
    MineResult r;
    r.base = confusion_counts(ds);
    r.graph = dfs_search(ds, cfg, hcfg, threads);
    r.paths = enumerate_paths(r.graph);
    if (!r.paths.empty()) {
        const DiscriminationPath& sel = select_optimal_path(r.paths);
        r.selected = static_cast<std::size_t>(&sel - r.paths.data());
    }
    return r;
}

inline AlphaOutcome mine_outcome(const MineResult& r) {
    AlphaOutcome out;
    if (!r.selected) return out;
    const DiscriminationPath& p = r.paths[*r.selected];
    out.has_path = true;
    out.satisfied = p.satisfied;
    out.primary_pct = p.metrics.delta_primary_pct;
    out.secondary_pct = p.metrics.delta_secondary_pct;
    return out;
}

// mine_dataset across an alpha' ladder, selected per tune_alpha's rule.
inline TunedResult<MineResult> mine_tuned(const LabeledDataset& ds, ObjectiveConfig cfg,
                                          const HistogramConfig& hcfg,
                                          std::span<const double> ladder,
                                          unsigned threads = 1) {
    return tune_alpha(
        [&](double alpha) {
            cfg.alpha_prime = alpha;
            return mine_dataset(ds, cfg, hcfg, threads);
        },
        [](const MineResult& r) { return mine_outcome(r); }, ladder);
}

} // namespace discrim

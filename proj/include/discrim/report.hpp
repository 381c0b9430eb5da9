#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "discrim/dataset.hpp"
#include "discrim/objective.hpp"
#include "discrim/search.hpp"
#include "discrim/types.hpp"

namespace discrim {

// One row of the per-depth trace of the selected path (node per level with
// its recorded conjunction metrics).
struct TraceRow {
    int node_id = 0;
    int depth = 0;
    std::int64_t primary_count = 0;
    double primary_pct = 0.0;
    std::int64_t secondary_count = 0;
    double secondary_pct = 0.0;
};

// Everything a mine run produces. Percentages are stored as exact count
// ratios; 2-decimal formatting happens only at render time. wall_seconds and
// peak_rss_kb are console-only: they never enter the serialized report, so
// identical inputs give byte-identical files.
struct SearchReport {
    Mode mode = Mode::ReduceFP;
    double alpha_prime = 1.0;
    double target = 1.0;
    double constraint = 0.0;
    double delta_max = 0.0;
    int total_depth = 3;
    int beam_width = 3;
    int fine_bins = 256;
    double p_pure = 0.99;
    int min_bin_count = 1;

    bool alpha_tuned = false;
    std::vector<double> alpha_ladder;
    bool tuned_satisfied = true;

    ConfusionCounts base;
    std::vector<std::string> feature_names;
    std::size_t node_count = 0;
    std::vector<DiscriminationPath> paths;
    std::optional<std::size_t> selected; // index into paths
    std::vector<TraceRow> trace;

    double wall_seconds = 0.0; // not serialized
    long peak_rss_kb = -1;     // not serialized
};

inline std::string format_pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

// Revised per-object predictions: working-subset objects matching the whole
// conjunction flip; everything else keeps the base prediction. An empty rule
// list is the identity.
inline std::vector<std::uint8_t> apply_path(std::span<const Rule> rules,
                                            const LabeledDataset& ds, Mode mode) {
    for (const Rule& r : rules)
        if (r.feature_index < 0 || static_cast<std::size_t>(r.feature_index) >= ds.feature_count())
            throw SchemaError("rule references feature index " + std::to_string(r.feature_index) +
                              " outside the dataset");
    std::vector<std::uint8_t> revised(ds.base_pred.begin(), ds.base_pred.end());
    if (rules.empty()) return revised;
    const std::uint8_t wanted_pred = mode == Mode::ReduceFP ? 1 : 0;
    const std::uint8_t flipped_to = wanted_pred ? 0 : 1;
    for (std::size_t row = 0; row < ds.row_count(); ++row) {
        if (ds.base_pred[row] != wanted_pred) continue;
        bool all = true;
        for (const Rule& r : rules) {
            if (!r.matches(ds.value(row, static_cast<std::size_t>(r.feature_index)))) {
                all = false;
                break;
            }
        }
        if (all) revised[row] = flipped_to;
    }
    return revised;
}

inline ConfusionCounts confusion_of(std::span<const std::uint8_t> truth,
                                    std::span<const std::uint8_t> pred) {
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i]) {
            (truth[i] ? c.tp : c.fp)++;
        } else {
            (truth[i] ? c.fn : c.tn)++;
        }
    }
    return c;
}

// One row per ancestor level of the selected path, from the first rule level
// down to the terminal node, using each node's recorded metrics.
inline std::vector<TraceRow> depth_trace(const SearchGraph& graph, int terminal_node_id) {
    if (terminal_node_id <= 0 || static_cast<std::size_t>(terminal_node_id) >= graph.nodes.size())
        throw std::invalid_argument("terminal node not in graph");
    std::vector<TraceRow> rows;
    for (int cur = terminal_node_id; cur != 0; cur = graph.nodes[cur].parent) {
        const SearchNode& n = graph.nodes[cur];
        rows.push_back(TraceRow{n.id, n.depth, n.metrics.delta_primary_count,
                                n.metrics.delta_primary_pct, n.metrics.delta_secondary_count,
                                n.metrics.delta_secondary_pct});
    }
    std::reverse(rows.begin(), rows.end());
    return rows;
}

inline SearchReport make_report(const MineResult& mined, const LabeledDataset& ds,
                                const ObjectiveConfig& cfg, const HistogramConfig& hcfg) {
    SearchReport rep;
    rep.mode = cfg.mode;
    rep.alpha_prime = cfg.alpha_prime;
    rep.target = cfg.target;
    rep.constraint = cfg.constraint;
    rep.delta_max = cfg.effective_delta_max();
    rep.total_depth = cfg.total_depth;
    rep.beam_width = cfg.beam_width;
    rep.fine_bins = hcfg.fine_bins;
    rep.p_pure = hcfg.p_pure;
    rep.min_bin_count = hcfg.min_bin_count;
    rep.base = mined.base;
    rep.feature_names = ds.feature_names;
    rep.node_count = mined.graph.node_count();
    rep.paths = mined.paths;
    rep.selected = mined.selected;
    if (mined.selected)
        rep.trace = depth_trace(mined.graph, mined.paths[*mined.selected].node_id);
    return rep;
}

namespace detail {

inline nlohmann::ordered_json rule_to_json(const Rule& r,
                                           const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["feature"] = static_cast<std::size_t>(r.feature_index) < names.size()
                       ? names[r.feature_index]
                       : std::to_string(r.feature_index);
    j["index"] = r.feature_index;
    j["op"] = to_string(r.op);
    j["threshold"] = r.threshold;
    return j;
}

inline std::string render_rules(std::span<const Rule> rules,
                                const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (i) out += " & ";
        const Rule& r = rules[i];
        const std::string name = static_cast<std::size_t>(r.feature_index) < names.size()
                                     ? names[r.feature_index]
                                     : "f" + std::to_string(r.feature_index);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g", r.threshold);
        out += name + " " + to_string(r.op) + " " + buf;
    }
    return out;
}

} // namespace detail

inline std::string emit_report_json(const SearchReport& rep) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = 1;
    j["mode"] = to_string(rep.mode);
    j["config"] = ordered_json{{"alpha_prime", rep.alpha_prime},
                               {"target", rep.target},
                               {"constraint", rep.constraint},
                               {"delta_max", rep.delta_max},
                               {"total_depth", rep.total_depth},
                               {"beam_width", rep.beam_width},
                               {"fine_bins", rep.fine_bins},
                               {"p_pure", rep.p_pure},
                               {"min_bin_count", rep.min_bin_count}};
    j["alpha"] = ordered_json{{"tuned", rep.alpha_tuned},
                              {"ladder", rep.alpha_ladder},
                              {"satisfied", rep.tuned_satisfied}};
    j["base_confusion"] = ordered_json{
        {"tp", rep.base.tp}, {"fp", rep.base.fp}, {"tn", rep.base.tn}, {"fn", rep.base.fn}};
    j["feature_names"] = rep.feature_names;
    j["node_count"] = rep.node_count;
    if (rep.selected)
        j["selected_rank"] = *rep.selected + 1;
    else
        j["selected_rank"] = nullptr;

    ordered_json trace = ordered_json::array();
    for (const TraceRow& row : rep.trace) {
        trace.push_back(ordered_json{{"node_id", row.node_id},
                                     {"depth", row.depth},
                                     {"primary_count", row.primary_count},
                                     {"primary_pct", row.primary_pct},
                                     {"secondary_count", row.secondary_count},
                                     {"secondary_pct", row.secondary_pct}});
    }
    j["depth_trace"] = std::move(trace);

    ordered_json paths = ordered_json::array();
    for (std::size_t i = 0; i < rep.paths.size(); ++i) {
        const DiscriminationPath& p = rep.paths[i];
        ordered_json rules = ordered_json::array();
        for (const Rule& r : p.rules) rules.push_back(detail::rule_to_json(r, rep.feature_names));
        paths.push_back(ordered_json{{"rank", i + 1},
                                     {"node_id", p.node_id},
                                     {"depth", p.depth},
                                     {"rules", std::move(rules)},
                                     {"delta_primary_count", p.metrics.delta_primary_count},
                                     {"delta_primary_pct", p.metrics.delta_primary_pct},
                                     {"delta_secondary_count", p.metrics.delta_secondary_count},
                                     {"delta_secondary_pct", p.metrics.delta_secondary_pct},
                                     {"score", p.score},
                                     {"satisfied", p.satisfied}});
    }
    j["paths"] = std::move(paths);
    return j.dump(2) + "\n";
}

inline SearchReport parse_report_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed report: ") + e.what());
    }
    try {
        SearchReport rep;
        rep.mode = mode_from_string(j.at("mode").get<std::string>());
        const auto& cfg = j.at("config");
        rep.alpha_prime = cfg.at("alpha_prime").get<double>();
        rep.target = cfg.at("target").get<double>();
        rep.constraint = cfg.at("constraint").get<double>();
        rep.delta_max = cfg.at("delta_max").get<double>();
        rep.total_depth = cfg.at("total_depth").get<int>();
        rep.beam_width = cfg.at("beam_width").get<int>();
        rep.fine_bins = cfg.at("fine_bins").get<int>();
        rep.p_pure = cfg.at("p_pure").get<double>();
        rep.min_bin_count = cfg.at("min_bin_count").get<int>();
        const auto& alpha = j.at("alpha");
        rep.alpha_tuned = alpha.at("tuned").get<bool>();
        rep.alpha_ladder = alpha.at("ladder").get<std::vector<double>>();
        rep.tuned_satisfied = alpha.at("satisfied").get<bool>();
        const auto& base = j.at("base_confusion");
        rep.base = ConfusionCounts{base.at("tp").get<std::int64_t>(), base.at("fp").get<std::int64_t>(),
                                   base.at("tn").get<std::int64_t>(), base.at("fn").get<std::int64_t>()};
        rep.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        rep.node_count = j.at("node_count").get<std::size_t>();
        if (!j.at("selected_rank").is_null())
            rep.selected = j.at("selected_rank").get<std::size_t>() - 1;
        for (const auto& row : j.at("depth_trace")) {
            rep.trace.push_back(TraceRow{row.at("node_id").get<int>(), row.at("depth").get<int>(),
                                         row.at("primary_count").get<std::int64_t>(),
                                         row.at("primary_pct").get<double>(),
                                         row.at("secondary_count").get<std::int64_t>(),
                                         row.at("secondary_pct").get<double>()});
        }
        for (const auto& pj : j.at("paths")) {
            DiscriminationPath p;
            p.node_id = pj.at("node_id").get<int>();
            p.depth = pj.at("depth").get<int>();
            for (const auto& rj : pj.at("rules")) {
                Rule r;
                r.feature_index = rj.at("index").get<int>();
                r.op = comparator_from_string(rj.at("op").get<std::string>());
                r.threshold = rj.at("threshold").get<double>();
                p.rules.push_back(r);
            }
            p.metrics.delta_primary_count = pj.at("delta_primary_count").get<std::int64_t>();
            p.metrics.delta_primary_pct = pj.at("delta_primary_pct").get<double>();
            p.metrics.delta_secondary_count = pj.at("delta_secondary_count").get<std::int64_t>();
            p.metrics.delta_secondary_pct = pj.at("delta_secondary_pct").get<double>();
            p.score = pj.at("score").get<double>();
            p.satisfied = pj.at("satisfied").get<bool>();
            rep.paths.push_back(std::move(p));
        }
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed report: ") + e.what());
    }
}

// Table-style rendering: legend, selected-path level trace, ranked list.
// Levels print 1-based; the JSON keeps the library's 0-based depths.
inline std::string emit_report_text(const SearchReport& rep) {
    std::string out;
    char buf[256];
    const bool rfp = rep.mode == Mode::ReduceFP;
    const char* primary_label = rfp ? "FP cleared" : "FN rescued";
    const char* secondary_label = rfp ? "TP lost" : "TN flipped";

    std::snprintf(buf, sizeof(buf),
                  "mode=%s alpha'=%g delta_max=%s depth=%d beam=%d fine_bins=%d p_pure=%g\n",
                  to_string(rep.mode).c_str(), rep.alpha_prime,
                  format_pct(rep.delta_max).c_str(), rep.total_depth, rep.beam_width,
                  rep.fine_bins, rep.p_pure);
    out += buf;
    if (rep.alpha_tuned) {
        out += "alpha' tuned over {";
        for (std::size_t i = 0; i < rep.alpha_ladder.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s%g", i ? ", " : "", rep.alpha_ladder[i]);
            out += buf;
        }
        out += rep.tuned_satisfied ? "}\n" : "} (no candidate satisfied the budget)\n";
    }
    std::snprintf(buf, sizeof(buf), "base confusion: tp=%lld fp=%lld tn=%lld fn=%lld\n",
                  static_cast<long long>(rep.base.tp), static_cast<long long>(rep.base.fp),
                  static_cast<long long>(rep.base.tn), static_cast<long long>(rep.base.fn));
    out += buf;
    std::snprintf(buf, sizeof(buf), "graph: %zu nodes, %zu candidate paths\n", rep.node_count,
                  rep.paths.size());
    out += buf;

    if (rep.selected) {
        const DiscriminationPath& sel = rep.paths[*rep.selected];
        std::snprintf(buf, sizeof(buf), "\nselected path (rank %zu, node %d, %s):\n  %s\n",
                      *rep.selected + 1, sel.node_id,
                      sel.satisfied ? "satisfied" : "UNSATISFIED",
                      detail::render_rules(sel.rules, rep.feature_names).c_str());
        out += buf;
        std::snprintf(buf, sizeof(buf), "\n%-6s %-6s %12s %10s %12s %10s\n", "node", "level",
                      primary_label, "primary%", secondary_label, "secondary%");
        out += buf;
        for (const TraceRow& row : rep.trace) {
            std::snprintf(buf, sizeof(buf), "%-6d %-6d %12lld %10s %12lld %10s\n", row.node_id,
                          row.depth + 1, static_cast<long long>(row.primary_count),
                          format_pct(row.primary_pct).c_str(),
                          static_cast<long long>(row.secondary_count),
                          format_pct(row.secondary_pct).c_str());
            out += buf;
        }
    } else {
        out += "\nno candidate paths\n";
    }

    std::snprintf(buf, sizeof(buf), "\n%-5s %-6s %-6s %10s %10s %10s %-5s %s\n", "rank", "node",
                  "level", "score", "primary%", "secondary%", "ok", "rules");
    out += buf;
    for (std::size_t i = 0; i < rep.paths.size(); ++i) {
        const DiscriminationPath& p = rep.paths[i];
        std::snprintf(buf, sizeof(buf), "%-5zu %-6d %-6d %10.6f %10s %10s %-5s ", i + 1,
                      p.node_id, p.depth + 1, p.score, format_pct(p.metrics.delta_primary_pct).c_str(),
                      format_pct(p.metrics.delta_secondary_pct).c_str(), p.satisfied ? "yes" : "no");
        out += buf;
        out += detail::render_rules(p.rules, rep.feature_names);
        out += '\n';
    }
    return out;
}

inline void emit_report(const SearchReport& rep, const std::string& format, std::ostream& os) {
    if (format == "json")
        os << emit_report_json(rep);
    else if (format == "text")
        os << emit_report_text(rep);
    else
        throw std::invalid_argument("unknown report format: " + format);
}

} // namespace discrim

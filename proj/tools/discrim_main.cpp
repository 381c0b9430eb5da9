// discrim: mines ranked feature-threshold rule paths that post-process a
// base binary classifier: purge false positives under a bounded TP loss, or
// rescue false negatives under a bounded FP gain.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <sys/resource.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "discrim/discrim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitSchema = 3;
constexpr int kExitData = 4;

long peak_rss_kb() {
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return -1;
    return ru.ru_maxrss; // KiB on Linux
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw discrim::IoError("cannot write to " + tmp);
        out << content;
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw discrim::IoError("short write to " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw discrim::IoError("cannot move report into place at " + path);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw discrim::IoError("cannot open file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

unsigned resolve_threads(int flag_value) {
    if (flag_value > 0) return static_cast<unsigned>(flag_value);
    if (const char* env = std::getenv("DISCRIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return discrim::default_thread_count();
}

struct SchemaFlags {
    std::string input;
    std::string truth_column;
    std::string pred_column;
    std::vector<std::string> include;
    std::vector<std::string> exclude;

    void attach(CLI::App* cmd) {
        cmd->add_option("-i,--input", input, "input CSV (header row required)")->required();
        cmd->add_option("--truth", truth_column, "ground-truth column name")->required();
        cmd->add_option("--pred", pred_column, "base-classifier prediction column name")->required();
        cmd->add_option("--features", include,
                        "feature columns to use (default: all remaining columns)")
            ->delimiter(',');
        cmd->add_option("--exclude", exclude, "feature columns to drop")->delimiter(',');
    }

    discrim::LabeledDataset load() const {
        discrim::CsvSchema schema{truth_column, pred_column, include, exclude};
        return discrim::load_dataset(input, schema);
    }
};

void dump_histograms(const std::string& path, const discrim::LabeledDataset& ds,
                     discrim::Mode mode, const discrim::HistogramConfig& hcfg) {
    const auto ws = discrim::working_subset(ds, mode);
    nlohmann::ordered_json j;
    j["mode"] = discrim::to_string(mode);
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < ds.feature_count(); ++f) {
        std::vector<double> values(ws.rows.size());
        for (std::size_t i = 0; i < ws.rows.size(); ++i) values[i] = ds.value(ws.rows[i], f);
        nlohmann::ordered_json fj;
        fj["feature"] = ds.feature_names[f];
        try {
            const auto h =
                discrim::build_reduced_histogram(values, ws.is_primary, hcfg, static_cast<int>(f));
            fj["edges"] = h.edges;
            fj["primary_counts"] = h.primary_counts;
            fj["secondary_counts"] = h.secondary_counts;
        } catch (const discrim::DataError&) {
            fj["constant"] = true;
        }
        features.push_back(std::move(fj));
    }
    j["features"] = std::move(features);
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<discrim::Rule> rules_from_json(const nlohmann::json& doc,
                                           const discrim::LabeledDataset& ds,
                                           std::optional<int> rank) {
    const nlohmann::json* rule_list = nullptr;
    if (doc.is_array()) {
        rule_list = &doc;
    } else if (doc.contains("paths")) {
        const auto& paths = doc.at("paths");
        std::size_t index = 0;
        if (rank) {
            if (*rank < 1 || static_cast<std::size_t>(*rank) > paths.size())
                throw discrim::SchemaError("path rank out of range");
            index = static_cast<std::size_t>(*rank) - 1;
        } else if (doc.contains("selected_rank") && !doc.at("selected_rank").is_null()) {
            index = doc.at("selected_rank").get<std::size_t>() - 1;
        } else if (paths.empty()) {
            return {};
        }
        rule_list = &paths.at(index).at("rules");
    } else if (doc.contains("rules")) {
        rule_list = &doc.at("rules");
    } else {
        throw discrim::SchemaError("rules file has neither 'rules' nor 'paths'");
    }

    std::vector<discrim::Rule> rules;
    for (const auto& rj : *rule_list) {
        discrim::Rule r;
        const std::string name = rj.at("feature").get<std::string>();
        r.feature_index = ds.feature_index(name);
        if (r.feature_index < 0)
            throw discrim::SchemaError("unknown feature name in rules: " + name);
        r.op = discrim::comparator_from_string(rj.at("op").get<std::string>());
        r.threshold = rj.at("threshold").get<double>();
        rules.push_back(r);
    }
    return rules;
}

int run_mine(const SchemaFlags& schema, const std::string& mode_str, double delta_max,
             std::optional<double> alpha, std::vector<double> ladder, double target, int depth,
             int beam, int fine_bins, double p_pure, int min_bin_count, const std::string& out,
             const std::string& format, int threads_flag, const std::string& dump_hist_path,
             bool verbose) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();

    discrim::ObjectiveConfig cfg;
    cfg.mode = discrim::mode_from_string(mode_str);
    cfg.target = target;
    cfg.constraint = delta_max;
    cfg.delta_max = delta_max;
    cfg.total_depth = depth;
    cfg.beam_width = beam;
    cfg.alpha_prime = alpha.value_or(1.0);
    cfg.validate();

    discrim::HistogramConfig hcfg;
    hcfg.fine_bins = fine_bins;
    hcfg.p_pure = p_pure;
    hcfg.min_bin_count = min_bin_count;
    hcfg.validate();

    const unsigned threads = resolve_threads(threads_flag);
    const auto ds = schema.load();
    if (verbose)
        std::cout << "loaded " << ds.row_count() << " rows, " << ds.feature_count()
                  << " features (" << ds.rows_dropped << " rows dropped)\n";

    if (!dump_hist_path.empty()) dump_histograms(dump_hist_path, ds, cfg.mode, hcfg);

    discrim::SearchReport rep;
    if (alpha) {
        const auto mined = discrim::mine_dataset(ds, cfg, hcfg, threads);
        rep = discrim::make_report(mined, ds, cfg, hcfg);
    } else {
        if (ladder.empty()) ladder = discrim::default_alpha_ladder();
        auto tuned = discrim::mine_tuned(ds, cfg, hcfg, ladder, threads);
        cfg.alpha_prime = tuned.alpha_prime;
        rep = discrim::make_report(tuned.result, ds, cfg, hcfg);
        rep.alpha_tuned = true;
        rep.alpha_ladder = ladder;
        rep.tuned_satisfied = tuned.satisfied;
    }

    const std::string serialized =
        format == "json" ? discrim::emit_report_json(rep) : discrim::emit_report_text(rep);
    if (out.empty() || out == "-") {
        std::cout << serialized;
    } else {
        write_file_atomic(out, serialized);
    }

    rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rep.peak_rss_kb = peak_rss_kb();
    std::fprintf(stdout, "mined %zu paths over %zu nodes in %.3f s (peak rss %.1f MB)\n",
                 rep.paths.size(), rep.node_count, rep.wall_seconds,
                 rep.peak_rss_kb > 0 ? rep.peak_rss_kb / 1024.0 : 0.0);
    if (rep.selected) {
        const auto& sel = rep.paths[*rep.selected];
        std::cout << "optimal path (node " << sel.node_id << ", "
                  << (sel.satisfied ? "satisfied" : "UNSATISFIED")
                  << "): primary " << discrim::format_pct(sel.metrics.delta_primary_pct)
                  << ", secondary " << discrim::format_pct(sel.metrics.delta_secondary_pct)
                  << ", score " << sel.score << "\n";
    }
    return kExitOk;
}

int run_apply(const SchemaFlags& schema, const std::string& mode_str,
              const std::string& rules_path, std::optional<int> rank, const std::string& out) {
    const auto mode = discrim::mode_from_string(mode_str);
    const auto ds = schema.load();

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(rules_path));
    } catch (const nlohmann::json::exception& e) {
        throw discrim::SchemaError(std::string("malformed rules file: ") + e.what());
    }
    std::vector<discrim::Rule> rules;
    try {
        rules = rules_from_json(doc, ds, rank);
    } catch (const nlohmann::json::exception& e) {
        throw discrim::SchemaError(std::string("malformed rules file: ") + e.what());
    }

    const auto revised = discrim::apply_path(rules, ds, mode);

    std::string csv = "object_id,base_pred,new_pred\n";
    for (std::size_t i = 0; i < revised.size(); ++i) {
        csv += std::to_string(i);
        csv += ',';
        csv += ds.base_pred[i] ? '1' : '0';
        csv += ',';
        csv += revised[i] ? '1' : '0';
        csv += '\n';
    }
    if (out.empty() || out == "-") {
        std::cout << csv;
    } else {
        write_file_atomic(out, csv);
    }

    const auto before = discrim::confusion_counts(ds);
    const auto after = discrim::confusion_of(ds.truth, revised);
    std::fprintf(stdout, "confusion before: tp=%lld fp=%lld tn=%lld fn=%lld\n",
                 static_cast<long long>(before.tp), static_cast<long long>(before.fp),
                 static_cast<long long>(before.tn), static_cast<long long>(before.fn));
    std::fprintf(stdout, "confusion after:  tp=%lld fp=%lld tn=%lld fn=%lld\n",
                 static_cast<long long>(after.tp), static_cast<long long>(after.fp),
                 static_cast<long long>(after.tn), static_cast<long long>(after.fn));
    return kExitOk;
}

int run_report(const std::string& report_path) {
    const auto rep = discrim::parse_report_json(read_file(report_path));
    std::cout << discrim::emit_report_text(rep);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrim: threshold-rule path mining to post-process a binary classifier"};
    app.require_subcommand(1);

    // mine
    auto* mine = app.add_subcommand("mine", "search ranked discrimination paths on labeled data");
    SchemaFlags mine_schema;
    mine_schema.attach(mine);
    std::string mine_mode = "reduce_fp";
    double delta_max = 0.0;
    std::optional<double> alpha;
    std::vector<double> ladder;
    double target = 1.0;
    int depth = 3, beam = 3, fine_bins = 256, min_bin_count = 1, threads_flag = 0;
    double p_pure = 0.99;
    std::string mine_out, mine_format = "json", dump_hist;
    bool verbose = false;
    mine->add_option("--mode", mine_mode, "reduce_fp (purge FP) or improve_tp (rescue FN)")
        ->check(CLI::IsMember({"reduce_fp", "improve_tp"}))
        ->capture_default_str();
    mine->add_option("--delta-max", delta_max,
                     "secondary-metric budget as a fraction, e.g. 0.03 (required)")
        ->required();
    mine->add_option("--alpha", alpha, "fixed alpha' weight; omit to tune over the ladder");
    mine->add_option("--alpha-ladder", ladder,
                     "alpha' candidates to tune over (default 0.25,0.5,1,2,4)")
        ->delimiter(',');
    mine->add_option("--target", target, "primary-metric target fraction")->capture_default_str();
    mine->add_option("-D,--depth", depth, "total graph depth")->capture_default_str();
    mine->add_option("-k,--beam", beam, "child nodes per parent")->capture_default_str();
    mine->add_option("--fine-bins", fine_bins, "fine grid bins per feature histogram")
        ->capture_default_str();
    mine->add_option("--p-pure", p_pure, "bin-merge purity threshold")->capture_default_str();
    mine->add_option("--min-bin-count", min_bin_count, "objects per fine bin before merging")
        ->capture_default_str();
    mine->add_option("-o,--out", mine_out, "report destination (default: stdout)");
    mine->add_option("--format", mine_format, "report format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    mine->add_option("-t,--threads", threads_flag,
                     "worker threads (default: DISCRIM_THREADS env or all cores)");
    mine->add_option("--dump-histograms", dump_hist,
                     "write the root-level reduced histograms to this JSON file");
    mine->add_flag("-v,--verbose", verbose, "print load statistics");

    // apply
    auto* apply = app.add_subcommand("apply", "apply a mined rule path to a dataset");
    SchemaFlags apply_schema;
    apply_schema.attach(apply);
    std::string apply_mode = "reduce_fp";
    std::string rules_path, apply_out;
    std::optional<int> rank;
    apply->add_option("--mode", apply_mode, "reduce_fp or improve_tp")
        ->check(CLI::IsMember({"reduce_fp", "improve_tp"}))
        ->capture_default_str();
    apply->add_option("--rules", rules_path,
                      "JSON rules: a mine report, {\"rules\": [...]}, or a bare rule array")
        ->required();
    apply->add_option("--rank", rank, "pick this ranked path from a report (default: selected)");
    apply->add_option("-o,--out", apply_out, "revised predictions CSV (default: stdout)");

    // report
    auto* report = app.add_subcommand("report", "render a JSON report as a text table");
    std::string report_path;
    report->add_option("report", report_path, "report JSON produced by mine")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (mine->parsed())
            return run_mine(mine_schema, mine_mode, delta_max, alpha, ladder, target, depth, beam,
                            fine_bins, p_pure, min_bin_count, mine_out, mine_format, threads_flag,
                            dump_hist, verbose);
        if (apply->parsed())
            return run_apply(apply_schema, apply_mode, rules_path, rank, apply_out);
        if (report->parsed()) return run_report(report_path);
    } catch (const discrim::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const discrim::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const discrim::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

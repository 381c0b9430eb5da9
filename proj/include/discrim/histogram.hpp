#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "discrim/types.hpp"

namespace discrim {

struct HistogramConfig {
    int fine_bins = 256;      // stage-1 uniform grid resolution
    double p_pure = 0.99;     // pooled-purity threshold for merging a run
    int min_bin_count = 1;    // bins below this object count merge freely

    void validate() const {
        if (fine_bins < 2) throw std::invalid_argument("fine_bins must be >= 2");
        if (!(p_pure > 0.5 && p_pure <= 1.0))
            throw std::invalid_argument("p_pure must be in (0.5, 1]");
        if (min_bin_count < 1) throw std::invalid_argument("min_bin_count must be >= 1");
    }
};

// Variable-width bins over one feature's values on the working subset.
// Bin i covers [edges[i], edges[i+1]); the last edge sits one ulp above the
// max value so the max falls inside the last bin. Zones dominated by one
// class collapse to single coarse bins, mixed zones keep the fine grid.
struct ReducedHistogram {
    int feature_index = -1;
    std::vector<double> edges;                 // strictly increasing, size = bins + 1
    std::vector<std::int64_t> primary_counts;  // flip-target class per bin
    std::vector<std::int64_t> secondary_counts;

    std::size_t bin_count() const { return primary_counts.size(); }

    std::int64_t primary_total() const {
        std::int64_t t = 0;
        for (auto c : primary_counts) t += c;
        return t;
    }
    std::int64_t secondary_total() const {
        std::int64_t t = 0;
        for (auto c : secondary_counts) t += c;
        return t;
    }
};

namespace detail {

inline bool pool_is_mergeable(std::int64_t p, std::int64_t s, const HistogramConfig& cfg) {
    const std::int64_t total = p + s;
    if (total < cfg.min_bin_count) return true;
    return static_cast<double>(std::max(p, s)) >= cfg.p_pure * static_cast<double>(total);
}

} // namespace detail

inline ReducedHistogram build_reduced_histogram(std::span<const double> values,
                                                std::span<const std::uint8_t> is_primary,
                                                const HistogramConfig& cfg,
                                                int feature_index = -1) {
    cfg.validate();
    if (values.empty()) throw std::invalid_argument("no values to bin");
    if (values.size() != is_primary.size())
        throw std::invalid_argument("values/classes length mismatch");

    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) throw DataError("constant feature: zero-width value range");

    // Stage 1: uniform fine grid. The edge array is the single source of
    // truth for bin membership; the arithmetic guess below is only a seed.
    const int fine = cfg.fine_bins;
    const double width = (hi - lo) / static_cast<double>(fine);
    std::vector<double> fine_edges(static_cast<std::size_t>(fine) + 1);
    for (int j = 0; j <= fine; ++j) fine_edges[j] = lo + width * static_cast<double>(j);
    fine_edges[fine] = std::nextafter(hi, std::numeric_limits<double>::infinity());
    for (int j = 1; j <= fine; ++j)
        if (fine_edges[j] <= fine_edges[j - 1])
            fine_edges[j] = std::nextafter(fine_edges[j - 1], std::numeric_limits<double>::infinity());

    std::vector<std::int64_t> fp_(fine, 0), fs_(fine, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        int j = width > 0.0 ? static_cast<int>(std::min((v - lo) / width,
                                                        static_cast<double>(fine)))
                            : 0;
        j = std::clamp(j, 0, fine - 1);
        while (j > 0 && v < fine_edges[j]) --j;
        while (j < fine - 1 && v >= fine_edges[j + 1]) ++j;
        (is_primary[i] ? fp_[j] : fs_[j])++;
    }

    // Stage 2: left-to-right run pooling. A fine bin joins the open run while
    // the pooled counts stay pure (or below min_bin_count); individually
    // mixed bins always stand alone so the seam keeps fine resolution.
    ReducedHistogram h;
    h.feature_index = feature_index;
    h.edges.push_back(fine_edges[0]);

    auto emit = [&](std::int64_t p, std::int64_t s, int end_edge) {
        h.primary_counts.push_back(p);
        h.secondary_counts.push_back(s);
        h.edges.push_back(fine_edges[end_edge]);
    };

    bool run_open = false;
    std::int64_t run_p = 0, run_s = 0;
    int run_end = 0;
    for (int j = 0; j < fine; ++j) {
        const std::int64_t p = fp_[j], s = fs_[j];
        const bool bin_mixed =
            p + s >= cfg.min_bin_count && !detail::pool_is_mergeable(p, s, cfg);
        if (run_open) {
            if (!bin_mixed && detail::pool_is_mergeable(run_p + p, run_s + s, cfg)) {
                run_p += p;
                run_s += s;
                run_end = j + 1;
                continue;
            }
            emit(run_p, run_s, run_end);
            run_open = false;
        }
        if (bin_mixed) {
            emit(p, s, j + 1);
        } else {
            run_open = true;
            run_p = p;
            run_s = s;
            run_end = j + 1;
        }
    }
    if (run_open) emit(run_p, run_s, run_end);
    return h;
}

// Interior bin edges, ascending. The outermost edges split nothing and are
// excluded; a single-bin histogram therefore yields no candidates.
inline std::vector<double> candidate_thresholds(const ReducedHistogram& h) {
    std::vector<double> out;
    if (h.edges.size() > 2) out.assign(h.edges.begin() + 1, h.edges.end() - 1);
    return out;
}

struct CumulativeCounts {
    std::vector<std::int64_t> primary;   // inclusive prefix over bins
    std::vector<std::int64_t> secondary;
};

inline CumulativeCounts cumulative_counts(const ReducedHistogram& h) {
    CumulativeCounts c;
    c.primary.resize(h.bin_count());
    c.secondary.resize(h.bin_count());
    std::int64_t ap = 0, as = 0;
    for (std::size_t i = 0; i < h.bin_count(); ++i) {
        ap += h.primary_counts[i];
        as += h.secondary_counts[i];
        c.primary[i] = ap;
        c.secondary[i] = as;
    }
    return c;
}

} // namespace discrim

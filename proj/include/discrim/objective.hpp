#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "discrim/types.hpp"

namespace discrim {

// Search-wide knobs. `constraint` is the user's hard budget on the secondary
// metric; `delta_max` is the schedule ceiling and defaults to `constraint`
// when left at 0.
struct ObjectiveConfig {
    Mode mode = Mode::ReduceFP;
    double alpha_prime = 1.0;
    double target = 1.0;     // kept for configuration completeness; does not enter the score
    double constraint = 0.0; // max allowable secondary-metric change, fraction
    double delta_max = 0.0;  // 0 = use `constraint`
    int total_depth = 3;
    int beam_width = 3;

    double effective_delta_max() const { return delta_max > 0.0 ? delta_max : constraint; }

    void validate() const {
        if (!(alpha_prime > 0.0)) throw std::invalid_argument("alpha_prime must be > 0");
        if (!(constraint > 0.0 && constraint <= 1.0))
            throw std::invalid_argument("constraint must be in (0, 1]");
        if (delta_max != 0.0 && !(delta_max > 0.0 && delta_max <= 1.0))
            throw std::invalid_argument("delta_max must be in (0, 1]");
        if (total_depth < 1) throw std::invalid_argument("total_depth must be >= 1");
        if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
    }
};

// Score of a flip outcome: alpha' * primary% - secondary%. The same form
// serves both modes; the mode only decides which quadrants feed primary and
// secondary (see DeltaMetrics).
inline double objective_score(const DeltaMetrics& dm, const ObjectiveConfig& cfg) {
    return cfg.alpha_prime * dm.delta_primary_pct - dm.delta_secondary_pct;
}

// Depth-dependent secondary budget: delta_max * (D / (d+1))^2. Loose near the
// root, exactly delta_max at the last rule level d = D-1.
inline double constraint_threshold(int d, const ObjectiveConfig& cfg) {
    if (d < 0 || d > cfg.total_depth)
        throw std::invalid_argument("depth " + std::to_string(d) + " outside [0, D]");
    const double ratio = static_cast<double>(cfg.total_depth) / static_cast<double>(d + 1);
    return cfg.effective_delta_max() * ratio * ratio;
}

// Strict inequality: hitting the budget exactly rejects.
inline bool satisfies_constraint(const DeltaMetrics& dm, int d, const ObjectiveConfig& cfg) {
    return dm.delta_secondary_pct < constraint_threshold(d, cfg);
}

// Satisfied against the final-depth budget; this is the flag reports carry.
inline bool satisfies_final_budget(const DeltaMetrics& dm, const ObjectiveConfig& cfg) {
    return dm.delta_secondary_pct < cfg.effective_delta_max();
}

// Split-quality index of classic recursive binary splitting, evaluated as
// printed: 1 - sum_i [p_i^2 + (1-p_i)^2]. Summed over several split
// directions this goes negative; it is shipped verbatim as the comparison
// baseline, not as a standard Gini impurity.
inline double gini_score(std::span<const double> direction_proportions) {
    double acc = 0.0;
    for (double p : direction_proportions) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("proportion outside [0, 1]");
        acc += p * p + (1.0 - p) * (1.0 - p);
    }
    return 1.0 - acc;
}

// What tune_alpha needs to know about one candidate's search outcome.
struct AlphaOutcome {
    bool satisfied = false;      // optimal path meets the final budget
    double primary_pct = 0.0;    // optimal path's primary delta
    double secondary_pct = 0.0;  // optimal path's secondary delta
    bool has_path = false;
};

template <typename Result>
struct TunedResult {
    double alpha_prime = 0.0;
    bool satisfied = false;
    std::size_t candidate_index = 0;
    Result result;
};

// Reruns the full search per alpha' candidate. Among candidates whose optimal
// path meets the final budget, picks the highest primary delta (earlier
// candidate wins ties); if none qualifies, picks the smallest budget
// violation and flags the result unsatisfied.
//
// `run` is invoked as run(alpha) and its result must be summarizable via
// `outcome(result) -> AlphaOutcome`.
template <typename RunFn, typename OutcomeFn>
auto tune_alpha(RunFn&& run, OutcomeFn&& outcome, std::span<const double> candidates)
    -> TunedResult<std::decay_t<decltype(run(0.0))>> {
    if (candidates.empty()) throw std::invalid_argument("alpha candidate list is empty");

    using Result = std::decay_t<decltype(run(0.0))>;
    TunedResult<Result> best;
    bool have_best = false;
    double best_primary = 0.0;
    double best_violation = 0.0;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Result r = run(candidates[i]);
        const AlphaOutcome out = outcome(r);
        const double violation = out.secondary_pct;

        bool take = false;
        if (!have_best) {
            take = true;
        } else if (out.satisfied != best.satisfied) {
            take = out.satisfied;
        } else if (out.satisfied) {
            take = out.primary_pct > best_primary;
        } else {
            take = violation < best_violation;
        }
        if (take) {
            best = TunedResult<Result>{candidates[i], out.satisfied, i, std::move(r)};
            have_best = true;
            best_primary = out.primary_pct;
            best_violation = violation;
        }
    }
    return best;
}

inline const std::vector<double>& default_alpha_ladder() {
    static const std::vector<double> ladder = {0.25, 0.5, 1.0, 2.0, 4.0};
    return ladder;
}

} // namespace discrim

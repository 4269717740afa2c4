#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "usrt/error.hpp"
#include "usrt/paired_data.hpp"
#include "usrt/score.hpp"

namespace usrt {

// The truncated statistics T(k) = T_n(k / (n + 1)), k = 1..n, stored as
// cumulative sums from the top rank down. T(k) = 0 for k = 0 is implicit.
struct WalkFamily {
    std::size_t n = 0;
    std::vector<double> values;          // values[k - 1] = T(k)
    bool starred = false;
    std::vector<std::size_t> eval_ranks; // ascending k where the statistic can change

    double at(std::size_t k) const {
        if (k == 0) return 0.0;
        if (k > n) throw DomainError("walk rank out of range");
        return values[k - 1];
    }
    double full() const { return n == 0 ? 0.0 : values.back(); }
};

// T(k) = sum_{i = n+1-k}^{n} c_i S_i with the given per-rank scores.
inline WalkFamily build_walk(const RankedSample& ranked, std::span<const double> scores) {
    const std::size_t n = ranked.n();
    if (scores.size() != n) throw InputError("build_walk: score count does not match sample size");
    WalkFamily w;
    w.n = n;
    w.values.resize(n);
    w.eval_ranks.resize(n);
    double sum = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t r = n - k;
        if (ranked.signs[r]) sum += scores[r];
        w.values[k - 1] = sum;
        w.eval_ranks[k - 1] = k;
    }
    return w;
}

inline WalkFamily build_walk(const RankedSample& ranked, const ScoreFunction& score) {
    const std::vector<double> c = rank_scores(ranked.n(), score);
    return build_walk(ranked, c);
}

// T*(k): sum of c*_i S_i over whole tie groups whose lowest rank m satisfies
// m >= n + 1 - k. A group with 0-based lowest rank m0 enters at k = n - m0.
// Each group contributes c* times its positive count, so the values do not
// depend on how members of a group were ordered.
inline WalkFamily build_star_walk(const RankedSample& ranked, const TieScores& tie_scores) {
    const std::size_t n = ranked.n();
    if (tie_scores.c_star.size() != n) {
        throw InputError("build_star_walk: tie scores do not match sample size");
    }
    WalkFamily w;
    w.n = n;
    w.starred = true;
    w.values.assign(n, 0.0);
    double sum = 0.0;
    std::size_t next_k = 1;
    for (auto g = ranked.groups.rbegin(); g != ranked.groups.rend(); ++g) {
        std::size_t positives = 0;
        for (std::size_t r = g->first; r <= g->last; ++r) positives += ranked.signs[r];
        const std::size_t enter_k = n - g->first;
        for (; next_k < enter_k; ++next_k) w.values[next_k - 1] = sum;
        sum += tie_scores.c_star[g->first] * static_cast<double>(positives);
        w.values[enter_k - 1] = sum;
        next_k = enter_k + 1;
        w.eval_ranks.push_back(enter_k);
    }
    return w;
}

} // namespace usrt

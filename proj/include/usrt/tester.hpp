#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usrt/error.hpp"
#include "usrt/null_boundary.hpp"
#include "usrt/paired_data.hpp"
#include "usrt/parallel.hpp"
#include "usrt/rank_walk.hpp"
#include "usrt/score.hpp"

namespace usrt {

enum class TestKind { Uniform, Fixed };

inline std::string_view to_string(TestKind k) { return k == TestKind::Uniform ? "uniform" : "fixed"; }

inline TestKind parse_test_kind(std::string_view s) {
    if (s == "uniform") return TestKind::Uniform;
    if (s == "fixed") return TestKind::Fixed;
    throw ConfigError("unknown test kind '" + std::string(s) + "' (expected uniform or fixed)");
}

struct TestOptions {
    double gamma = 1.0;
    double alpha = 0.05;
    double x0 = 1.0 / 3.0;
    TestKind kind = TestKind::Uniform;
    // Fixed-sample critical value method; unset picks exact_sign for the sign
    // score and normal_approx otherwise.
    std::optional<CriticalMethod> method;
    std::size_t mc_reps = 100000;
    std::uint64_t mc_seed = 0;
    RankOptions rank;
};

inline CriticalMethod default_method(const ScoreFunction& score) {
    return score.kind() == ScoreKind::Sign ? CriticalMethod::ExactSign
                                           : CriticalMethod::NormalApprox;
}

struct TestResult {
    bool reject = false;
    std::vector<std::size_t> crossing_ranks; // k with T(k) >= threshold(k)
    double max_margin = -std::numeric_limits<double>::infinity();
    std::size_t best_rank = 0;               // k attaining max_margin
    double statistic = 0.0;                  // full-sample T(n) (or T*(n))
    double threshold_at_best = 0.0;          // f(k) or the fixed critical value
    double lambda = 0.0;                     // uniform test only
    std::size_t k0 = 0;                      // uniform test only
    double gamma = 1.0;
    double alpha = 0.05;
    double x0 = 1.0 / 3.0;
    std::string score;
    TestKind kind = TestKind::Uniform;
    std::optional<CriticalMethod> method;    // fixed test only
    bool starred = false;
    bool degenerate = false;                 // every difference is zero (or none remain)
    std::size_t n = 0;
};

// Ranked data with the per-rank scores and walk precomputed, reusable across
// Gamma values. Starred scores and the starred walk are used whenever the
// sample contains ties; without ties the two coincide.
class PreparedSample {
public:
    PreparedSample(const PairDifferences& data, const ScoreFunction& score,
                   const RankOptions& rank_opt = {})
        : score_(score), ranked_(rank_by_abs(data, rank_opt)) {
        if (data.empty()) throw InputError("no pair differences supplied");
        starred_ = ranked_.has_ties();
        if (ranked_.n() == 0) return;
        if (starred_) {
            scores_ = tie_averaged_scores(ranked_, score_).c_star;
            walk_ = build_star_walk(ranked_, TieScores{scores_});
        } else {
            scores_ = rank_scores(ranked_.n(), score_);
            walk_ = build_walk(ranked_, scores_);
        }
    }

    const RankedSample& ranked() const { return ranked_; }
    const WalkFamily& walk() const { return walk_; }
    const std::vector<double>& scores() const { return scores_; }
    const ScoreFunction& score() const { return score_; }
    bool starred() const { return starred_; }
    bool degenerate() const { return ranked_.n() == 0 || ranked_.zero_count == ranked_.n(); }

    TestResult uniform(double gamma, double alpha, double x0) const {
        TestResult res = skeleton(gamma, alpha, TestKind::Uniform);
        res.x0 = x0;
        const NullModel model = NullModel::from_gamma(gamma);
        check_alpha(alpha);
        if (res.degenerate) {
            ranks_for_level(x0, ranked_.n());
            return res;
        }
        const BoundaryValues b = boundary(model, scores_, alpha, x0, false, starred_);
        res.lambda = b.config.lambda;
        res.k0 = b.config.k0;
        for (std::size_t k : walk_.eval_ranks) {
            const double t = walk_.values[k - 1];
            const double f = b.f[k - 1];
            const double margin = t - f;
            if (t >= f) res.crossing_ranks.push_back(k);
            if (margin > res.max_margin) {
                res.max_margin = margin;
                res.best_rank = k;
                res.threshold_at_best = f;
            }
        }
        res.reject = !res.crossing_ranks.empty();
        return res;
    }

    TestResult fixed(double gamma, double alpha, const CriticalOptions& crit) const {
        TestResult res = skeleton(gamma, alpha, TestKind::Fixed);
        res.method = crit.method;
        const NullModel model = NullModel::from_gamma(gamma);
        check_alpha(alpha);
        if (crit.method == CriticalMethod::ExactSign && score_.kind() != ScoreKind::Sign) {
            throw ConfigError("exact_sign critical values require the sign score");
        }
        if (res.degenerate) return res;
        const double cv = fixed_critical_value(model, scores_, alpha, crit);
        res.threshold_at_best = cv;
        res.best_rank = ranked_.n();
        res.max_margin = res.statistic - cv;
        res.reject = res.statistic >= cv;
        if (res.reject) res.crossing_ranks.push_back(ranked_.n());
        return res;
    }

    TestResult run(const TestOptions& opt) const {
        if (opt.kind == TestKind::Uniform) return uniform(opt.gamma, opt.alpha, opt.x0);
        return fixed(opt.gamma, opt.alpha,
                     {opt.method.value_or(default_method(score_)), opt.mc_reps, opt.mc_seed});
    }

private:
    TestResult skeleton(double gamma, double alpha, TestKind kind) const {
        TestResult res;
        res.gamma = gamma;
        res.alpha = alpha;
        res.kind = kind;
        res.score = score_.name();
        res.starred = starred_;
        res.n = ranked_.n();
        res.degenerate = degenerate();
        res.statistic = walk_.full();
        return res;
    }

    ScoreFunction score_;
    RankedSample ranked_;
    bool starred_ = false;
    std::vector<double> scores_;
    WalkFamily walk_;
};

inline TestResult uniform_test(const PairDifferences& data, const ScoreFunction& score,
                               double gamma, double alpha, double x0,
                               const RankOptions& rank_opt = {}) {
    return PreparedSample(data, score, rank_opt).uniform(gamma, alpha, x0);
}

inline TestResult fixed_test(const PairDifferences& data, const ScoreFunction& score, double gamma,
                             double alpha, std::optional<CriticalMethod> method = std::nullopt,
                             const RankOptions& rank_opt = {}) {
    return PreparedSample(data, score, rank_opt)
        .fixed(gamma, alpha, {method.value_or(default_method(score))});
}

inline TestResult run_test(const PairDifferences& data, const ScoreFunction& score,
                           const TestOptions& opt) {
    return PreparedSample(data, score, opt.rank).run(opt);
}

struct GammaGrid {
    double gamma_max = 100.0;
    std::size_t points = 400;
    double tolerance = 0.01;
};

struct GammaThreshold {
    double gamma_hat = 0.0;      // 0 when the test does not reject at Gamma = 1
    bool rejects_at_one = false;
    bool capped = false;         // rejects across the whole grid: gamma_hat >= gamma_max
    bool monotone_ok = true;     // grid decisions nonincreasing in Gamma
    double bracket_lo = 0.0;     // largest Gamma seen rejecting
    double bracket_hi = 0.0;     // smallest Gamma seen failing above bracket_lo
    std::vector<double> grid;
    std::vector<std::uint8_t> decisions;
    std::size_t refinements = 0;
};

// Largest Gamma at which the test still rejects: geometric grid scan from 1 to
// gamma_max, then bisection between the last reject and the first failure.
inline GammaThreshold gamma_threshold(const PairDifferences& data, const ScoreFunction& score,
                                      const TestOptions& opt, const GammaGrid& grid = {}) {
    if (!(grid.gamma_max > 1.0) || !std::isfinite(grid.gamma_max) || grid.points < 2 ||
        !(grid.tolerance > 0.0)) {
        throw ConfigError("gamma grid needs gamma_max > 1, at least 2 points and tolerance > 0");
    }
    const PreparedSample prepared(data, score, opt.rank);
    auto decide = [&](double gamma) {
        TestOptions o = opt;
        o.gamma = gamma;
        return prepared.run(o).reject;
    };

    GammaThreshold out;
    out.grid.resize(grid.points);
    out.decisions.resize(grid.points);
    const double log_max = std::log(grid.gamma_max);
    for (std::size_t j = 0; j < grid.points; ++j) {
        out.grid[j] = j + 1 == grid.points
                          ? grid.gamma_max
                          : std::exp(log_max * static_cast<double>(j) / double(grid.points - 1));
    }
    parallel_for(grid.points, [&](std::size_t j) { out.decisions[j] = decide(out.grid[j]); });

    for (std::size_t j = 1; j < grid.points; ++j) {
        if (out.decisions[j] && !out.decisions[j - 1]) out.monotone_ok = false;
    }
    out.rejects_at_one = out.decisions[0] != 0;
    if (!out.rejects_at_one) {
        out.bracket_hi = 1.0;
        return out;
    }
    std::size_t first_fail = grid.points;
    for (std::size_t j = 0; j < grid.points; ++j) {
        if (!out.decisions[j]) {
            first_fail = j;
            break;
        }
    }
    if (first_fail == grid.points) {
        out.capped = true;
        out.gamma_hat = grid.gamma_max;
        out.bracket_lo = grid.gamma_max;
        out.bracket_hi = std::numeric_limits<double>::infinity();
        return out;
    }
    double lo = out.grid[first_fail - 1];
    double hi = out.grid[first_fail];
    while (hi - lo > grid.tolerance) {
        const double mid = 0.5 * (lo + hi);
        (decide(mid) ? lo : hi) = mid;
        ++out.refinements;
    }
    out.gamma_hat = lo;
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    return out;
}

} // namespace usrt

#pragma once
/*
Monte Carlo power of fixed and uniform tests under an alternative G.

Replication r of a cell draws its data from the stream keyed by
(seed, distribution, n, r). Test kind, score and Gamma are deliberately not
part of the key: every test in a sweep sees the same simulated datasets, so
comparisons between tests and across Gamma are paired, and adding cells to a
sweep never changes the estimate of an existing cell.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "usrt/alternatives.hpp"
#include "usrt/error.hpp"
#include "usrt/format.hpp"
#include "usrt/null_boundary.hpp"
#include "usrt/parallel.hpp"
#include "usrt/random.hpp"
#include "usrt/score.hpp"
#include "usrt/tester.hpp"

namespace usrt {

struct PowerSpec {
    ScoreFunction score = ScoreFunction::sign();
    AlternativeDist dist = AlternativeDist::normal(0.5, 1.0);
    std::size_t n = 100;
    double gamma = 1.0;
    double alpha = 0.05;
    double x0 = 1.0 / 3.0;
    TestKind kind = TestKind::Uniform;
    std::size_t reps = 10000;
    std::uint64_t seed = 0;
    std::optional<CriticalMethod> method; // fixed test; default per score
    // Draw signs directly as i.i.d. Bernoulli(Gamma / (1 + Gamma)) instead of
    // sampling from dist; used to check level under the worst-case null.
    bool worst_case_null = false;

    std::string dist_label() const { return worst_case_null ? "worst-case-null" : dist.name(); }

    void validate() const {
        if (reps < 1) throw ConfigError("reps must be >= 1");
        if (n < 1) throw ConfigError("n must be >= 1");
        NullModel::from_gamma(gamma);
        check_alpha(alpha);
        ranks_for_level(x0, n);
    }
};

struct PowerEstimate {
    double power = 0.0;
    double mc_se = 0.0;
    std::size_t rejections = 0;
    PowerSpec spec;
};

inline double binomial_se(double p, std::size_t reps) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

// Stream for the datasets of one (seed, distribution, n) combination.
inline Stream data_stream(std::uint64_t seed, const AlternativeDist& d, std::size_t n) {
    return Stream(derive_key(derive_key(seed, fnv1a(d.name())), n));
}

namespace detail {

// Precomputed thresholds for continuous (tie-free) samples of size n.
class CellPlan {
public:
    explicit CellPlan(const PowerSpec& spec) : spec_(spec), scores_(rank_scores(spec.n, spec.score)) {
        const NullModel model = NullModel::from_gamma(spec.gamma);
        if (spec.kind == TestKind::Uniform) {
            f_ = boundary(model, scores_, spec.alpha, spec.x0).f;
        } else {
            const CriticalMethod m = spec.method.value_or(default_method(spec.score));
            critical_ = fixed_critical_value(model, scores_, spec.alpha, {m});
        }
    }

    // signs[r] for ranks in ascending |Y| order.
    bool rejects_signs(const std::vector<std::uint8_t>& signs) const {
        const std::size_t n = signs.size();
        double t = 0.0;
        if (spec_.kind == TestKind::Fixed) {
            for (std::size_t r = 0; r < n; ++r) {
                if (signs[r]) t += scores_[r];
            }
            return t >= critical_;
        }
        for (std::size_t k = 1; k <= n; ++k) {
            if (signs[n - k]) t += scores_[n - k];
            if (t >= f_[k - 1]) return true;
        }
        return false;
    }

    bool rejects_sample(std::vector<double>& y, std::vector<std::uint8_t>& signs) const {
        std::sort(y.begin(), y.end(),
                  [](double a, double b) { return std::fabs(a) < std::fabs(b); });
        for (std::size_t r = 1; r < y.size(); ++r) {
            if (std::fabs(y[r]) == std::fabs(y[r - 1])) return rejects_with_ties(y);
        }
        for (std::size_t r = 0; r < y.size(); ++r) signs[r] = y[r] > 0.0 ? 1 : 0;
        return rejects_signs(signs);
    }

private:
    bool rejects_with_ties(const std::vector<double>& y) const {
        TestOptions o;
        o.gamma = spec_.gamma;
        o.alpha = spec_.alpha;
        o.x0 = spec_.x0;
        o.kind = spec_.kind;
        o.method = spec_.method;
        return run_test(PairDifferences(y), spec_.score, o).reject;
    }

    PowerSpec spec_;
    std::vector<double> scores_;
    std::vector<double> f_;
    double critical_ = 0.0;
};

} // namespace detail

inline PowerEstimate simulate_worst_case_null(const PowerSpec& spec);

inline PowerEstimate simulate_power(const PowerSpec& spec) {
    if (spec.worst_case_null) return simulate_worst_case_null(spec);
    spec.validate();
    const detail::CellPlan plan(spec);
    const Stream root = data_stream(spec.seed, spec.dist, spec.n);
    std::vector<std::uint8_t> rejected(spec.reps);
    parallel_for(spec.reps, [&](std::size_t r) {
        Stream s = root.substream(r);
        std::vector<double> y = spec.dist.sample(spec.n, s);
        std::vector<std::uint8_t> signs(spec.n);
        rejected[r] = plan.rejects_sample(y, signs) ? 1 : 0;
    });
    PowerEstimate est;
    est.spec = spec;
    est.rejections = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
    est.power = static_cast<double>(est.rejections) / static_cast<double>(spec.reps);
    est.mc_se = binomial_se(est.power, spec.reps);
    return est;
}

// Rejection rate when the signs themselves are i.i.d. Bernoulli(Gamma / (1 + Gamma)),
// the worst case of the sensitivity null. spec.dist is ignored.
inline PowerEstimate simulate_worst_case_null(const PowerSpec& spec) {
    spec.validate();
    const detail::CellPlan plan(spec);
    const double rho = NullModel::from_gamma(spec.gamma).rho;
    const Stream root = Stream(derive_key(derive_key(spec.seed, fnv1a("worst-case-null")), spec.n));
    std::vector<std::uint8_t> rejected(spec.reps);
    parallel_for(spec.reps, [&](std::size_t r) {
        Stream s = root.substream(r);
        std::vector<std::uint8_t> signs(spec.n);
        for (auto& b : signs) b = s.bernoulli(rho) ? 1 : 0;
        rejected[r] = plan.rejects_signs(signs) ? 1 : 0;
    });
    PowerEstimate est;
    est.spec = spec;
    est.rejections = static_cast<std::size_t>(std::count(rejected.begin(), rejected.end(), 1));
    est.power = static_cast<double>(est.rejections) / static_cast<double>(spec.reps);
    est.mc_se = binomial_se(est.power, spec.reps);
    return est;
}

// Cross product in the order score, test kind, n, gamma.
inline std::vector<PowerEstimate> power_sweep(const PowerSpec& base,
                                              const std::vector<std::size_t>& n_values,
                                              const std::vector<double>& gamma_values,
                                              const std::vector<TestKind>& test_kinds,
                                              const std::vector<ScoreFunction>& scores) {
    if (n_values.empty() || gamma_values.empty() || test_kinds.empty() || scores.empty()) {
        throw ConfigError("power sweep grids must be nonempty");
    }
    std::vector<PowerSpec> cells;
    for (const auto& score : scores) {
        for (TestKind kind : test_kinds) {
            for (std::size_t n : n_values) {
                for (double gamma : gamma_values) {
                    PowerSpec s = base;
                    s.score = score;
                    s.kind = kind;
                    s.n = n;
                    s.gamma = gamma;
                    s.validate();
                    cells.push_back(s);
                }
            }
        }
    }
    std::vector<PowerEstimate> out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back(simulate_power(c));
    return out;
}

inline void write_power_csv(std::ostream& os, const std::vector<PowerEstimate>& rows,
                            const std::vector<std::string>& comments = {}) {
    for (const auto& line : comments) os << "# " << line << "\n";
    os << "score,dist,test,n,gamma,power,mc_se,seed\n";
    for (const auto& r : rows) {
        os << r.spec.score.name() << ",\"" << r.spec.dist_label() << "\"," << to_string(r.spec.kind)
           << "," << r.spec.n << "," << format_number(r.spec.gamma) << ","
           << format_number(r.power) << "," << format_number(r.mc_se) << "," << r.spec.seed << "\n";
    }
}

} // namespace usrt

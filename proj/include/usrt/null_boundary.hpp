#pragma once
/*
Worst-case null quantities under the sensitivity model with parameter Gamma.

Under the worst case every sign is an independent Bernoulli(rho) with
rho = Gamma / (1 + Gamma), so the top-k partial sum T(k) has

  mu(k)      = rho * sum_{i>n-k} c_i
  sigma^2(k) = rho (1 - rho) * sum_{i>n-k} c_i^2

and the uniform boundary is

  f(k) = [log(1/alpha) + sum_{i>n-k} log(1 + rho (exp(c_i lambda) - 1))] / lambda,
  lambda = sqrt(2 log(1/alpha) / sigma^2(k0)),

where k0 is the number of ranks kept by the truncation level x0. The process
exp(lambda T(k) - sum log-mgf) is a nonnegative martingale in k, so the walk
crosses f anywhere with probability at most alpha.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usrt/error.hpp"
#include "usrt/normal.hpp"
#include "usrt/parallel.hpp"
#include "usrt/random.hpp"

namespace usrt {

struct NullModel {
    double gamma = 1.0;
    double rho = 0.5;

    static NullModel from_gamma(double gamma) {
        if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
            throw ConfigError("gamma must be a finite value >= 1");
        }
        return {gamma, gamma / (1.0 + gamma)};
    }
};

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

// Number of top ranks in T_n(x): n + 1 - max(1, ceil((1 - x)(n + 1))), clamped
// to [0, n]. (1 - x)(n + 1) is snapped to the nearest integer when it is within
// rounding distance of one, so x = k / (n + 1) maps to exactly k ranks.
inline std::size_t ranks_for_level(double x, std::size_t n) {
    if (!(x > 0.0 && x <= 1.0)) throw ConfigError("truncation level must lie in (0,1]");
    const double np1 = static_cast<double>(n) + 1.0;
    double v = (1.0 - x) * np1;
    const double nearest = std::round(v);
    if (std::fabs(v - nearest) <= 1e-9 * np1) v = nearest;
    const double start = std::max(1.0, std::ceil(v));
    if (start > np1) return 0;
    const auto k = static_cast<std::size_t>(np1 - start);
    return std::min(k, n);
}

namespace detail {

inline void check_rank(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw DomainError("rank k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
}

} // namespace detail

inline double mu(const NullModel& model, std::span<const double> scores, std::size_t k) {
    detail::check_rank(k, scores.size());
    double s = 0.0;
    for (std::size_t r = scores.size() - k; r < scores.size(); ++r) s += scores[r];
    return model.rho * s;
}

inline double sigma_sq(const NullModel& model, std::span<const double> scores, std::size_t k) {
    detail::check_rank(k, scores.size());
    double s = 0.0;
    for (std::size_t r = scores.size() - k; r < scores.size(); ++r) s += scores[r] * scores[r];
    return model.rho * (1.0 - model.rho) * s;
}

// log(1 + rho (e^{c lambda} - 1)) without overflow for large c lambda.
inline double log_bernoulli_mgf(double c, double lambda, double rho) {
    const double t = c * lambda;
    if (t > 30.0) return t + std::log(rho + (1.0 - rho) * std::exp(-t));
    return std::log1p(rho * std::expm1(t));
}

struct BoundaryConfig {
    double alpha = 0.05;
    double x0 = 1.0 / 3.0;
    std::size_t k0 = 0;         // ranks retained at x0
    double sigma_sq_x0 = 0.0;
    double lambda = 0.0;
};

struct BoundaryValues {
    std::vector<double> f;  // f[k - 1] = f(k)
    std::vector<double> g;  // second-order approximation; empty unless requested
    BoundaryConfig config;
    bool starred = false;
};

inline BoundaryConfig make_boundary_config(const NullModel& model, std::span<const double> scores,
                                           double alpha, double x0) {
    check_alpha(alpha);
    BoundaryConfig cfg;
    cfg.alpha = alpha;
    cfg.x0 = x0;
    cfg.k0 = ranks_for_level(x0, scores.size());
    cfg.sigma_sq_x0 = cfg.k0 == 0 ? 0.0 : sigma_sq(model, scores, cfg.k0);
    if (!(cfg.sigma_sq_x0 > 0.0)) {
        throw ConfigError("null variance at x0 is zero; choose a larger x0 (x0 >= 1/(n+1) and "
                          "nonzero scores among the retained ranks)");
    }
    cfg.lambda = std::sqrt(2.0 * std::log(1.0 / alpha) / cfg.sigma_sq_x0);
    return cfg;
}

// Pass tie-averaged scores to obtain f*; the formula is unchanged.
inline BoundaryValues boundary(const NullModel& model, std::span<const double> scores, double alpha,
                               double x0, bool with_g = false, bool starred = false) {
    BoundaryValues out;
    out.config = make_boundary_config(model, scores, alpha, x0);
    out.starred = starred;
    const std::size_t n = scores.size();
    const double lambda = out.config.lambda;
    const double log_inv_alpha = std::log(1.0 / alpha);
    out.f.resize(n);
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        acc += log_bernoulli_mgf(scores[n - k], lambda, model.rho);
        out.f[k - 1] = (log_inv_alpha + acc) / lambda;
    }
    if (with_g) {
        out.g.resize(n);
        const double s0 = out.config.sigma_sq_x0;
        const double half_width = std::sqrt(s0 * log_inv_alpha / 2.0);
        double sum_c = 0.0;
        double sum_c2 = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double c = scores[n - k];
            sum_c += c;
            sum_c2 += c * c;
            const double m = model.rho * sum_c;
            const double v = model.rho * (1.0 - model.rho) * sum_c2;
            out.g[k - 1] = m + (1.0 + v / s0) * half_width;
        }
    }
    return out;
}

enum class CriticalMethod { ExactSign, NormalApprox, MonteCarlo };

inline std::string_view to_string(CriticalMethod m) {
    switch (m) {
    case CriticalMethod::ExactSign: return "exact_sign";
    case CriticalMethod::NormalApprox: return "normal_approx";
    case CriticalMethod::MonteCarlo: return "monte_carlo";
    }
    return "";
}

inline CriticalMethod parse_critical_method(std::string_view s) {
    if (s == "exact_sign") return CriticalMethod::ExactSign;
    if (s == "normal_approx") return CriticalMethod::NormalApprox;
    if (s == "monte_carlo") return CriticalMethod::MonteCarlo;
    throw ConfigError("unknown critical-value method '" + std::string(s) +
                      "' (expected exact_sign, normal_approx or monte_carlo)");
}

struct CriticalOptions {
    CriticalMethod method = CriticalMethod::NormalApprox;
    std::size_t mc_reps = 100000;
    std::uint64_t mc_seed = 0;
};

namespace detail {

// Smallest integer t with P(Bin(n, rho) >= t) <= alpha; n + 1 if none.
inline double exact_sign_critical(std::size_t n, double rho, double alpha) {
    const double log_rho = std::log(rho);
    const double log_rest = std::log1p(-rho);
    const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
    double tail = 0.0;
    for (std::size_t t = n + 1; t-- > 0;) {
        const double j = static_cast<double>(t);
        const double log_pmf = lg_n - std::lgamma(j + 1.0) -
                               std::lgamma(static_cast<double>(n) - j + 1.0) + j * log_rho +
                               (static_cast<double>(n) - j) * log_rest;
        tail += std::exp(log_pmf);
        if (tail > alpha) return static_cast<double>(t + 1);
    }
    return 0.0;
}

} // namespace detail

// Simulated draws of sum c_i Bernoulli(rho); draw r uses substream r of the seed.
inline std::vector<double> simulate_null_sums(const NullModel& model, std::span<const double> scores,
                                              std::size_t reps, std::uint64_t seed) {
    std::vector<double> sums(reps);
    const Stream root(seed);
    parallel_for(reps, [&](std::size_t r) {
        Stream s = root.substream(r);
        double t = 0.0;
        for (double c : scores) {
            if (s.bernoulli(model.rho)) t += c;
        }
        sums[r] = t;
    });
    return sums;
}

// Critical value c_{alpha,n}(Gamma) of the fixed-sample test, which rejects when
// the full statistic is >= the returned value.
inline double fixed_critical_value(const NullModel& model, std::span<const double> scores,
                                   double alpha, const CriticalOptions& opt = {}) {
    check_alpha(alpha);
    const std::size_t n = scores.size();
    switch (opt.method) {
    case CriticalMethod::ExactSign: {
        const bool all_ones =
            std::all_of(scores.begin(), scores.end(), [](double c) { return c == 1.0; });
        if (!all_ones) throw ConfigError("exact_sign critical values require the sign score");
        return detail::exact_sign_critical(n, model.rho, alpha);
    }
    case CriticalMethod::NormalApprox: {
        if (n == 0) return 0.0;
        const double m = mu(model, scores, n);
        const double v = sigma_sq(model, scores, n);
        return m + normal_quantile_upper(alpha) * std::sqrt(v);
    }
    case CriticalMethod::MonteCarlo: {
        if (opt.mc_reps == 0) throw ConfigError("monte_carlo critical value needs reps >= 1");
        std::vector<double> sums = simulate_null_sums(model, scores, opt.mc_reps, opt.mc_seed);
        // smallest order statistic whose empirical CDF reaches 1 - alpha
        const double pos = std::ceil((1.0 - alpha) * static_cast<double>(opt.mc_reps));
        const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, double(opt.mc_reps))) - 1;
        std::nth_element(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(idx), sums.end());
        return sums[idx];
    }
    }
    return 0.0;
}

} // namespace usrt

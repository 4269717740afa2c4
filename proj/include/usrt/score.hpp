#pragma once
/*
Score functions phi: (0,1) -> [0, inf) for general signed rank statistics.

  sign          phi(q) = 1
  wilcoxon      phi(q) = q
  normal        phi(q) = Phi^{-1}((1 + q) / 2)
  redescending  phi(q) = sum_{l=m_lo}^{m_hi} (l/m) C(m,l) q^{l-1} (1-q)^{m-l}

Because (l/m) C(m,l) = C(m-1,l-1), the redescending score is the probability
P(m_lo - 1 <= Bin(m - 1, q) <= m_hi - 1), and its integral over [lo, hi] is a
sum of binomial tail differences divided by m.

Every score also exposes evaluate_complement(p) = phi(1 - p), computed from p
directly, so callers working with upper-tail masses keep full precision near 1.
*/

#include <algorithm>
#include <cmath>
#include <limits>
#include <concepts>
#include <string>
#include <string_view>

#include "usrt/error.hpp"
#include "usrt/normal.hpp"
#include "usrt/quadrature.hpp"

namespace usrt {

enum class ScoreKind { Sign, Wilcoxon, NormalScores, Redescending };

struct RedescendingParams {
    int m = 20;
    int m_lo = 12;
    int m_hi = 19;
};

namespace detail {

inline double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(Bin(n, x) = j) with xc = 1 - x supplied separately.
inline double binom_pmf(int n, int j, double x, double xc) {
    if (j < 0 || j > n) return 0.0;
    if (x == 0.0) return j == 0 ? 1.0 : 0.0;
    if (xc == 0.0) return j == n ? 1.0 : 0.0;
    return std::exp(log_choose(n, j) + j * std::log(x) + (n - j) * std::log(xc));
}

// P(lo <= Bin(n, x) <= hi).
inline double binom_range(int n, int lo, int hi, double x, double xc) {
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += binom_pmf(n, j, x, xc);
    return s;
}

inline void check_unit_interval(double lo, double hi, const char* what) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
        throw DomainError(std::string(what) + ": require 0 <= lo <= hi <= 1");
    }
}

} // namespace detail

class ScoreFunction {
public:
    static ScoreFunction sign() { return ScoreFunction(ScoreKind::Sign, {}); }
    static ScoreFunction wilcoxon() { return ScoreFunction(ScoreKind::Wilcoxon, {}); }
    static ScoreFunction normal() { return ScoreFunction(ScoreKind::NormalScores, {}); }
    static ScoreFunction redescending(RedescendingParams p = {}) {
        if (!(p.m >= 1 && p.m <= 1000 && p.m_lo >= 1 && p.m_lo <= p.m_hi && p.m_hi <= p.m)) {
            throw ConfigError("redescending score requires 1 <= m_lo <= m_hi <= m <= 1000");
        }
        return ScoreFunction(ScoreKind::Redescending, p);
    }

    // "sign" | "wilcoxon" | "normal" | "redescending[:m,mlo,mhi]"
    static ScoreFunction parse(std::string_view spec);

    ScoreKind kind() const { return kind_; }
    const RedescendingParams& params() const { return params_; }

    // Canonical spec string; parse(name()) reproduces the score.
    std::string name() const {
        switch (kind_) {
        case ScoreKind::Sign: return "sign";
        case ScoreKind::Wilcoxon: return "wilcoxon";
        case ScoreKind::NormalScores: return "normal";
        case ScoreKind::Redescending:
            return "redescending:" + std::to_string(params_.m) + "," +
                   std::to_string(params_.m_lo) + "," + std::to_string(params_.m_hi);
        }
        return {};
    }

    double evaluate(double q) const {
        if (!(q > 0.0 && q < 1.0)) throw DomainError("score evaluate: q must lie in (0,1)");
        return eval_pair(q, 1.0 - q);
    }

    double operator()(double q) const { return evaluate(q); }

    // phi(1 - p) for p in (0,1).
    double evaluate_complement(double p) const {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("score evaluate_complement: p must lie in (0,1)");
        }
        return eval_pair(1.0 - p, p);
    }

    // Integral of phi over [lo, hi].
    double integral(double lo, double hi) const {
        detail::check_unit_interval(lo, hi, "score integral");
        if (lo == hi) return 0.0;
        switch (kind_) {
        case ScoreKind::Sign: return hi - lo;
        case ScoreKind::Wilcoxon: return 0.5 * (hi - lo) * (hi + lo);
        case ScoreKind::NormalScores: return normal_moment(lo, hi, 1);
        case ScoreKind::Redescending: return redescending_integral(lo, hi);
        }
        return 0.0;
    }

    // Integral of phi^2 over [lo, hi].
    double integral_sq(double lo, double hi) const {
        detail::check_unit_interval(lo, hi, "score integral_sq");
        if (lo == hi) return 0.0;
        switch (kind_) {
        case ScoreKind::Sign: return hi - lo;
        case ScoreKind::Wilcoxon: return (hi * hi * hi - lo * lo * lo) / 3.0;
        case ScoreKind::NormalScores: return normal_moment(lo, hi, 2);
        case ScoreKind::Redescending:
            return integrate([this](double q) { return square(eval_pair(q, 1.0 - q)); }, lo, hi,
                             {1e-14, 1e-11, 48}, "redescending integral_sq");
        }
        return 0.0;
    }

private:
    ScoreFunction(ScoreKind kind, RedescendingParams p) : kind_(kind), params_(p) {}

    static double square(double v) { return v * v; }

    // phi at q, with qc = 1 - q supplied by the caller at full precision.
    double eval_pair(double q, double qc) const {
        switch (kind_) {
        case ScoreKind::Sign: return 1.0;
        case ScoreKind::Wilcoxon: return q;
        case ScoreKind::NormalScores:
            // 0.5 * qc underflows to zero only for the smallest subnormal
            return normal_quantile_upper(std::max(0.5 * qc, std::numeric_limits<double>::denorm_min()));
        case ScoreKind::Redescending:
            return detail::binom_range(params_.m - 1, params_.m_lo - 1, params_.m_hi - 1, q, qc);
        }
        return 0.0;
    }

    // int_lo^hi phi^p for normal scores, p in {1, 2}.
    //
    // With z = Phi^{-1}((1+q)/2), dq = 2 pdf(z) dz, so
    //   int phi   = 2 [pdf(z_lo) - pdf(z_hi)]
    //   int phi^2 = (hi - lo) + 2 [z_lo pdf(z_lo) - z_hi pdf(z_hi)].
    // The closed forms cancel badly for short intervals away from 1, where the
    // integrand is smooth, so those pieces go to quadrature instead.
    double normal_moment(double lo, double hi, int power) const {
        auto integrand = [this, power](double q) {
            const double v = eval_pair(q, 1.0 - q);
            return power == 1 ? v : v * v;
        };
        const QuadratureOptions opt{1e-15, 1e-12, 48};
        double total = 0.0;
        if (lo < 0.5) {
            total += integrate(integrand, lo, std::min(hi, 0.5), opt, "normal score integral");
        }
        const double a = std::max(lo, 0.5);
        if (hi <= a) return total;
        const double za = normal_quantile_upper(0.5 * (1.0 - a));
        const double zb = hi >= 1.0 ? INFINITY : normal_quantile_upper(0.5 * (1.0 - hi));
        const double pa = normal_pdf(za);
        const double pb = std::isinf(zb) ? 0.0 : normal_pdf(zb);
        if (pa - pb < 1e-3 * pa) {
            return total + integrate(integrand, a, hi, opt, "normal score integral");
        }
        if (power == 1) return total + 2.0 * (pa - pb);
        const double zpb = std::isinf(zb) ? 0.0 : zb * pb;
        return total + (hi - a) + 2.0 * (za * pa - zpb);
    }

    // (1/m) sum_l [P(Bin(m, hi) >= l) - P(Bin(m, lo) >= l)]; written with the
    // tails that stay small on the side of the interval so nothing cancels.
    double redescending_integral(double lo, double hi) const {
        const int m = params_.m;
        double s = 0.0;
        for (int l = params_.m_lo; l <= params_.m_hi; ++l) {
            if (lo >= 0.5) {
                // lower tails P(Bin <= l - 1) are small near 1
                s += detail::binom_range(m, 0, l - 1, lo, 1.0 - lo) -
                     detail::binom_range(m, 0, l - 1, hi, 1.0 - hi);
            } else {
                s += detail::binom_range(m, l, m, hi, 1.0 - hi) -
                     detail::binom_range(m, l, m, lo, 1.0 - lo);
            }
        }
        return s / m;
    }

    ScoreKind kind_;
    RedescendingParams params_;
};

inline ScoreFunction ScoreFunction::parse(std::string_view spec) {
    if (spec == "sign") return sign();
    if (spec == "wilcoxon") return wilcoxon();
    if (spec == "normal") return normal();
    constexpr std::string_view redesc = "redescending";
    if (spec.substr(0, redesc.size()) == redesc) {
        std::string_view rest = spec.substr(redesc.size());
        if (rest.empty()) return redescending();
        if (rest.front() != ':') throw ConfigError("unknown score '" + std::string(spec) + "'");
        rest.remove_prefix(1);
        RedescendingParams p;
        int* fields[] = {&p.m, &p.m_lo, &p.m_hi};
        for (int i = 0; i < 3; ++i) {
            const auto comma = rest.find(',');
            const std::string token(rest.substr(0, comma));
            std::size_t used = 0;
            try {
                *fields[i] = std::stoi(token, &used);
            } catch (const std::exception&) {
                used = std::string::npos;
            }
            if (used != token.size() || token.empty() || (i < 2) == (comma == std::string_view::npos)) {
                throw ConfigError("malformed redescending score '" + std::string(spec) +
                                  "', expected redescending:m,mlo,mhi");
            }
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        return redescending(p);
    }
    throw ConfigError("unknown score '" + std::string(spec) +
                      "' (expected sign, wilcoxon, normal or redescending[:m,mlo,mhi])");
}

// phi_x(q) = phi(q) 1{q >= 1 - x}.
class TruncatedScore {
public:
    TruncatedScore(ScoreFunction base, double x) : base_(base), x_(x) {
        if (!(x > 0.0 && x <= 1.0)) throw DomainError("truncation level x must lie in (0,1]");
    }

    const ScoreFunction& base() const { return base_; }
    double level() const { return x_; }

    double evaluate(double q) const {
        const double v = base_.evaluate(q);
        return q >= 1.0 - x_ ? v : 0.0;
    }
    double operator()(double q) const { return evaluate(q); }
    double evaluate_complement(double p) const {
        const double v = base_.evaluate_complement(p);
        return p <= x_ ? v : 0.0;
    }
    double integral(double lo, double hi) const {
        detail::check_unit_interval(lo, hi, "truncated score integral");
        const double a = std::max(lo, 1.0 - x_);
        return a < hi ? base_.integral(a, hi) : 0.0;
    }

private:
    ScoreFunction base_;
    double x_;
};

// What the design-sensitivity routines need from a score.
template <class S>
concept ScoreLike = requires(const S& s, double v) {
    { s.evaluate(v) } -> std::convertible_to<double>;
    { s.evaluate_complement(v) } -> std::convertible_to<double>;
    { s.integral(v, v) } -> std::convertible_to<double>;
};

} // namespace usrt

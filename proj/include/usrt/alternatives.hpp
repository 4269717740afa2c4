#pragma once
/*
Alternative distributions G for the pair differences: normal, Laplace and
Cauchy location-scale families, plus the rare-effects mixture
(1 - eps) * base(0, scale) + eps * base(tau_big, scale).

Every distribution provides both tails (cdf and sf) and both inverse tails
(quantile and isf) so that quantities near either end keep relative precision.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usrt/error.hpp"
#include "usrt/normal.hpp"
#include "usrt/random.hpp"

namespace usrt {

enum class BaseKind { Normal, Laplace, Cauchy };

inline std::string_view to_string(BaseKind k) {
    switch (k) {
    case BaseKind::Normal: return "normal";
    case BaseKind::Laplace: return "laplace";
    case BaseKind::Cauchy: return "cauchy";
    }
    return "";
}

inline std::optional<BaseKind> parse_base_kind(std::string_view s) {
    if (s == "normal") return BaseKind::Normal;
    if (s == "laplace") return BaseKind::Laplace;
    if (s == "cauchy") return BaseKind::Cauchy;
    return std::nullopt;
}

// One location-scale component.
struct BaseDist {
    BaseKind kind = BaseKind::Normal;
    double loc = 0.0;
    double scale = 1.0;

    double log_pdf(double y) const {
        const double z = (y - loc) / scale;
        switch (kind) {
        case BaseKind::Normal: return -0.5 * z * z - std::log(kSqrt2Pi * scale);
        case BaseKind::Laplace: return -std::fabs(z) - std::log(2.0 * scale);
        case BaseKind::Cauchy: return -std::log1p(z * z) - std::log(kPi * scale);
        }
        return 0.0;
    }
    double pdf(double y) const { return std::exp(log_pdf(y)); }

    double cdf(double y) const {
        const double z = (y - loc) / scale;
        switch (kind) {
        case BaseKind::Normal: return normal_cdf(z);
        case BaseKind::Laplace: return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
        case BaseKind::Cauchy: return z < 0.0 ? std::atan2(1.0, -z) / kPi : 1.0 - std::atan2(1.0, z) / kPi;
        }
        return 0.0;
    }

    double sf(double y) const {
        const double z = (y - loc) / scale;
        switch (kind) {
        case BaseKind::Normal: return normal_sf(z);
        case BaseKind::Laplace: return z > 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
        case BaseKind::Cauchy: return z > 0.0 ? std::atan2(1.0, z) / kPi : 1.0 - std::atan2(1.0, -z) / kPi;
        }
        return 0.0;
    }

    double quantile(double p) const {
        switch (kind) {
        case BaseKind::Normal: return loc + scale * normal_quantile(p);
        case BaseKind::Laplace:
            return p < 0.5 ? loc + scale * std::log(2.0 * p) : loc - scale * std::log(2.0 * (1.0 - p));
        case BaseKind::Cauchy:
            return p < 0.5 ? loc - scale / std::tan(kPi * p) : loc + scale * std::tan(kPi * (p - 0.5));
        }
        return 0.0;
    }

    // Inverse survival function: the y with sf(y) = u.
    double isf(double u) const {
        switch (kind) {
        case BaseKind::Normal: return loc + scale * normal_quantile_upper(u);
        case BaseKind::Laplace:
            return u < 0.5 ? loc - scale * std::log(2.0 * u) : loc + scale * std::log(2.0 * (1.0 - u));
        case BaseKind::Cauchy:
            return u < 0.5 ? loc + scale / std::tan(kPi * u) : loc - scale * std::tan(kPi * (u - 0.5));
        }
        return 0.0;
    }
};

struct Draw {
    double value = 0.0;
    int component = 0; // 1 when drawn from the shifted rare-effects component
};

class AlternativeDist {
public:
    static AlternativeDist normal(double tau, double sigma) { return base({BaseKind::Normal, tau, sigma}); }
    static AlternativeDist laplace(double tau, double b) { return base({BaseKind::Laplace, tau, b}); }
    static AlternativeDist cauchy(double tau, double s) { return base({BaseKind::Cauchy, tau, s}); }

    static AlternativeDist rare_effects(BaseKind kind, double scale, double eps = 0.1,
                                        double tau_big = 5.0) {
        check_scale(scale);
        if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("rare-effects fraction must lie in [0,1]");
        if (!std::isfinite(tau_big)) throw ConfigError("rare-effects shift must be finite");
        AlternativeDist d;
        d.c0_ = {kind, 0.0, scale};
        d.c1_ = {kind, tau_big, scale};
        d.eps_ = eps;
        d.mixture_ = true;
        return d;
    }

    // "normal:tau,sigma" | "laplace:tau,b" | "cauchy:tau,s" | "rare:base,scale[,eps,taubig]"
    static AlternativeDist parse(std::string_view spec);

    bool is_mixture() const { return mixture_; }
    const BaseDist& component0() const { return c0_; }
    const BaseDist& component1() const { return c1_; }
    double eps() const { return eps_; }

    // Canonical spec string; parse(name()) reproduces the distribution.
    std::string name() const {
        auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        if (!mixture_) {
            return std::string(to_string(c0_.kind)) + ":" + num(c0_.loc) + "," + num(c0_.scale);
        }
        return "rare:" + std::string(to_string(c0_.kind)) + "," + num(c0_.scale) + "," + num(eps_) +
               "," + num(c1_.loc);
    }

    double pdf(double y) const {
        if (!mixture_) return c0_.pdf(y);
        return (1.0 - eps_) * c0_.pdf(y) + eps_ * c1_.pdf(y);
    }

    double log_pdf(double y) const {
        if (!mixture_) return c0_.log_pdf(y);
        const double a = eps_ < 1.0 ? std::log1p(-eps_) + c0_.log_pdf(y) : -INFINITY;
        const double b = eps_ > 0.0 ? std::log(eps_) + c1_.log_pdf(y) : -INFINITY;
        const double hi = std::max(a, b);
        if (hi == -INFINITY) return hi;
        return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }

    double cdf(double y) const {
        if (!mixture_) return c0_.cdf(y);
        return (1.0 - eps_) * c0_.cdf(y) + eps_ * c1_.cdf(y);
    }

    double sf(double y) const {
        if (!mixture_) return c0_.sf(y);
        return (1.0 - eps_) * c0_.sf(y) + eps_ * c1_.sf(y);
    }

    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
        if (!mixture_) return c0_.quantile(p);
        if (p > 0.5) return isf(1.0 - p);
        return solve_monotone([&](double y) { return cdf(y) - p; }, c0_.quantile(p), c1_.quantile(p));
    }

    double isf(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw DomainError("isf: u must lie in (0,1)");
        if (!mixture_) return c0_.isf(u);
        return solve_monotone([&](double y) { return u - sf(y); }, c0_.isf(u), c1_.isf(u));
    }

    // H(y) = G(y) - G(-y), the CDF of |Y|, for y >= 0.
    double abs_cdf(double y) const {
        if (y <= 0.0) return 0.0;
        const double upper = abs_sf(y);
        return upper > 0.5 ? cdf(y) - cdf(-y) : 1.0 - upper;
    }

    // 1 - H(y) = sf(y) + cdf(-y), accurate for large y.
    double abs_sf(double y) const {
        if (y <= 0.0) return 1.0;
        return sf(y) + cdf(-y);
    }

    // q_x with H(q_x) = x, for x in (0,1).
    double abs_quantile(double x) const {
        if (!(x > 0.0 && x < 1.0)) throw DomainError("abs_quantile: x must lie in (0,1)");
        const double target_sf = 1.0 - x;
        auto gap = [&](double q) {
            // increasing in q
            return x <= 0.5 ? abs_cdf(q) - x : target_sf - abs_sf(q);
        };
        double hi = overall_scale();
        while (gap(hi) < 0.0) {
            hi *= 2.0;
            if (!std::isfinite(hi)) throw NumericError("abs_quantile: bracket expansion failed");
        }
        return solve_monotone(gap, 0.0, hi);
    }

    Draw draw(Stream& s) const {
        if (!mixture_) return {c0_.quantile(s.uniform()), 0};
        const bool shifted = s.bernoulli(eps_);
        const BaseDist& c = shifted ? c1_ : c0_;
        return {c.quantile(s.uniform()), shifted ? 1 : 0};
    }

    std::vector<double> sample(std::size_t n, Stream& s) const {
        std::vector<double> out(n);
        for (auto& v : out) v = draw(s).value;
        return out;
    }

    std::vector<double> sample(std::size_t n, std::uint64_t seed) const {
        Stream s(seed);
        return sample(n, s);
    }

    double overall_scale() const {
        return c0_.scale + (mixture_ ? std::fabs(c1_.loc) : std::fabs(c0_.loc));
    }

private:
    static void check_scale(double s) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scale parameters must be positive");
    }

    static AlternativeDist base(BaseDist b) {
        check_scale(b.scale);
        if (!std::isfinite(b.loc)) throw ConfigError("location parameters must be finite");
        AlternativeDist d;
        d.c0_ = b;
        d.c1_ = b;
        return d;
    }

    // Root of an increasing function on the bracket spanned by a and b.
    template <class F>
    static double solve_monotone(F&& f, double a, double b) {
        double lo = std::min(a, b);
        double hi = std::max(a, b);
        if (lo == hi) return lo;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    BaseDist c0_;
    BaseDist c1_;
    double eps_ = 0.0;
    bool mixture_ = false;
};

namespace detail {

inline std::vector<std::string> split_params(std::string_view s) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = s.find(',');
        out.emplace_back(s.substr(0, comma));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

inline double parse_param(const std::string& token, std::string_view spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (token.empty() || used != token.size() || !std::isfinite(v)) {
        throw ConfigError("bad numeric parameter '" + token + "' in distribution '" +
                          std::string(spec) + "'");
    }
    return v;
}

} // namespace detail

inline AlternativeDist AlternativeDist::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("distribution '" + std::string(spec) + "' needs parameters, e.g. normal:0.5,1");
    }
    const std::string_view head = spec.substr(0, colon);
    const auto params = detail::split_params(spec.substr(colon + 1));
    if (head == "rare") {
        if (params.size() != 2 && params.size() != 4) {
            throw ConfigError("expected rare:base,scale[,eps,taubig], got '" + std::string(spec) + "'");
        }
        const auto kind = parse_base_kind(params[0]);
        if (!kind) throw ConfigError("unknown rare-effects base '" + params[0] + "'");
        const double scale = detail::parse_param(params[1], spec);
        if (params.size() == 2) return rare_effects(*kind, scale);
        return rare_effects(*kind, scale, detail::parse_param(params[2], spec),
                            detail::parse_param(params[3], spec));
    }
    const auto kind = parse_base_kind(head);
    if (!kind) throw ConfigError("unknown distribution '" + std::string(head) + "'");
    if (params.size() != 2) {
        throw ConfigError("expected " + std::string(head) + ":location,scale, got '" +
                          std::string(spec) + "'");
    }
    return base({*kind, detail::parse_param(params[0], spec), detail::parse_param(params[1], spec)});
}

struct TailRatio {
    double value = 0.0;     // min over the tail grid of g(q) / g(-q); +inf when diverging
    bool diverges = false;  // ratio increasing without bound across the grid
    double last_ratio = 0.0;
    std::vector<double> q_grid;
};

// Geometric grid over [10, 1e4] multiplied by the distribution's overall scale.
inline std::vector<double> default_tail_grid(const AlternativeDist& d, std::size_t points = 64) {
    std::vector<double> q(points);
    const double s = d.overall_scale();
    for (std::size_t j = 0; j < points; ++j) {
        q[j] = s * 10.0 * std::pow(1e3, static_cast<double>(j) / double(points - 1));
    }
    return q;
}

// Numeric proxy for liminf_{q -> inf} g(q) / g(-q): the minimum of the ratio
// over the upper half of the grid. A ratio that keeps increasing and exceeds
// e^50 at the end of the grid is reported as divergent.
inline TailRatio tail_ratio_liminf(const AlternativeDist& d, std::vector<double> q_grid = {}) {
    if (q_grid.empty()) q_grid = default_tail_grid(d);
    if (q_grid.size() < 2) throw ConfigError("tail grid needs at least two points");
    std::vector<double> log_ratio(q_grid.size());
    for (std::size_t j = 0; j < q_grid.size(); ++j) {
        const double up = d.log_pdf(q_grid[j]);
        const double down = d.log_pdf(-q_grid[j]);
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw NumericError("tail_ratio_liminf: zero density at q = " + std::to_string(q_grid[j]));
        }
        log_ratio[j] = up - down;
    }
    TailRatio out;
    out.q_grid = std::move(q_grid);
    const std::size_t start = log_ratio.size() / 2;
    double min_log = INFINITY;
    bool increasing = true;
    for (std::size_t j = start; j < log_ratio.size(); ++j) {
        min_log = std::min(min_log, log_ratio[j]);
        if (j > start && !(log_ratio[j] > log_ratio[j - 1])) increasing = false;
    }
    out.last_ratio = std::exp(log_ratio.back());
    out.diverges = increasing && log_ratio.back() > 50.0;
    out.value = out.diverges ? INFINITY : std::exp(min_log);
    return out;
}

} // namespace usrt

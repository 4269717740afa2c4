#pragma once
/*
Design sensitivity of fixed and uniform general signed rank tests.

For a score phi and alternative G with |Y|-CDF H,

  pi(x) = int_{H(y) >= 1-x, y > 0} phi(H(y)) dG(y) / int_{1-x}^1 phi,

and the fixed test has pi = pi(1). The design sensitivity at truncation x is
pi(x) / (1 - pi(x)); the uniform test attains the supremum over x.

The numerator is computed in the upper-tail variable u = 1 - G(y), on
(0, 1 - G(q_{1-x})]. There 1 - H(y) = u + G(-y) is available without
cancellation and phi(H) = phi.evaluate_complement(1 - H). The endpoint u = 0
(y = +inf) is where the normal-scores integrand is unbounded, so the integral
is taken over s = log(U / u), which turns the singular endpoint into an
exponentially decaying tail.
*/

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "usrt/alternatives.hpp"
#include "usrt/error.hpp"
#include "usrt/format.hpp"
#include "usrt/parallel.hpp"
#include "usrt/quadrature.hpp"
#include "usrt/score.hpp"

namespace usrt {

inline constexpr double kInfinitePiThreshold = 1.0 - 1e-9;

// pi / (1 - pi), with +inf once pi is within 1e-9 of one.
inline double gamma_of_pi(double pi) {
    if (pi >= kInfinitePiThreshold) return std::numeric_limits<double>::infinity();
    return pi / (1.0 - pi);
}

namespace detail {

// Length of the s-range; e^{-60} U is far below double resolution of U.
inline constexpr double kTailSpan = 60.0;

template <ScoreLike S>
double pi_numerator(const S& score, const AlternativeDist& d, double x) {
    const double upper = x >= 1.0 ? d.sf(0.0) : d.sf(d.abs_quantile(1.0 - x));
    if (!(upper > 0.0)) return 0.0;
    constexpr double below_one = 1.0 - 0x1.0p-53;
    auto integrand = [&](double s) {
        const double w = std::exp(-s);
        const double u = upper * w;
        if (!(u > 0.0)) return 0.0;
        const double y = d.isf(u);
        double p = u + d.cdf(-y);  // 1 - H(y)
        p = std::clamp(p, std::numeric_limits<double>::min(), below_one);
        return score.evaluate_complement(p) * w;
    };
    const QuadratureOptions opt{1e-13, 1e-10, 50};
    return upper * integrate(integrand, 0.0, kTailSpan, opt, "design-sensitivity numerator");
}

template <class S>
std::string score_label(const S& score) {
    if constexpr (requires { score.name(); }) {
        return score.name();
    } else {
        return "custom";
    }
}

} // namespace detail

template <ScoreLike S>
double pi_of_x(const S& score, const AlternativeDist& d, double x) {
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("pi_of_x: x must lie in (0,1]");
    const double denom = score.integral(x >= 1.0 ? 0.0 : 1.0 - x, 1.0);
    if (!(denom > 0.0)) throw NumericError("pi_of_x: score integral over [1-x, 1] is not positive");
    return detail::pi_numerator(score, d, x) / denom;
}

template <ScoreLike S>
double pi_fixed(const S& score, const AlternativeDist& d) {
    return pi_of_x(score, d, 1.0);
}

struct XGrid {
    double x_min = 1e-4;
    double x_max = 1.0;
    std::size_t points = 200;

    std::vector<double> values() const {
        if (!(x_min > 0.0 && x_min <= x_max && x_max <= 1.0) || points < 1) {
            throw ConfigError("x grid needs 0 < x_min <= x_max <= 1 and at least one point");
        }
        std::vector<double> xs(points);
        if (points == 1) {
            xs[0] = x_max;
            return xs;
        }
        const double la = std::log(x_min);
        const double lb = std::log(x_max);
        for (std::size_t j = 0; j < points; ++j) {
            xs[j] = j + 1 == points ? x_max
                                    : std::exp(la + (lb - la) * static_cast<double>(j) / double(points - 1));
        }
        xs[0] = x_min;
        return xs;
    }
};

struct PiCurve {
    std::vector<double> x;
    std::vector<double> pi;
    std::vector<double> gamma;
    std::string score;
    std::string dist;
};

struct UniformDesign {
    double gamma_tilde = 1.0;     // +inf sentinel when infinite
    bool infinite = false;
    bool infinite_by_tail = false; // the tail-ratio lower bound diverges
    double grid_sup = 1.0;         // sup over the grid of pi / (1 - pi)
    double argmax_x = 1.0;
    double pi_at_argmax = 0.5;
    TailRatio tail;
    PiCurve curve;
};

template <ScoreLike S>
PiCurve pi_curve(const S& score, const AlternativeDist& d, const XGrid& grid = {}) {
    PiCurve c;
    c.x = grid.values();
    c.pi.resize(c.x.size());
    c.gamma.resize(c.x.size());
    c.score = detail::score_label(score);
    c.dist = d.name();
    parallel_for(c.x.size(), [&](std::size_t j) {
        c.pi[j] = pi_of_x(score, d, c.x[j]);
        c.gamma[j] = gamma_of_pi(c.pi[j]);
    });
    return c;
}

// Lower bound on the uniform design sensitivity from the density tail ratio.
template <ScoreLike S>
TailRatio tail_bound(const S& score, const AlternativeDist& d) {
    if (!(score.integral(1.0 - 1e-6, 1.0) > 0.0)) {
        throw ConfigError("tail bound needs a score with positive mass near 1");
    }
    return tail_ratio_liminf(d);
}

// Uniform design sensitivity: supremum of pi(x)/(1 - pi(x)) over the x grid.
// Reported as infinite when pi reaches 1 - 1e-9 on the grid or when the
// tail-ratio lower bound diverges.
template <ScoreLike S>
UniformDesign gamma_tilde_uniform(const S& score, const AlternativeDist& d, const XGrid& grid = {}) {
    UniformDesign out;
    out.curve = pi_curve(score, d, grid);
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.curve.x.size(); ++j) {
        if (out.curve.pi[j] > out.curve.pi[best]) best = j;
    }
    out.argmax_x = out.curve.x[best];
    out.pi_at_argmax = out.curve.pi[best];
    out.grid_sup = out.curve.gamma[best];
    out.tail = tail_bound(score, d);
    out.infinite_by_tail = out.tail.diverges;
    out.infinite = std::isinf(out.grid_sup) || out.infinite_by_tail;
    out.gamma_tilde = out.infinite ? std::numeric_limits<double>::infinity() : out.grid_sup;
    return out;
}

// CSV with columns x,pi,gamma; `comments` are emitted first as "# " lines.
inline void write_curve_csv(std::ostream& os, const PiCurve& curve,
                            const std::vector<std::string>& comments = {}) {
    for (const auto& line : comments) os << "# " << line << "\n";
    os << "x,pi,gamma\n";
    for (std::size_t j = 0; j < curve.x.size(); ++j) {
        write_number(os, curve.x[j]);
        os << ",";
        write_number(os, curve.pi[j]);
        os << ",";
        write_number(os, curve.gamma[j]);
        os << "\n";
    }
}

} // namespace usrt

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "usrt/error.hpp"

namespace usrt {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_depth = 48;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = true;
};

namespace detail {

template <class F>
struct SimpsonState {
    F& f;
    long evaluations = 0;
    bool converged = true;
    double error = 0.0;

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        evaluations += 2;
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::fabs(delta) <= 15.0 * tol || !(m > a && b > m)) {
            error += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth <= 0) {
            converged = false;
            error += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

} // namespace detail

// Adaptive Simpson quadrature of f over [a, b]. The tolerance target is
// max(abs_tol, rel_tol * |coarse estimate|), refined after a first pass so that
// the relative target tracks the integral rather than the initial guess.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    QuadratureResult out;
    if (a == b) return out;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    auto run = [&](double tol) {
        detail::SimpsonState<std::remove_reference_t<F>> st{f};
        const double v = st.recurse(a, b, fa, fm, fb, whole, tol, opt.max_depth);
        out.value = v;
        out.error_estimate = st.error;
        out.evaluations += st.evaluations + 3;
        out.converged = st.converged;
    };

    run(std::max(opt.abs_tol, opt.rel_tol * std::fabs(whole)));
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::fabs(out.value));
    if (out.error_estimate > target) run(target);
    return out;
}

// Same as adaptive_simpson but throws NumericError when the depth limit is hit.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {},
                 const char* what = "integrate") {
    const QuadratureResult r = adaptive_simpson(f, a, b, opt);
    if (!r.converged || !std::isfinite(r.value)) {
        std::ostringstream msg;
        msg << what << ": adaptive Simpson did not converge on [" << a << ", " << b
            << "], estimate " << r.value << " +/- " << r.error_estimate << " after "
            << r.evaluations << " evaluations";
        throw NumericError(msg.str());
    }
    return r.value;
}

} // namespace usrt

#pragma once
/*
Standard normal distribution helpers.

The quantile uses Acklam's rational approximation (relative error ~1.15e-9)
followed by one Halley step against the erfc-based CDF, which brings the
result to near machine precision over the whole open unit interval.
*/

#include <cmath>
#include <limits>

#include "usrt/error.hpp"

namespace usrt {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Upper tail P(Z > z), accurate for large positive z.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

namespace detail {

inline double acklam_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace detail

// Phi^{-1}(p) for p in (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("normal_quantile: p must lie in (0,1)");
    }
    // Work in the smaller tail so that the Halley correction is computed
    // against a CDF value that carries full relative precision.
    if (p > 0.5) return -normal_quantile(1.0 - p);
    double x = detail::acklam_quantile(p);
    const double e = normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    // exp overflows only for subnormal p, where the rational value is kept
    if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
    return x;
}

// Phi^{-1}(1 - q) computed from the upper-tail mass q without forming 1 - q.
inline double normal_quantile_upper(double q) { return -normal_quantile(q); }

} // namespace usrt

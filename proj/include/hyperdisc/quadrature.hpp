#pragma once

#include <cmath>
#include <concepts>

#include "hyperdisc/errors.hpp"

namespace hyperdisc {

namespace detail {

template <typename F>
double adaptive_simpson_step(const F& f, double a, double b, double fa, double fm,
                             double fb, double whole, double tol, int depth,
                             double* worst_tol) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::fabs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    if (depth <= 0) {
        if (std::fabs(err) > *worst_tol) *worst_tol = std::fabs(err);
        return left + right + err / 15.0;
    }
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst_tol) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst_tol);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// Throws numeric_error (carrying the achieved tolerance) if refinement bottoms
/// out before the local error estimates fall below tol.
template <typename F>
    requires std::invocable<F, double>
double integrate(const F& f, double a, double b, double tol = 1e-9, int max_depth = 48) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double worst = 0.0;
    const double result =
        detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, &worst);
    if (worst > 0.0) {
        throw numeric_error("quadrature did not converge to requested tolerance", worst);
    }
    return result;
}

} // namespace hyperdisc

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "harris/errors.hpp"

namespace harris {

enum class IntegralStatus { Convergent, Divergent };

// Verdict of a singular-integral evaluation near 0. `value` and `abs_error`
// are meaningful only when status == Convergent.
struct IntegralVerdict {
    IntegralStatus status = IntegralStatus::Divergent;
    double value = 0.0;
    double abs_error = 0.0;

    bool convergent() const { return status == IntegralStatus::Convergent; }
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa,
                      double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fb, double fm,
                                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        return std::numeric_limits<double>::infinity();
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0) {
        if (std::abs(delta) > 64.0 * tol)
            throw QuadratureError("adaptive quadrature stalled: refinement limit hit");
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on [a,b]. Returns +inf when the integrand is non-finite
// anywhere it is sampled (the caller treats that as a divergence signal).
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int max_depth = 48) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        return std::numeric_limits<double>::infinity();
    const double whole = simpson(f, a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, b, fa, fb, fm, whole, tol, max_depth);
}

// Integrates f over (0, hi] by dyadic shells [hi*2^-(k+1), hi*2^-k].
// Divergence rule: a shell with non-finite contribution, or shell sums that
// have not started contracting geometrically after `probe_shells` shells.
// Otherwise the partial sum plus a geometric tail bound gives the value.
inline IntegralVerdict shell_integral(const std::function<double(double)>& f,
                                      double hi, double tol, int probe_shells = 40,
                                      int max_shells = 300) {
    constexpr double kGeoRatio = 0.95;  // contraction threshold for the tail test
    std::vector<double> shells;
    double sum = 0.0, quad_err = 0.0;
    double edge = hi;
    for (int k = 0; k < max_shells; ++k) {
        const double lo = 0.5 * edge;
        const double shell_tol = tol * std::pow(2.0, -(k + 2));
        const double s = adaptive_simpson(f, lo, edge, shell_tol);
        if (!std::isfinite(s)) return {IntegralStatus::Divergent, 0.0, 0.0};
        shells.push_back(s);
        sum += s;
        quad_err += shell_tol;
        edge = lo;

        if (k >= 4) {
            double ratio = 0.0;
            for (int j = 0; j < 3; ++j) {
                const double prev = shells[shells.size() - 2 - j];
                const double cur = shells[shells.size() - 1 - j];
                if (std::abs(prev) > 0.0)
                    ratio = std::max(ratio, std::abs(cur) / std::abs(prev));
                else if (std::abs(cur) > 0.0)
                    ratio = 1.0;
            }
            if (ratio < kGeoRatio) {
                const double tail = std::abs(shells.back()) * ratio / (1.0 - ratio);
                if (tail <= 0.5 * tol)
                    return {IntegralStatus::Convergent, sum, tail + quad_err};
            } else if (k + 1 >= probe_shells) {
                return {IntegralStatus::Divergent, 0.0, 0.0};
            }
        }
    }
    throw QuadratureError("shell refinement exhausted without convergence verdict");
}

}  // namespace detail

}  // namespace harris

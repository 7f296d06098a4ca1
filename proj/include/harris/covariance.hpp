#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "harris/errors.hpp"
#include "harris/quadrature.hpp"

namespace harris {

// Stationary covariation function phi, by named family. All families are
// even, equal 1 at the origin and are strictly below 1 in modulus elsewhere.
enum class PhiFamily { Arratia, ExpAlpha, Gaussian };

struct CovarianceModel {
    PhiFamily family = PhiFamily::Arratia;
    double alpha = 1.0;  // ExpAlpha only, must lie in (0, 2]

    static CovarianceModel arratia() { return {PhiFamily::Arratia, 1.0}; }
    static CovarianceModel exp_alpha(double a) { return {PhiFamily::ExpAlpha, a}; }
    static CovarianceModel gaussian() { return {PhiFamily::Gaussian, 1.0}; }

    void validate() const {
        if (family == PhiFamily::ExpAlpha && !(alpha > 0.0 && alpha <= 2.0))
            throw ConfigError("alpha must be in (0, 2], got " + std::to_string(alpha));
    }

    std::string name() const {
        switch (family) {
            case PhiFamily::Arratia: return "arratia";
            case PhiFamily::ExpAlpha: return "exp_alpha";
            case PhiFamily::Gaussian: return "gaussian";
        }
        return "?";
    }
};

inline double evaluate(const CovarianceModel& m, double x) {
    switch (m.family) {
        case PhiFamily::Arratia: return x == 0.0 ? 1.0 : 0.0;
        case PhiFamily::ExpAlpha: return std::exp(-std::pow(std::abs(x), m.alpha));
        case PhiFamily::Gaussian: return std::exp(-x * x);
    }
    return 0.0;
}

// 1 - phi(x), computed without cancellation for small x. The coalescence
// integrand divides by this, so the naive form would hit 0/0 noise.
inline double one_minus_phi(const CovarianceModel& m, double x) {
    switch (m.family) {
        case PhiFamily::Arratia: return x == 0.0 ? 0.0 : 1.0;
        case PhiFamily::ExpAlpha: return -std::expm1(-std::pow(std::abs(x), m.alpha));
        case PhiFamily::Gaussian: return -std::expm1(-x * x);
    }
    return 1.0;
}

inline Eigen::MatrixXd gram(const CovarianceModel& m, std::span<const double> points) {
    const Eigen::Index n = Eigen::Index(points.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = evaluate(m, points[size_t(i)] - points[size_t(j)]);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

namespace detail {

inline void require_monotone(const CovarianceModel& m, double hi) {
    constexpr int kProbes = 257;
    double prev = evaluate(m, 0.0);
    for (int i = 1; i < kProbes; ++i) {
        const double x = hi * double(i) / (kProbes - 1);
        const double cur = evaluate(m, x);
        if (cur > prev + 1e-14)
            throw NonMonotoneError("phi is not monotone non-increasing on [0, " +
                                   std::to_string(hi) + "]");
        prev = cur;
    }
}

// Largest x in [0,1] with phi(x) >= level, for even phi monotone on [0,inf).
// Bisection keeps the invariant phi(lo) >= level, so `lo` is always inside
// the level set; a level set of measure zero therefore reports 0 rather than
// the bisection midpoint.
inline double level_set_radius(const CovarianceModel& m, double level) {
    if (evaluate(m, 1.0) >= level) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate(m, mid) >= level)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace detail

// Dudley continuity test for the tangent field: evaluates
//   int_{0+}^{1} |ln lambda{x in [0,1] : phi(x) >= 1-u^2}|^{1/2} du,
// with the level-set measure taken as min(2 x*(u), 1). Convergent means the
// field has a continuous version.
inline IntegralVerdict dudley_integral(const CovarianceModel& model, double tol) {
    model.validate();
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    detail::require_monotone(model, 1.0);
    auto integrand = [&model](double u) {
        const double radius = detail::level_set_radius(model, 1.0 - u * u);
        const double measure = std::min(2.0 * radius, 1.0);
        if (measure <= 0.0) return std::numeric_limits<double>::infinity();
        return std::sqrt(std::abs(std::log(measure)));
    };
    return detail::shell_integral(integrand, 1.0, tol);
}

// Coalescence-vs-continuity test: int_0^eps x dx / (1 - phi(x)).
// Convergent means point motions coalesce; divergent means they stay
// continuous in the initial point.
inline IntegralVerdict coalescence_criterion(const CovarianceModel& model, double eps,
                                             double tol) {
    model.validate();
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must be in (0, 1]");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    detail::require_monotone(model, eps);
    auto integrand = [&model](double x) {
        const double d = one_minus_phi(model, x);
        if (d <= 0.0) return std::numeric_limits<double>::infinity();
        return x / d;
    };
    return detail::shell_integral(integrand, eps, tol);
}

}  // namespace harris

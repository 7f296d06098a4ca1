#pragma once

// Independent numeric oracles for the test suite. Everything here is
// deliberately self-contained (fixed-refinement Simpson, closed forms) and
// shares no code with the library's quadrature or sampling paths.

#include <cmath>
#include <functional>

namespace oracle {

// Composite Simpson with 2^k panels, refined until two levels agree.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-11) {
    double prev = 0.0;
    for (int k = 6; k <= 22; ++k) {
        const int n = 1 << k;
        const double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        s *= h / 3.0;
        if (k > 6 && std::abs(s - prev) < tol * (1.0 + std::abs(s))) return s;
        prev = s;
    }
    return prev;
}

// E max_{i<=n} |Z_i| for iid standard normals: int_0^inf (1 - erf(x/sqrt2)^n) dx.
inline double emax_abs_normal(int n) {
    return simpson(
        [n](double x) { return 1.0 - std::pow(std::erf(x / std::sqrt(2.0)), n); }, 0.0,
        12.0);
}

// E max_{i<=n} Z_i for iid standard normals.
inline double emax_normal(int n) {
    auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return simpson(
        [&, n](double x) { return x * n * pdf(x) * std::pow(cdf(x), n - 1); }, -12.0,
        12.0);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(two independent Brownian particles at distance d meet before t):
// reflection principle for the difference walk, variance rate 2.
inline double meet_probability(double d, double t) {
    return 2.0 * (1.0 - std_normal_cdf(d / std::sqrt(2.0 * t)));
}

}  // namespace oracle

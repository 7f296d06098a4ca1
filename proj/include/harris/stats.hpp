#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace harris {

// Pairwise summation in a fixed order: reductions stay bitwise identical
// no matter how replicas were scheduled across threads.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / double(v.size());
}

inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq) / double(v.size() - 1);
}

inline double stderr_of_mean(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(sample_variance(v) / double(v.size()));
}

// Linear-interpolation quantile on a sorted copy, q in [0,1].
inline double quantile(std::span<const double> v, double q) {
    if (v.empty()) return 0.0;
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double pos = q * double(s.size() - 1);
    const size_t lo = size_t(pos);
    if (lo + 1 >= s.size()) return s.back();
    const double frac = pos - double(lo);
    return s[lo] * (1.0 - frac) + s[lo + 1] * frac;
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

inline double interquartile_range(std::span<const double> v) {
    return quantile(v, 0.75) - quantile(v, 0.25);
}

// Two-sample Kolmogorov-Smirnov distance and the large-sample critical value
// at significance alpha.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / double(sa.size()) -
                                 double(j) / double(sb.size())));
    }
    return d;
}

inline double ks_critical(size_t n, size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(double(n + m) / (double(n) * double(m)));
}

}  // namespace harris

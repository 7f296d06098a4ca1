#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace harris {

// Test functional f: R^dim -> R for the comparison and interpolation checks.
// `hessian` may be empty when only values are needed (raw max/min).
struct TestFunction {
    int dim = 0;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, Eigen::MatrixXd&)> hessian;
};

// f(x) = x1 * x2; constant Hessian with a single off-diagonal pair.
inline TestFunction product_first_two(int dim) {
    TestFunction f;
    f.dim = dim;
    f.value = [](std::span<const double> x) { return x[0] * x[1]; };
    f.hessian = [dim](std::span<const double>, Eigen::MatrixXd& h) {
        h.setZero(dim, dim);
        h(0, 1) = 1.0;
        h(1, 0) = 1.0;
    };
    return f;
}

// Coordinate max smoothed by log-sum-exp with sharpness beta; C^2, submodular
// (off-diagonal Hessian entries are -beta p_i p_j <= 0) and row sums vanish.
inline TestFunction smoothed_max(int dim, double beta = 50.0) {
    TestFunction f;
    f.dim = dim;
    f.value = [beta](std::span<const double> x) {
        const double m = *std::max_element(x.begin(), x.end());
        double z = 0.0;
        for (double v : x) z += std::exp(beta * (v - m));
        return m + std::log(z) / beta;
    };
    f.hessian = [beta, dim](std::span<const double> x, Eigen::MatrixXd& h) {
        const double m = *std::max_element(x.begin(), x.end());
        Eigen::VectorXd p(dim);
        double z = 0.0;
        for (int i = 0; i < dim; ++i) {
            p[i] = std::exp(beta * (x[size_t(i)] - m));
            z += p[i];
        }
        p /= z;
        h = -beta * (p * p.transpose());
        h.diagonal() += beta * p;
    };
    return f;
}

inline TestFunction raw_max(int dim) {
    TestFunction f;
    f.dim = dim;
    f.value = [](std::span<const double> x) {
        return *std::max_element(x.begin(), x.end());
    };
    return f;
}

inline TestFunction raw_min(int dim) {
    TestFunction f;
    f.dim = dim;
    f.value = [](std::span<const double> x) {
        return *std::min_element(x.begin(), x.end());
    };
    return f;
}

inline TestFunction linear(std::vector<double> weights) {
    TestFunction f;
    f.dim = int(weights.size());
    f.value = [w = std::move(weights)](std::span<const double> x) {
        double s = 0.0;
        for (size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
        return s;
    };
    f.hessian = [dim = f.dim](std::span<const double>, Eigen::MatrixXd& h) {
        h.setZero(dim, dim);
    };
    return f;
}

}  // namespace harris

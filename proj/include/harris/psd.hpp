#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "harris/errors.hpp"
#include "harris/rng.hpp"

namespace harris {

// Triangular square root of a (possibly rank-deficient) covariance matrix.
// Coalesced particles make Gram matrices exactly singular, so rank
// deficiency is the normal case here, not an error.
struct PsdFactor {
    Eigen::MatrixXd lower;     // lower-triangular, lower * lower^T ~= input + jitter*I
    double jitter_used = 0.0;
    bool clipped = false;      // eigenvalue clipping was needed before factoring

    Eigen::Index dim() const { return lower.rows(); }
};

namespace detail {

// Cholesky that tolerates zero pivots: a pivot within rounding of zero marks
// a linearly dependent direction and zeroes its column, which reproduces
// degenerate covariances exactly (duplicated rows factor to duplicated rows).
// A pivot below -neg_tol means the matrix is indefinite at this jitter level.
inline std::optional<Eigen::MatrixXd> semidefinite_cholesky(const Eigen::MatrixXd& a,
                                                            double neg_tol) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -neg_tol) return std::nullopt;
        if (d <= 0.0) continue;  // dependent direction, column stays zero
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

}  // namespace detail

// Factors `matrix` as lower * lower^T, escalating a diagonal jitter
// 0, 1e-12, 1e-10, ... up to max_jitter; if every level fails, clips
// negative eigenvalues at zero (nearest PSD in Frobenius norm) and factors
// the clipped matrix.
inline PsdFactor factor_psd(const Eigen::MatrixXd& matrix, double max_jitter) {
    if (matrix.rows() != matrix.cols())
        throw NotSymmetricError("matrix is not square");
    if (max_jitter < 0.0) throw ConfigError("max_jitter must be >= 0");
    const Eigen::Index n = matrix.rows();
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NotSymmetricError("matrix is not symmetric");

    const double neg_tol = 4.0 * double(n) * std::numeric_limits<double>::epsilon() * scale;
    double jitter = 0.0;
    while (true) {
        Eigen::MatrixXd shifted = matrix;
        if (jitter > 0.0) shifted.diagonal().array() += jitter;
        if (auto l = detail::semidefinite_cholesky(shifted, neg_tol))
            return {std::move(*l), jitter, false};
        if (jitter == 0.0)
            jitter = 1e-12;
        else
            jitter *= 100.0;
        if (jitter > max_jitter) break;
    }

    // Indefinite beyond the jitter budget: project onto the PSD cone.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    if (es.info() != Eigen::Success)
        throw FactorizationError("eigendecomposition failed");
    Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd clipped =
        es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    clipped = 0.5 * (clipped + clipped.transpose());
    if (auto l = detail::semidefinite_cholesky(clipped, 1e4 * neg_tol))
        return {std::move(*l), 0.0, true};
    throw FactorizationError("matrix could not be factored even after clipping");
}

// Draws scale * lower * xi with xi standard normal; covariance of the result
// is scale^2 * (lower * lower^T).
inline Eigen::VectorXd sample_increment(const PsdFactor& factor, double scale,
                                        RngStream& rng) {
    if (!(scale > 0.0)) throw ConfigError("scale must be positive");
    const Eigen::Index n = factor.dim();
    Eigen::VectorXd xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi[i] = rng.next_normal();
    Eigen::VectorXd out = factor.lower.triangularView<Eigen::Lower>() * xi;
    out *= scale;
    return out;
}

}  // namespace harris

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "harris/flow.hpp"
#include "harris/runner.hpp"
#include "harris/stats.hpp"
#include "harris/test_functions.hpp"

namespace harris {

namespace lanes {
// RngStream lane allocation; replicas of different operations never share a
// stream even under a common seed.
constexpr std::uint64_t kFlow = 0;
constexpr std::uint64_t kTangentPath = 1;
constexpr std::uint64_t kCoupled = 2;
constexpr std::uint64_t kTangentMarginal = 3;
constexpr std::uint64_t kSlepianM = 4;
constexpr std::uint64_t kSlepianN = 5;
constexpr std::uint64_t kConcentration = 6;
constexpr std::uint64_t kInterpolationLhs = 7;
constexpr std::uint64_t kInterpolationRhs = 8;
constexpr std::uint64_t kInterpolationCheck = 9;
constexpr std::uint64_t kSubmodularity = 10;
}  // namespace lanes

inline double sup_deviation(const FlowPathRecord& rec, double t) {
    const size_t i = rec.time_index(t);
    double best = 0.0;
    for (size_t k = 0; k < rec.initial.size(); ++k)
        best = std::max(best, std::abs(rec.values[i][k] - rec.initial[k]));
    return best;
}

inline std::vector<std::pair<double, int>> cluster_count_series(
    const FlowPathRecord& rec) {
    std::vector<std::pair<double, int>> out;
    out.reserve(rec.times.size());
    for (size_t i = 0; i < rec.times.size(); ++i)
        out.emplace_back(rec.times[i], rec.cluster_counts[i]);
    return out;
}

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

// Per-replica sup_k |Y(u_k, t) - u_k| for the tangent field on arbitrary
// points. Y(., t) - u is exactly N(0, t G), so one multivariate draw per
// replica samples the marginal without time-stepping error.
inline std::vector<double> tangent_sup_samples(const CovarianceModel& phi,
                                               std::span<const double> points,
                                               double t, int replicas,
                                               std::uint64_t seed,
                                               unsigned threads = 0) {
    const Eigen::MatrixXd g = gram(phi, points);
    const PsdFactor f = factor_psd(g, detail::kMaxJitter);
    const double sq = std::sqrt(t);
    std::vector<double> sups(static_cast<size_t>(replicas));
    parallel_for(size_t(replicas), threads, [&](size_t r) {
        RngStream rng(seed, r, lanes::kTangentMarginal);
        const Eigen::VectorXd z = sample_increment(f, sq, rng);
        sups[r] = z.cwiseAbs().maxCoeff();
    });
    return sups;
}

// E(t) = E sup_k |Y(k t^(1/2), t) - k t^(1/2)| over the sqrt grid.
inline Estimate estimate_E(const SimConfig& cfg, double t, int replicas,
                           unsigned threads = 0) {
    if (cfg.grid != GridRule::SqrtGrid)
        throw ConfigError("estimate_E requires the sqrt grid rule");
    const auto u = make_grid(t);
    const auto sups = tangent_sup_samples(cfg.phi, u, t, replicas, cfg.seed, threads);
    return {mean(sups), stderr_of_mean(sups)};
}

// One horizon t_n = q^n of a deviation series. Normalizer fields are NaN
// when undefined (the lnln normalizer needs t < 1/e).
struct DeviationPoint {
    double t = 0.0;
    int grid_size = 0;
    double mean_sup = 0.0, median_sup = 0.0, stderr_sup = 0.0;
    double norm_tlogt = 0.0, norm_tloglogt = 0.0;
    double e_t = 0.0, e_t_stderr = 0.0;
    double ratio_tlogt = 0.0, ratio_tloglogt = 0.0, ratio_centered = 0.0;
    double mean_centered = 0.0, iqr_centered = 0.0;
    // coupling series only:
    double median_gap_norm = std::numeric_limits<double>::quiet_NaN();
    double median_qv_over_t = std::numeric_limits<double>::quiet_NaN();
};

struct DeviationSeries {
    double q = 0.0;
    std::vector<DeviationPoint> points;  // t strictly decreasing
};

namespace detail {

inline double norm_tlogt(double t) { return std::sqrt(t * std::log(1.0 / t)); }

inline double norm_tloglogt(double t) {
    if (!(t < std::exp(-1.0)))
        return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(2.0 * t * std::log(std::log(1.0 / t)));
}

inline void check_series_range(double q, int n_min, int n_max) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must be in (0, 1)");
    if (n_min > n_max) throw ConfigError("n_min must not exceed n_max");
    if (!(std::pow(q, n_min) < std::exp(-1.0)))
        throw ConfigError("series needs t = q^n below 1/e; raise n_min");
}

}  // namespace detail

// Sup-deviation statistics of the flow along t_n = q^n, normalized by
// sqrt(t ln 1/t), sqrt(2 t lnln 1/t) and the tangent sup mean E(t).
inline DeviationSeries lil_series(const SimConfig& base, double q, int n_min,
                                  int n_max, int e_replicas = 20000,
                                  unsigned threads = 0) {
    detail::check_series_range(q, n_min, n_max);
    DeviationSeries series;
    series.q = q;
    for (int n = n_min; n <= n_max; ++n) {
        const double t = std::pow(q, n);
        SimConfig cfg = base;
        cfg.t_target = t;
        cfg.dt = base.dt > 0.0 ? base.dt : 0.0;
        cfg.grid = GridRule::SqrtGrid;
        cfg.validate();

        std::vector<double> sups(static_cast<size_t>(cfg.replicas));
        const bool arratia = cfg.phi.family == PhiFamily::Arratia;
        parallel_for(size_t(cfg.replicas), threads, [&](size_t r) {
            const FlowPathRecord rec = arratia ? simulate_arratia(cfg, int(r))
                                               : simulate_harris(cfg, int(r));
            sups[r] = sup_deviation(rec, t);
        });
        const Estimate e = estimate_E(cfg, t, e_replicas, threads);

        DeviationPoint p;
        p.t = t;
        p.grid_size = int(make_grid(t).size());
        p.mean_sup = mean(sups);
        p.median_sup = median(sups);
        p.stderr_sup = stderr_of_mean(sups);
        p.norm_tlogt = detail::norm_tlogt(t);
        p.norm_tloglogt = detail::norm_tloglogt(t);
        p.e_t = e.value;
        p.e_t_stderr = e.se;
        p.ratio_tlogt = p.mean_sup / p.norm_tlogt;
        p.ratio_tloglogt = p.mean_sup / p.norm_tloglogt;
        p.ratio_centered = (p.mean_sup - p.e_t) / p.norm_tloglogt;
        std::vector<double> centered(sups.size());
        for (size_t r = 0; r < sups.size(); ++r)
            centered[r] = (sups[r] - p.e_t) / p.norm_tloglogt;
        p.mean_centered = mean(centered);
        p.iqr_centered = interquartile_range(centered);
        series.points.push_back(p);
    }
    return series;
}

// Coupled-gap statistics along t_n = q^n: the sup over labels of |X - Y| at
// the horizon, normalized by sqrt(t lnln 1/t), plus the quadratic-variation
// gap divided by t.
inline DeviationSeries coupling_gap_series(const SimConfig& base, double q,
                                           int n_min, int n_max,
                                           unsigned threads = 0) {
    detail::check_series_range(q, n_min, n_max);
    DeviationSeries series;
    series.q = q;
    for (int n = n_min; n <= n_max; ++n) {
        const double t = std::pow(q, n);
        SimConfig cfg = base;
        cfg.t_target = t;
        cfg.couple_tangent = true;
        cfg.validate();

        std::vector<double> gaps(static_cast<size_t>(cfg.replicas)), qvs(static_cast<size_t>(cfg.replicas));
        parallel_for(size_t(cfg.replicas), threads, [&](size_t r) {
            const CoupledPathRecord rec = simulate_coupled(cfg, int(r));
            const size_t last = rec.x.times.size() - 1;
            double gap = 0.0;
            for (size_t k = 0; k < rec.x.initial.size(); ++k)
                gap = std::max(gap, std::abs(rec.x.values[last][k] -
                                             rec.y.values[last][k]));
            gaps[r] = gap;
            qvs[r] = qv_gap(rec, cfg.phi);
        });

        DeviationPoint p;
        p.t = t;
        p.grid_size = int(cfg.grid_points().size());
        p.mean_sup = mean(gaps);
        p.median_sup = median(gaps);
        p.stderr_sup = stderr_of_mean(gaps);
        p.norm_tlogt = detail::norm_tlogt(t);
        const double norm = std::sqrt(t * std::log(std::log(1.0 / t)));
        p.norm_tloglogt = detail::norm_tloglogt(t);
        p.median_gap_norm = median(gaps) / norm;
        p.median_qv_over_t = median(qvs) / t;
        series.points.push_back(p);
    }
    return series;
}

struct InterpolationResult {
    double lhs = 0.0, rhs = 0.0;
    double lhs_se = 0.0, rhs_se = 0.0;
    double combined_se = 0.0;
    double rhs_check = 0.0;  // 128-node quadrature of the same integral
};

// Monte Carlo check of the interpolation identity for constant covariations:
//   E f(M(1)) - E f(N(1))
//     = 1/2 int_0^1 sum_ij E d_ij f(M(t) + N(1) - N(t)) (K_M - K_N)_ij dt,
// with M(t) ~ N(0, t K_M) independent of N(1) - N(t) ~ N(0, (1-t) K_N).
// Midpoint rule with 64 nodes; rhs_check repeats the quadrature at 128 nodes.
inline InterpolationResult interpolation_residual(const Eigen::MatrixXd& k_m,
                                                  const Eigen::MatrixXd& k_n,
                                                  const TestFunction& f,
                                                  int replicas, std::uint64_t seed,
                                                  unsigned threads = 0) {
    if (!f.hessian) throw ConfigError("interpolation needs a C^2 test function");
    PsdFactor fm, fn;
    try {
        fm = factor_psd(k_m, 1e-10);
        fn = factor_psd(k_n, 1e-10);
    } catch (const FactorizationError&) {
        throw NotPsdError("covariation matrix is not positive semidefinite");
    }
    if (fm.clipped || fn.clipped)
        throw NotPsdError("covariation matrix is not positive semidefinite");
    const int d = f.dim;
    if (k_m.rows() != d || k_n.rows() != d)
        throw ConfigError("matrix dimension does not match test function");
    const Eigen::MatrixXd dk = k_m - k_n;

    std::vector<double> lhs_vals(static_cast<size_t>(replicas));
    parallel_for(size_t(replicas), threads, [&](size_t r) {
        RngStream rng(seed, r, lanes::kInterpolationLhs);
        const Eigen::VectorXd m1 = sample_increment(fm, 1.0, rng);
        const Eigen::VectorXd n1 = sample_increment(fn, 1.0, rng);
        lhs_vals[r] = f.value({m1.data(), size_t(d)}) - f.value({n1.data(), size_t(d)});
    });

    auto quadrature = [&](int nodes, std::uint64_t lane, std::vector<double>& out) {
        out.assign(size_t(replicas), 0.0);
        parallel_for(size_t(replicas), threads, [&](size_t r) {
            RngStream rng(seed, r, lane);
            Eigen::MatrixXd h(d, d);
            double acc = 0.0;
            for (int j = 0; j < nodes; ++j) {
                const double t = (j + 0.5) / double(nodes);
                const Eigen::VectorXd mt = sample_increment(fm, std::sqrt(t), rng);
                const Eigen::VectorXd wt =
                    sample_increment(fn, std::sqrt(1.0 - t), rng);
                const Eigen::VectorXd z = mt + wt;
                f.hessian({z.data(), size_t(d)}, h);
                acc += 0.5 * (h.array() * dk.array()).sum();
            }
            out[r] = acc / double(nodes);
        });
    };
    std::vector<double> rhs_vals, check_vals;
    quadrature(64, lanes::kInterpolationRhs, rhs_vals);
    quadrature(128, lanes::kInterpolationCheck, check_vals);

    InterpolationResult res;
    res.lhs = mean(lhs_vals);
    res.rhs = mean(rhs_vals);
    res.lhs_se = stderr_of_mean(lhs_vals);
    res.rhs_se = stderr_of_mean(rhs_vals);
    res.combined_se = std::hypot(res.lhs_se, res.rhs_se);
    res.rhs_check = mean(check_vals);
    return res;
}

struct ComparisonReport {
    double e_max_m = 0.0, e_max_n = 0.0;
    double stderr_m = 0.0, stderr_n = 0.0;
    std::optional<double> closed_form_n;  // dim = 2 only
    bool verdict = false;
};

namespace detail {

inline Eigen::MatrixXd equicorrelation(int dim, double rho) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Constant(dim, dim, rho);
    k.diagonal().setOnes();
    return k;
}

// E max of an equicorrelated Gaussian vector, by antithetic pairs: each
// drawn vector v contributes (max(v) + max(-v)) / 2, which kills the
// dominant common-factor variance while staying unbiased.
inline Estimate emax_equicorrelated(int dim, double rho, int replicas,
                                    std::uint64_t seed, std::uint64_t lane,
                                    unsigned threads) {
    const PsdFactor f = factor_psd(equicorrelation(dim, rho), 1e-8);
    const size_t pairs = size_t(std::max(1, replicas / 2));
    std::vector<double> vals(pairs);
    parallel_for(pairs, threads, [&](size_t p) {
        RngStream rng(seed, p, lane);
        const Eigen::VectorXd v = sample_increment(f, 1.0, rng);
        vals[p] = 0.5 * (v.maxCoeff() + (-v).maxCoeff());
    });
    return {mean(vals), stderr_of_mean(vals)};
}

}  // namespace detail

// Slepian-type comparison: with unit variances and rho_m >= rho_n the
// pairwise increment distances of M are dominated by those of N, so
// E max M <= E max N must hold.
inline ComparisonReport slepian_check(double rho_m, double rho_n, int dim,
                                      int replicas, std::uint64_t seed,
                                      unsigned threads = 0) {
    if (dim < 2) throw InvalidCorrelationError("dim must be at least 2");
    const double lo = -1.0 / double(dim - 1);
    if (!(rho_n > lo && rho_n <= rho_m && rho_m <= 1.0))
        throw InvalidCorrelationError(
            "need -1/(dim-1) < rho_n <= rho_m <= 1, got rho_m = " +
            std::to_string(rho_m) + ", rho_n = " + std::to_string(rho_n));
    const Estimate m = detail::emax_equicorrelated(dim, rho_m, replicas, seed,
                                                   lanes::kSlepianM, threads);
    const Estimate n = detail::emax_equicorrelated(dim, rho_n, replicas, seed,
                                                   lanes::kSlepianN, threads);
    ComparisonReport rep;
    rep.e_max_m = m.value;
    rep.e_max_n = n.value;
    rep.stderr_m = m.se;
    rep.stderr_n = n.se;
    if (dim == 2) rep.closed_form_n = std::sqrt((1.0 - rho_n) / M_PI);
    rep.verdict = rep.e_max_m <= rep.e_max_n + 3.0 * (rep.stderr_m + rep.stderr_n);
    return rep;
}

struct ConcentrationReport {
    std::vector<double> lambda_grid, c_grid;
    double e_f = 0.0;  // plug-in estimate of E f(N)
    std::vector<double> empirical_log_mgf, mgf_bound, mgf_stderr_log;
    std::vector<double> empirical_tail, tail_bound, tail_stderr;
    std::vector<bool> mgf_verdicts, tail_verdicts;
    bool all_pass = true;
};

// Concentration of f = coordinate max (Lipschitz constant 1) on a standard
// Gaussian vector: log-MGF against lambda^2 / 2 and tails against
// exp(-C^2 / 2), both with the plug-in mean.
inline ConcentrationReport concentration_check(int dim,
                                               std::vector<double> lambda_grid,
                                               std::vector<double> c_grid,
                                               int replicas, std::uint64_t seed,
                                               unsigned threads = 0) {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    std::vector<double> f(static_cast<size_t>(replicas));
    constexpr size_t kChunk = 4096;
    const size_t chunks = (size_t(replicas) + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](size_t c) {
        const size_t hi = std::min(size_t(replicas), (c + 1) * kChunk);
        for (size_t r = c * kChunk; r < hi; ++r) {
            RngStream rng(seed, r, lanes::kConcentration);
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < dim; ++i) best = std::max(best, rng.next_normal());
            f[r] = best;
        }
    });

    ConcentrationReport rep;
    rep.lambda_grid = std::move(lambda_grid);
    rep.c_grid = std::move(c_grid);
    rep.e_f = mean(f);

    std::vector<double> e(static_cast<size_t>(replicas));
    for (double lam : rep.lambda_grid) {
        for (size_t r = 0; r < f.size(); ++r) e[r] = std::exp(lam * (f[r] - rep.e_f));
        const double m = mean(e);
        const double se = stderr_of_mean(e);
        const double log_mgf = std::log(m) + lam * rep.e_f;
        const double bound = lam * rep.e_f + lam * lam / 2.0;
        const double se_log = se / m;
        const bool ok = log_mgf <= bound + 3.0 * se_log;
        rep.empirical_log_mgf.push_back(log_mgf);
        rep.mgf_bound.push_back(bound);
        rep.mgf_stderr_log.push_back(se_log);
        rep.mgf_verdicts.push_back(ok);
        rep.all_pass = rep.all_pass && ok;
    }
    for (double c : rep.c_grid) {
        size_t hits = 0;
        for (double v : f)
            if (v - rep.e_f >= c) ++hits;
        const double p = double(hits) / double(replicas);
        const double se = std::sqrt(p * (1.0 - p) / double(replicas));
        const double bound = std::exp(-c * c / 2.0);
        const bool ok = p <= bound + 3.0 * se;
        rep.empirical_tail.push_back(p);
        rep.tail_bound.push_back(bound);
        rep.tail_stderr.push_back(se);
        rep.tail_verdicts.push_back(ok);
        rep.all_pass = rep.all_pass && ok;
    }
    return rep;
}

// Samples standard-normal pairs and checks the lattice inequality
// f(x ^ y) + f(x v y) <= f(x) + f(y) pointwise.
inline bool submodularity_check(const TestFunction& f, int samples,
                                RngStream& rng) {
    const int d = f.dim;
    std::vector<double> x(static_cast<size_t>(d)), y(static_cast<size_t>(d)), lo(static_cast<size_t>(d)), hi(static_cast<size_t>(d));
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < d; ++i) {
            x[size_t(i)] = rng.next_normal();
            y[size_t(i)] = rng.next_normal();
            lo[size_t(i)] = std::min(x[size_t(i)], y[size_t(i)]);
            hi[size_t(i)] = std::max(x[size_t(i)], y[size_t(i)]);
        }
        if (f.value(lo) + f.value(hi) > f.value(x) + f.value(y) + 1e-12)
            return false;
    }
    return true;
}

// Sub-Gaussian bound for the expected maximum of n_blocks identically
// distributed block suprema: E S + sqrt(2 t ln n_blocks).
inline double subgaussian_max_bound(double e_s, double t, int n_blocks) {
    if (!(e_s >= 0.0)) throw ConfigError("e_s must be >= 0");
    if (!(t > 0.0)) throw ConfigError("t must be positive");
    if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
    return e_s + std::sqrt(2.0 * t * std::log(double(n_blocks)));
}

}  // namespace harris

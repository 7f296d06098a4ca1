#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <span>
#include <vector>

#include "harris/covariance.hpp"
#include "harris/errors.hpp"
#include "harris/psd.hpp"
#include "harris/rng.hpp"

namespace harris {

enum class GridRule { SqrtGrid, Explicit };

// Grid u_k = k * sqrt(t) for 0 <= k < ceil(t^-1/2); all points in [0, 1).
inline std::vector<double> make_grid(double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("sqrt grid needs t in (0, 1]");
    const double s = std::sqrt(t);
    int n = int(std::ceil(1.0 / s));
    while (n > 1 && double(n - 1) * s >= 1.0) --n;
    std::vector<double> u(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) u[size_t(k)] = double(k) * s;
    return u;
}

struct SimConfig {
    CovarianceModel phi;
    double t_target = 0.0;
    double dt = 0.0;  // <= 0 selects the default t_target / 256
    GridRule grid = GridRule::SqrtGrid;
    std::vector<double> explicit_grid;
    int replicas = 1000;
    std::uint64_t seed = 0;
    bool couple_tangent = false;
    double merge_eps = 0.0;
    std::vector<double> checkpoints;  // extra record times, in [0, t_target]

    double resolved_dt() const { return dt > 0.0 ? dt : t_target / 256.0; }
    int steps() const {
        return std::max(1, int(std::llround(t_target / resolved_dt())));
    }
    double step_dt() const { return t_target / double(steps()); }

    std::vector<double> grid_points() const {
        return grid == GridRule::SqrtGrid ? make_grid(t_target) : explicit_grid;
    }

    void validate() const {
        phi.validate();
        if (!(t_target > 0.0)) throw ConfigError("t must be positive");
        if (resolved_dt() > t_target + 1e-15)
            throw ConfigError("dt must not exceed t");
        if (replicas < 1) throw ConfigError("replicas must be >= 1");
        if (grid == GridRule::SqrtGrid) {
            if (t_target > 1.0)
                throw ConfigError("sqrt grid needs t in (0, 1]");
        } else {
            if (explicit_grid.empty())
                throw ConfigError("explicit grid must be non-empty");
            if (!std::is_sorted(explicit_grid.begin(), explicit_grid.end()))
                throw ConfigError("grid points must be non-decreasing");
        }
        if (merge_eps < 0.0) throw ConfigError("merge_eps must be >= 0");
    }
};

// Live state of the coalescing point motion. Clusters are contiguous label
// ranges (monotonicity makes them so); positions are strictly increasing.
struct FlowState {
    std::vector<double> labels;       // initial points, non-decreasing
    std::vector<int> cluster_of;      // label -> cluster index
    std::vector<double> cluster_pos;  // per cluster, strictly increasing
    std::vector<int> first_label;     // per cluster, lowest member label

    static FlowState from_grid(std::span<const double> u, double merge_eps) {
        FlowState s;
        s.labels.assign(u.begin(), u.end());
        for (size_t k = 0; k < u.size(); ++k) {
            if (!s.cluster_pos.empty() && u[k] - s.cluster_pos.back() <= merge_eps) {
                s.cluster_of.push_back(int(s.cluster_pos.size()) - 1);
            } else {
                s.cluster_of.push_back(int(s.cluster_pos.size()));
                s.cluster_pos.push_back(u[k]);
                s.first_label.push_back(int(k));
            }
        }
        return s;
    }

    int cluster_count() const { return int(cluster_pos.size()); }
    double position_of(int label) const {
        return cluster_pos[size_t(cluster_of[size_t(label)])];
    }

    // Adds one increment per cluster, then restores monotonicity: clusters
    // that cross or touch (gap <= merge_eps) merge, the merged position is
    // the mean of the two, and merges cascade until the sweep is monotone.
    void apply_cluster_increments(std::span<const double> dz, double merge_eps) {
        const int m = cluster_count();
        std::vector<double> pos(static_cast<size_t>(m));
        for (int c = 0; c < m; ++c) pos[size_t(c)] = cluster_pos[size_t(c)] + dz[size_t(c)];

        std::vector<double> merged_pos;
        std::vector<int> merged_first;
        std::vector<int> remap(static_cast<size_t>(m));
        merged_pos.reserve(size_t(m));
        merged_first.reserve(size_t(m));
        std::vector<std::pair<double, int>> stack;  // (position, first old cluster)
        stack.reserve(size_t(m));
        for (int c = 0; c < m; ++c) {
            double cur = pos[size_t(c)];
            int first = c;
            while (!stack.empty() && cur - stack.back().first <= merge_eps) {
                cur = 0.5 * (stack.back().first + cur);
                first = stack.back().second;
                stack.pop_back();
            }
            stack.emplace_back(cur, first);
        }
        int old_c = 0;
        for (size_t nc = 0; nc < stack.size(); ++nc) {
            const int upto = (nc + 1 < stack.size()) ? stack[nc + 1].second : m;
            merged_pos.push_back(stack[nc].first);
            merged_first.push_back(first_label[size_t(stack[nc].second)]);
            for (; old_c < upto; ++old_c) remap[size_t(old_c)] = int(nc);
        }
        for (auto& c : cluster_of) c = remap[size_t(c)];
        cluster_pos = std::move(merged_pos);
        first_label = std::move(merged_first);
    }
};

// Labeled trajectories on a time grid plus coalescence history. The
// per-label cluster id is the lowest label of its cluster, so ids are
// non-increasing along every path.
struct FlowPathRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> values;    // [time][label]
    std::vector<std::vector<int>> cluster_ids;  // [time][label]
    std::vector<int> cluster_counts;            // [time]
    std::vector<double> initial;                // u_k

    size_t time_index(double t) const {
        for (size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
        throw TimeNotRecordedError("time " + std::to_string(t) + " not recorded");
    }
};

struct CoupledPathRecord {
    FlowPathRecord x;  // coalescing point motion
    FlowPathRecord y;  // tangent field, no coalescence
};

namespace detail {

constexpr double kMaxJitter = 1e-6;
constexpr int kOutputTimes = 64;

// Step indices to record: a fixed grid of kOutputTimes plus any requested
// checkpoints, always including 0 and the final step.
inline std::vector<int> record_steps(const SimConfig& cfg) {
    const int steps = cfg.steps();
    const double dt = cfg.step_dt();
    std::vector<int> idx;
    const int outputs = std::min(steps, kOutputTimes - 1);
    for (int k = 0; k <= outputs; ++k)
        idx.push_back(int(std::llround(double(k) * steps / double(outputs))));
    for (double c : cfg.checkpoints) {
        const int i = int(std::llround(c / dt));
        if (i >= 0 && i <= steps) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

inline void record_state(FlowPathRecord& rec, const FlowState& st, double time) {
    rec.times.push_back(time);
    std::vector<double> vals(st.labels.size());
    std::vector<int> ids(st.labels.size());
    for (size_t k = 0; k < st.labels.size(); ++k) {
        const int c = st.cluster_of[k];
        vals[k] = st.cluster_pos[size_t(c)];
        ids[k] = st.first_label[size_t(c)];
    }
    rec.values.push_back(std::move(vals));
    rec.cluster_ids.push_back(std::move(ids));
    rec.cluster_counts.push_back(st.cluster_count());
}

inline void record_plain(FlowPathRecord& rec, std::span<const double> vals,
                         double time) {
    rec.times.push_back(time);
    rec.values.emplace_back(vals.begin(), vals.end());
    std::vector<int> ids(vals.size());
    for (size_t k = 0; k < vals.size(); ++k) ids[k] = int(k);
    rec.cluster_ids.push_back(std::move(ids));
    rec.cluster_counts.push_back(int(vals.size()));
}

}  // namespace detail

// Euler-Maruyama point motion of a general Harris flow: per step the Gram
// matrix of the current (distinct) cluster positions drives a correlated
// increment, then crossings coalesce.
inline FlowPathRecord simulate_harris(const SimConfig& cfg, int replica) {
    cfg.validate();
    if (cfg.phi.family == PhiFamily::Arratia) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::fprintf(stderr,
                         "harris: phi = arratia simulated via the generic path; "
                         "simulate_arratia is exact and cheaper\n");
    }
    const auto u = cfg.grid_points();
    auto state = FlowState::from_grid(u, cfg.merge_eps);
    const int steps = cfg.steps();
    const double dt = cfg.step_dt();
    const double sq = std::sqrt(dt);
    RngStream rng(cfg.seed, std::uint64_t(replica), 0);

    const auto rec_at = detail::record_steps(cfg);
    FlowPathRecord rec;
    rec.initial.assign(u.begin(), u.end());
    size_t next_rec = 0;
    if (rec_at[next_rec] == 0) {
        detail::record_state(rec, state, 0.0);
        ++next_rec;
    }
    for (int s = 1; s <= steps; ++s) {
        const Eigen::MatrixXd g = gram(cfg.phi, state.cluster_pos);
        const PsdFactor f = factor_psd(g, detail::kMaxJitter);
        const Eigen::VectorXd dz = sample_increment(f, sq, rng);
        state.apply_cluster_increments(std::span(dz.data(), size_t(dz.size())),
                                       cfg.merge_eps);
        if (next_rec < rec_at.size() && rec_at[next_rec] == s) {
            detail::record_state(rec, state, double(s) * dt);
            ++next_rec;
        }
    }
    return rec;
}

// Exact-in-law Arratia dynamics: independent N(0, dt) per cluster, merge on
// contact. No factorization involved.
inline FlowPathRecord simulate_arratia(const SimConfig& cfg, int replica) {
    cfg.validate();
    if (cfg.phi.family != PhiFamily::Arratia)
        throw ConfigError("simulate_arratia requires phi = arratia");
    const auto u = cfg.grid_points();
    auto state = FlowState::from_grid(u, cfg.merge_eps);
    const int steps = cfg.steps();
    const double dt = cfg.step_dt();
    const double sq = std::sqrt(dt);
    RngStream rng(cfg.seed, std::uint64_t(replica), 0);

    const auto rec_at = detail::record_steps(cfg);
    FlowPathRecord rec;
    rec.initial.assign(u.begin(), u.end());
    size_t next_rec = 0;
    if (rec_at[next_rec] == 0) {
        detail::record_state(rec, state, 0.0);
        ++next_rec;
    }
    std::vector<double> dz;
    for (int s = 1; s <= steps; ++s) {
        dz.resize(size_t(state.cluster_count()));
        for (auto& z : dz) z = sq * rng.next_normal();
        state.apply_cluster_increments(dz, cfg.merge_eps);
        if (next_rec < rec_at.size() && rec_at[next_rec] == s) {
            detail::record_state(rec, state, double(s) * dt);
            ++next_rec;
        }
    }
    return rec;
}

// Gaussian tangent field: increments from the fixed Gram matrix of the
// initial grid, factored once. No coalescence, no monotonicity enforcement.
inline FlowPathRecord simulate_tangent(const SimConfig& cfg, int replica) {
    cfg.validate();
    const auto u = cfg.grid_points();
    const Eigen::MatrixXd g = gram(cfg.phi, u);
    const PsdFactor f = factor_psd(g, detail::kMaxJitter);
    const int steps = cfg.steps();
    const double dt = cfg.step_dt();
    const double sq = std::sqrt(dt);
    RngStream rng(cfg.seed, std::uint64_t(replica), 1);

    std::vector<double> y(u.begin(), u.end());
    const auto rec_at = detail::record_steps(cfg);
    FlowPathRecord rec;
    rec.initial.assign(u.begin(), u.end());
    size_t next_rec = 0;
    if (rec_at[next_rec] == 0) {
        detail::record_plain(rec, y, 0.0);
        ++next_rec;
    }
    for (int s = 1; s <= steps; ++s) {
        const Eigen::VectorXd dz = sample_increment(f, sq, rng);
        for (size_t k = 0; k < y.size(); ++k) y[k] += dz[Eigen::Index(k)];
        if (next_rec < rec_at.size() && rec_at[next_rec] == s) {
            detail::record_plain(rec, y, double(s) * dt);
            ++next_rec;
        }
    }
    return rec;
}

// Coupled (X, Y): one joint Gaussian increment per step with blocks
//   [X,X] = phi(X_i - X_j)   on current positions,
//   [X,Y] = phi(X_i - u_j),
//   [Y,Y] = phi(u_i - u_j)   fixed for all time.
// Only distinct X clusters enter the matrix; members of a cluster share its
// increment, which realizes the same joint law as the per-label block matrix
// (duplicated rows) without the degeneracy. Coalescence applies to X only.
inline CoupledPathRecord simulate_coupled(const SimConfig& cfg, int replica) {
    cfg.validate();
    if (!cfg.couple_tangent)
        throw ConfigError("coupled simulation requires couple_tangent = true");
    if (cfg.phi.family == PhiFamily::Arratia)
        throw ConfigError("coupled simulation requires a continuous phi family");
    const auto u = cfg.grid_points();
    const int n = int(u.size());
    auto state = FlowState::from_grid(u, cfg.merge_eps);
    const Eigen::MatrixXd g_yy = gram(cfg.phi, u);
    const int steps = cfg.steps();
    const double dt = cfg.step_dt();
    const double sq = std::sqrt(dt);
    RngStream rng(cfg.seed, std::uint64_t(replica), 2);

    std::vector<double> y(u.begin(), u.end());
    const auto rec_at = detail::record_steps(cfg);
    CoupledPathRecord rec;
    rec.x.initial.assign(u.begin(), u.end());
    rec.y.initial.assign(u.begin(), u.end());
    size_t next_rec = 0;
    if (rec_at[next_rec] == 0) {
        detail::record_state(rec.x, state, 0.0);
        detail::record_plain(rec.y, y, 0.0);
        ++next_rec;
    }
    for (int s = 1; s <= steps; ++s) {
        const int m = state.cluster_count();
        Eigen::MatrixXd k(m + n, m + n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= i; ++j) {
                const double v = evaluate(
                    cfg.phi, state.cluster_pos[size_t(i)] - state.cluster_pos[size_t(j)]);
                k(i, j) = v;
                k(j, i) = v;
            }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double v =
                    evaluate(cfg.phi, state.cluster_pos[size_t(i)] - u[size_t(j)]);
                k(i, m + j) = v;
                k(m + j, i) = v;
            }
        k.bottomRightCorner(n, n) = g_yy;
        PsdFactor f;
        try {
            f = factor_psd(k, detail::kMaxJitter);
        } catch (const FactorizationError& e) {
            throw FactorizationError("coupled replica " + std::to_string(replica) +
                                     " step " + std::to_string(s) + ": " + e.what());
        }
        const Eigen::VectorXd dz = sample_increment(f, sq, rng);
        state.apply_cluster_increments(std::span(dz.data(), size_t(m)), cfg.merge_eps);
        for (int j = 0; j < n; ++j) y[size_t(j)] += dz[m + j];
        if (next_rec < rec_at.size() && rec_at[next_rec] == s) {
            detail::record_state(rec.x, state, double(s) * dt);
            detail::record_plain(rec.y, y, double(s) * dt);
            ++next_rec;
        }
    }
    return rec;
}

// Discrete estimate of the quadratic-variation gap between X and Y:
//   sup_k 2 * sum_s (1 - phi(X(u_k, s) - u_k)) * ds
// over the record's time grid.
inline double qv_gap(const CoupledPathRecord& rec, const CovarianceModel& phi) {
    const auto& x = rec.x;
    if (x.times.size() < 2) return 0.0;
    double best = 0.0;
    for (size_t k = 0; k < x.initial.size(); ++k) {
        double acc = 0.0;
        for (size_t i = 0; i + 1 < x.times.size(); ++i)
            acc += 2.0 * one_minus_phi(phi, x.values[i][k] - x.initial[k]) *
                   (x.times[i + 1] - x.times[i]);
        best = std::max(best, acc);
    }
    return best;
}

}  // namespace harris

#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harris/analysis.hpp"
#include "harris/config.hpp"
#include "harris/report.hpp"
#include "harris/svg.hpp"

namespace harris::cli {

// Exit contract: 0 all verdicts pass, 1 some verdict failed, 2 error.
enum ExitCode { kPass = 0, kVerdictFail = 1, kError = 2 };

namespace detail {

inline FlowPathRecord dispatch_flow(const SimConfig& cfg, int replica) {
    if (cfg.couple_tangent && cfg.phi.family != PhiFamily::Arratia)
        return simulate_coupled(cfg, replica).x;
    if (cfg.phi.family == PhiFamily::Arratia) return simulate_arratia(cfg, replica);
    return simulate_harris(cfg, replica);
}

inline bool record_monotone(const FlowPathRecord& rec) {
    for (const auto& row : rec.values)
        for (size_t k = 1; k < row.size(); ++k)
            if (row[k] < row[k - 1]) return false;
    return true;
}

inline bool counts_non_increasing(const FlowPathRecord& rec) {
    for (size_t i = 1; i < rec.cluster_counts.size(); ++i)
        if (rec.cluster_counts[i] > rec.cluster_counts[i - 1]) return false;
    return true;
}

// Inversions of a "should be non-increasing" sequence.
inline int trend_inversions(const std::vector<double>& v) {
    int inv = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) ++inv;
    return inv;
}

inline int run_simulate(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    const int replicas = spec.sim.replicas;
    FlowPathRecord first;
    std::vector<char> mono(static_cast<size_t>(replicas)), counts_ok(static_cast<size_t>(replicas));
    std::vector<std::vector<int>> counts(static_cast<size_t>(replicas));
    parallel_for(size_t(replicas), spec.threads, [&](size_t r) {
        const FlowPathRecord rec = dispatch_flow(spec.sim, int(r));
        mono[r] = record_monotone(rec) ? 1 : 0;
        counts_ok[r] = counts_non_increasing(rec) ? 1 : 0;
        counts[r] = rec.cluster_counts;
        if (r == 0) first = rec;
    });
    int bad_mono = 0, bad_counts = 0;
    for (int r = 0; r < replicas; ++r) {
        bad_mono += mono[size_t(r)] ? 0 : 1;
        bad_counts += counts_ok[size_t(r)] ? 0 : 1;
    }
    verdicts.push_back({"monotone_in_label", bad_mono == 0, double(bad_mono), 0.0, 0.0});
    verdicts.push_back(
        {"cluster_counts_non_increasing", bad_counts == 0, double(bad_counts), 0.0, 0.0});

    std::vector<double> mean_counts(first.times.size(), 0.0);
    for (size_t i = 0; i < first.times.size(); ++i) {
        std::vector<double> col(static_cast<size_t>(replicas), 0.0);
        for (int r = 0; r < replicas; ++r) col[size_t(r)] = counts[size_t(r)][i];
        mean_counts[i] = mean(col);
    }
    write_text_file(spec.out_dir + "/trajectories.svg", trajectories_svg(first));
    write_text_file(spec.out_dir + "/cluster_counts.csv",
                    cluster_counts_csv(first, mean_counts));
    return 0;
}

inline int run_lil(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    const DeviationSeries series =
        lil_series(spec.sim, spec.lil.q, spec.lil.n_min, spec.lil.n_max,
                   spec.lil.e_replicas, spec.threads);
    write_text_file(spec.out_dir + "/lil.csv", lil_csv(series));
    for (const auto& p : series.points) {
        if (p.t > spec.lil.t_band) continue;
        verdicts.push_back({"ratio_tlogt[t=" + format_double(p.t) + "]",
                            p.ratio_tlogt <= spec.lil.max_ratio, p.ratio_tlogt,
                            spec.lil.max_ratio, 0.0});
    }
    return 0;
}

inline int run_coupling(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    const DeviationSeries series = coupling_gap_series(
        spec.sim, spec.coupling.q, spec.coupling.n_min, spec.coupling.n_max,
        spec.threads);
    write_text_file(spec.out_dir + "/coupling.csv", coupling_csv(series));
    std::vector<double> gaps, qvs;
    for (const auto& p : series.points) {
        gaps.push_back(p.median_gap_norm);
        qvs.push_back(p.median_qv_over_t);
    }
    const int inv_gap = trend_inversions(gaps);
    const int inv_qv = trend_inversions(qvs);
    verdicts.push_back({"gap_trend_inversions", inv_gap <= spec.coupling.max_inversions,
                        double(inv_gap), double(spec.coupling.max_inversions), 0.0});
    verdicts.push_back({"gap_decay", gaps.back() <= spec.coupling.decay * gaps.front(),
                        gaps.back(), spec.coupling.decay * gaps.front(), 0.0});
    verdicts.push_back({"qv_trend_inversions", inv_qv <= spec.coupling.max_inversions,
                        double(inv_qv), double(spec.coupling.max_inversions), 0.0});
    verdicts.push_back(
        {"qv_decay", qvs.back() < qvs.front(), qvs.back(), qvs.front(), 0.0});
    return 0;
}

inline int run_comparison(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    std::vector<ComparisonRow> rows;
    bool sweep_ok = true;
    for (int dim : spec.comparison.dims) {
        for (double rm : spec.comparison.rhos)
            for (double rn : spec.comparison.rhos) {
                if (rm < rn) continue;
                ComparisonRow row;
                row.dim = dim;
                row.rho_m = rm;
                row.rho_n = rn;
                row.rep = slepian_check(rm, rn, dim, spec.comparison.replicas,
                                        spec.seed, spec.threads);
                sweep_ok = sweep_ok && row.rep.verdict;
                rows.push_back(std::move(row));
            }
    }
    verdicts.push_back({"slepian_sweep", sweep_ok, sweep_ok ? 1.0 : 0.0, 1.0, 0.0});
    for (double rho : spec.comparison.rhos) {
        const ComparisonReport rep = slepian_check(
            rho, rho, 2, spec.comparison.closed_form_replicas, spec.seed, spec.threads);
        const double cf = *rep.closed_form_n;
        const double rel = std::abs(rep.e_max_n - cf) / cf;
        verdicts.push_back({"closed_form[rho=" + format_double(rho) + "]",
                            rel <= spec.comparison.closed_form_tol, rel,
                            spec.comparison.closed_form_tol, 0.0});
        ComparisonRow row;
        row.dim = 2;
        row.rho_m = rho;
        row.rho_n = rho;
        row.rep = rep;
        rows.push_back(std::move(row));
    }
    write_text_file(spec.out_dir + "/comparison.csv", comparison_csv(rows));
    return 0;
}

inline int run_concentration(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    std::vector<std::pair<int, ConcentrationReport>> reps;
    for (int dim : spec.concentration.dims) {
        ConcentrationReport rep =
            concentration_check(dim, spec.concentration.lambdas, spec.concentration.cs,
                                spec.concentration.replicas, spec.seed, spec.threads);
        verdicts.push_back({"concentration[dim=" + std::to_string(dim) + "]",
                            rep.all_pass, rep.all_pass ? 1.0 : 0.0, 1.0, 0.0});
        reps.emplace_back(dim, std::move(rep));
    }
    write_text_file(spec.out_dir + "/concentration.csv", concentration_csv(reps));
    return 0;
}

inline int run_covariance(const ExperimentSpec& spec, std::vector<Verdict>& verdicts) {
    const auto& cv = spec.covariance;
    const IntegralVerdict dud = dudley_integral(spec.sim.phi, cv.tol);
    const IntegralVerdict coal = coalescence_criterion(spec.sim.phi, cv.eps, cv.tol);
    const IntegralVerdict dud10 = dudley_integral(spec.sim.phi, cv.tol / 10.0);
    const IntegralVerdict coal10 = coalescence_criterion(spec.sim.phi, cv.eps, cv.tol / 10.0);

    auto stability = [](const std::string& name, const IntegralVerdict& a,
                        const IntegralVerdict& b) {
        const bool same_status = a.status == b.status;
        const double diff =
            (a.convergent() && b.convergent()) ? std::abs(a.value - b.value) : 0.0;
        return Verdict{name + "_tol_stable", same_status && diff <= 1e-3, diff, 1e-3, 0.0};
    };
    verdicts.push_back(stability("dudley", dud, dud10));
    verdicts.push_back(stability("coalescence", coal, coal10));
    if (cv.expect_dudley)
        verdicts.push_back({"dudley_expected", dud.status == *cv.expect_dudley,
                            dud.convergent() ? 1.0 : 0.0,
                            *cv.expect_dudley == IntegralStatus::Convergent ? 1.0 : 0.0,
                            0.0});
    if (cv.expect_coalescence)
        verdicts.push_back({"coalescence_expected", coal.status == *cv.expect_coalescence,
                            coal.convergent() ? 1.0 : 0.0,
                            *cv.expect_coalescence == IntegralStatus::Convergent ? 1.0 : 0.0,
                            0.0});
    write_text_file(spec.out_dir + "/covariance.csv", covariance_csv(dud, coal));
    return 0;
}

}  // namespace detail

// Executes the experiment, writes report.json plus the kind's CSV/SVG
// outputs, and returns the exit code.
inline int run_experiment(const ExperimentSpec& spec) {
    std::vector<Verdict> verdicts;
    switch (spec.kind) {
        case ExperimentKind::Simulate: detail::run_simulate(spec, verdicts); break;
        case ExperimentKind::Lil: detail::run_lil(spec, verdicts); break;
        case ExperimentKind::Coupling: detail::run_coupling(spec, verdicts); break;
        case ExperimentKind::Comparison: detail::run_comparison(spec, verdicts); break;
        case ExperimentKind::Concentration: detail::run_concentration(spec, verdicts); break;
        case ExperimentKind::Covariance: detail::run_covariance(spec, verdicts); break;
    }
    write_text_file(spec.out_dir + "/report.json", report_json(spec, verdicts));
    for (const auto& v : verdicts)
        if (!v.pass) return kVerdictFail;
    return kPass;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;

    void apply(ExperimentSpec& spec) const {
        if (seed) {
            spec.seed = *seed;
            spec.sim.seed = *seed;
        }
        if (replicas) {
            spec.sim.replicas = *replicas;
            spec.comparison.replicas = *replicas;
            spec.concentration.replicas = *replicas;
        }
        if (out_dir) spec.out_dir = *out_dir;
        if (threads) spec.threads = *threads;
    }
};

inline int command_run(const std::string& spec_path, const Overrides& ov) {
    try {
        ExperimentSpec spec = ExperimentSpec::parse_file(spec_path);
        ov.apply(spec);
        return run_experiment(spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kError;
    }
}

inline int command_validate(const std::string& spec_path) {
    try {
        const ExperimentSpec spec = ExperimentSpec::parse_file(spec_path);
        std::fputs(spec.resolved_text().c_str(), stdout);
        return kPass;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kError;
    }
}

inline int main(int argc, const char* const* argv) {
    CLI::App app{"Harris flow simulation and statistical verification toolkit"};
    app.require_subcommand(1);

    std::string run_spec, validate_spec;
    Overrides ov;

    auto* run = app.add_subcommand("run", "execute an experiment spec");
    run->add_option("spec", run_spec, "experiment spec file")->required();
    std::uint64_t seed_opt = 0;
    int replicas_opt = 0;
    std::string out_opt;
    unsigned threads_opt = 0;
    auto* seed_flag = run->add_option("--seed", seed_opt, "override the seed");
    auto* rep_flag = run->add_option("--replicas", replicas_opt, "override replica counts");
    auto* out_flag = run->add_option("--out", out_opt, "override the output directory");
    auto* thr_flag = run->add_option("--threads", threads_opt, "worker thread count")
                         ->envname("HARRIS_THREADS");

    auto* validate = app.add_subcommand("validate", "parse a spec and echo the resolved config");
    validate->add_option("spec", validate_spec, "experiment spec file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    if (run->parsed()) {
        if (*seed_flag) ov.seed = seed_opt;
        if (*rep_flag) ov.replicas = replicas_opt;
        if (*out_flag) ov.out_dir = out_opt;
        if (*thr_flag) ov.threads = threads_opt;
        return command_run(run_spec, ov);
    }
    return command_validate(validate_spec);
}

}  // namespace harris::cli

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "harris/analysis.hpp"
#include "harris/config.hpp"
#include "harris/errors.hpp"
#include "harris/format.hpp"
#include "harris/version.hpp"

namespace harris {

// One pass/fail check with the quantities that decided it. `slack` is the
// tolerance that was granted (3 stderr, a declared band, ...).
struct Verdict {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double bound = 0.0;
    double slack = 0.0;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

// Rows are LF-terminated; numbers use the shortest round-trip decimal, so a
// re-run with the same seed reproduces the file byte for byte.
inline std::string lil_csv(const DeviationSeries& s) {
    std::string out = "t,mean_sup,stderr,ratio_tlogt,ratio_tloglogt,E_t,ratio_centered\n";
    for (const auto& p : s.points) {
        out += format_double(p.t) + "," + format_double(p.mean_sup) + "," +
               format_double(p.stderr_sup) + "," + format_double(p.ratio_tlogt) + "," +
               format_double(p.ratio_tloglogt) + "," + format_double(p.e_t) + "," +
               format_double(p.ratio_centered) + "\n";
    }
    return out;
}

inline std::string coupling_csv(const DeviationSeries& s) {
    std::string out = "t,median_gap,median_gap_norm,qv_over_t,mean_gap,stderr\n";
    for (const auto& p : s.points) {
        out += format_double(p.t) + "," + format_double(p.median_sup) + "," +
               format_double(p.median_gap_norm) + "," +
               format_double(p.median_qv_over_t) + "," + format_double(p.mean_sup) +
               "," + format_double(p.stderr_sup) + "\n";
    }
    return out;
}

struct ComparisonRow {
    int dim = 0;
    double rho_m = 0.0, rho_n = 0.0;
    ComparisonReport rep;
};

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "dim,rho_m,rho_n,e_max_m,e_max_n,stderr_m,stderr_n,closed_form_n,verdict\n";
    for (const auto& r : rows) {
        out += std::to_string(r.dim) + "," + format_double(r.rho_m) + "," +
               format_double(r.rho_n) + "," + format_double(r.rep.e_max_m) + "," +
               format_double(r.rep.e_max_n) + "," + format_double(r.rep.stderr_m) + "," +
               format_double(r.rep.stderr_n) + "," +
               (r.rep.closed_form_n ? format_double(*r.rep.closed_form_n) : "") + "," +
               (r.rep.verdict ? "true" : "false") + "\n";
    }
    return out;
}

inline std::string concentration_csv(const std::vector<std::pair<int, ConcentrationReport>>& reps) {
    std::string out = "dim,check,param,empirical,bound,stderr,verdict\n";
    for (const auto& [dim, rep] : reps) {
        for (size_t i = 0; i < rep.lambda_grid.size(); ++i)
            out += std::to_string(dim) + ",log_mgf," + format_double(rep.lambda_grid[i]) +
                   "," + format_double(rep.empirical_log_mgf[i]) + "," +
                   format_double(rep.mgf_bound[i]) + "," +
                   format_double(rep.mgf_stderr_log[i]) + "," +
                   (rep.mgf_verdicts[i] ? "true" : "false") + "\n";
        for (size_t i = 0; i < rep.c_grid.size(); ++i)
            out += std::to_string(dim) + ",tail," + format_double(rep.c_grid[i]) + "," +
                   format_double(rep.empirical_tail[i]) + "," +
                   format_double(rep.tail_bound[i]) + "," +
                   format_double(rep.tail_stderr[i]) + "," +
                   (rep.tail_verdicts[i] ? "true" : "false") + "\n";
    }
    return out;
}

inline std::string covariance_csv(const IntegralVerdict& dudley,
                                  const IntegralVerdict& coalescence) {
    auto row = [](const std::string& name, const IntegralVerdict& v) {
        std::string s = name;
        s += v.convergent() ? ",convergent," + format_double(v.value) + "," +
                                  format_double(v.abs_error)
                            : ",divergent,,";
        return s + "\n";
    };
    return "criterion,status,value,abs_error\n" + row("dudley", dudley) +
           row("coalescence", coalescence);
}

inline std::string cluster_counts_csv(const FlowPathRecord& rec,
                                      const std::vector<double>& mean_counts) {
    std::string out = "time,clusters_replica0,mean_clusters\n";
    for (size_t i = 0; i < rec.times.size(); ++i)
        out += format_double(rec.times[i]) + "," + std::to_string(rec.cluster_counts[i]) +
               "," + format_double(mean_counts[i]) + "\n";
    return out;
}

// report.json carries the fully resolved spec, version and seed: enough to
// reproduce the run exactly.
inline std::string report_json(const ExperimentSpec& spec,
                               const std::vector<Verdict>& verdicts) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["kind"] = ExperimentSpec::kind_name(spec.kind);
    j["version"] = version_string();
    j["seed"] = spec.seed;
    nlohmann::ordered_json s;
    for (const auto& [k, v] : spec.resolved_items()) s[k] = v;
    j["spec"] = s;
    bool all = true;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : verdicts) {
        nlohmann::ordered_json e;
        e["name"] = v.name;
        e["pass"] = v.pass;
        e["observed"] = format_double(v.observed);
        e["bound"] = format_double(v.bound);
        e["slack"] = format_double(v.slack);
        arr.push_back(e);
        all = all && v.pass;
    }
    j["verdicts"] = arr;
    j["all_pass"] = all;
    return j.dump(2) + "\n";
}

}  // namespace harris

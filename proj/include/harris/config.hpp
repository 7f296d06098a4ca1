#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "harris/covariance.hpp"
#include "harris/errors.hpp"
#include "harris/flow.hpp"
#include "harris/format.hpp"
#include "harris/quadrature.hpp"

namespace harris {

enum class ExperimentKind { Simulate, Lil, Coupling, Comparison, Concentration, Covariance };

struct LilParams {
    double q = 0.5;
    int n_min = 0, n_max = 0;
    int e_replicas = 20000;
    double max_ratio = 1.1;   // verdict band on the sqrt(t ln 1/t) ratio
    double t_band = 1e-3;     // band applies to t at or below this
};

struct CouplingParams {
    double q = 0.5;
    int n_min = 0, n_max = 0;
    int max_inversions = 1;
    double decay = 0.5;  // final median must be <= decay * initial median
};

struct ComparisonParams {
    std::vector<double> rhos = {0.0, 0.25, 0.5, 0.75, 0.95};
    std::vector<int> dims = {2, 4, 8};
    int replicas = 100000;
    int closed_form_replicas = 1000000;
    double closed_form_tol = 0.01;
};

struct ConcentrationParams {
    std::vector<int> dims = {1, 2, 10, 100};
    std::vector<double> lambdas = {0.5, 1.0, 2.0};
    std::vector<double> cs = {0.5, 1.0, 2.0};
    int replicas = 1000000;
};

struct CovarianceParams {
    double eps = 0.5;
    double tol = 1e-6;
    std::optional<IntegralStatus> expect_dudley;
    std::optional<IntegralStatus> expect_coalescence;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ParseError("key '" + key + "': empty list");
    return out;
}

inline std::vector<int> parse_ints(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double d : parse_doubles(key, v)) out.push_back(int(d));
    return out;
}

}  // namespace detail

// Batch experiment description parsed from flat key = value text with dotted
// sections. Defaults are resolved eagerly so the validate command can echo
// the exact effective configuration.
struct ExperimentSpec {
    std::string name = "experiment";
    ExperimentKind kind = ExperimentKind::Simulate;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = HARRIS_THREADS env or hardware default
    SimConfig sim;
    LilParams lil;
    CouplingParams coupling;
    ComparisonParams comparison;
    ConcentrationParams concentration;
    CovarianceParams covariance;

    bool needs_phi() const {
        return kind == ExperimentKind::Simulate || kind == ExperimentKind::Lil ||
               kind == ExperimentKind::Coupling || kind == ExperimentKind::Covariance;
    }

    static std::string kind_name(ExperimentKind k) {
        switch (k) {
            case ExperimentKind::Simulate: return "simulate";
            case ExperimentKind::Lil: return "lil";
            case ExperimentKind::Coupling: return "coupling";
            case ExperimentKind::Comparison: return "comparison";
            case ExperimentKind::Concentration: return "concentration";
            case ExperimentKind::Covariance: return "covariance";
        }
        return "?";
    }

    static ExperimentSpec parse_text(const std::string& text,
                                     const std::string& default_name);
    static ExperimentSpec parse_file(const std::string& path);

    // Canonical (key, value) list with all defaults expanded; drives both the
    // validate echo and the resolved-spec block of report.json.
    std::vector<std::pair<std::string, std::string>> resolved_items() const;
    std::string resolved_text() const;
};

namespace detail {

inline ExperimentKind parse_kind(const std::string& v) {
    if (v == "simulate") return ExperimentKind::Simulate;
    if (v == "lil") return ExperimentKind::Lil;
    if (v == "coupling") return ExperimentKind::Coupling;
    if (v == "comparison") return ExperimentKind::Comparison;
    if (v == "concentration") return ExperimentKind::Concentration;
    if (v == "covariance") return ExperimentKind::Covariance;
    throw ParseError("unknown kind '" + v + "'");
}

inline PhiFamily parse_phi(const std::string& v) {
    if (v == "arratia") return PhiFamily::Arratia;
    if (v == "exp_alpha") return PhiFamily::ExpAlpha;
    if (v == "gaussian") return PhiFamily::Gaussian;
    throw ParseError("unknown phi '" + v + "' (expected arratia, exp_alpha or gaussian)");
}

inline IntegralStatus parse_status(const std::string& key, const std::string& v) {
    if (v == "convergent") return IntegralStatus::Convergent;
    if (v == "divergent") return IntegralStatus::Divergent;
    throw ParseError("key '" + key + "': expected convergent or divergent");
}

}  // namespace detail

inline ExperimentSpec ExperimentSpec::parse_text(const std::string& text,
                                                 const std::string& default_name) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ParseError("duplicate key '" + key + "'");
        if (!val.empty()) kv[key] = val;
    }

    ExperimentSpec spec;
    spec.name = default_name;
    auto take = [&kv](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("name")) spec.name = *v;
    if (auto v = take("kind")) spec.kind = detail::parse_kind(*v);
    else throw ParseError("missing required key 'kind'");
    if (auto v = take("out")) spec.out_dir = *v;
    if (auto v = take("seed")) spec.seed = detail::parse_u64("seed", *v);
    if (auto v = take("threads")) spec.threads = unsigned(detail::parse_int("threads", *v));

    bool phi_given = false;
    if (auto v = take("sim.phi")) {
        spec.sim.phi.family = detail::parse_phi(*v);
        phi_given = true;
    }
    if (auto v = take("sim.alpha")) spec.sim.phi.alpha = detail::parse_double("sim.alpha", *v);
    if (auto v = take("sim.t")) spec.sim.t_target = detail::parse_double("sim.t", *v);
    if (auto v = take("sim.dt")) spec.sim.dt = detail::parse_double("sim.dt", *v);
    if (auto v = take("sim.grid")) {
        if (*v == "sqrt") spec.sim.grid = GridRule::SqrtGrid;
        else if (*v == "explicit") spec.sim.grid = GridRule::Explicit;
        else throw ParseError("sim.grid must be sqrt or explicit");
    }
    if (auto v = take("sim.points"))
        spec.sim.explicit_grid = detail::parse_doubles("sim.points", *v);
    if (auto v = take("sim.replicas"))
        spec.sim.replicas = int(detail::parse_int("sim.replicas", *v));
    if (auto v = take("sim.couple_tangent"))
        spec.sim.couple_tangent = detail::parse_bool("sim.couple_tangent", *v);
    if (auto v = take("sim.merge_eps"))
        spec.sim.merge_eps = detail::parse_double("sim.merge_eps", *v);
    if (auto v = take("sim.seed")) spec.sim.seed = detail::parse_u64("sim.seed", *v);

    if (auto v = take("lil.q")) spec.lil.q = detail::parse_double("lil.q", *v);
    if (auto v = take("lil.n_min")) spec.lil.n_min = int(detail::parse_int("lil.n_min", *v));
    if (auto v = take("lil.n_max")) spec.lil.n_max = int(detail::parse_int("lil.n_max", *v));
    if (auto v = take("lil.e_replicas"))
        spec.lil.e_replicas = int(detail::parse_int("lil.e_replicas", *v));
    if (auto v = take("lil.max_ratio"))
        spec.lil.max_ratio = detail::parse_double("lil.max_ratio", *v);
    if (auto v = take("lil.t_band")) spec.lil.t_band = detail::parse_double("lil.t_band", *v);

    if (auto v = take("coupling.q")) spec.coupling.q = detail::parse_double("coupling.q", *v);
    if (auto v = take("coupling.n_min"))
        spec.coupling.n_min = int(detail::parse_int("coupling.n_min", *v));
    if (auto v = take("coupling.n_max"))
        spec.coupling.n_max = int(detail::parse_int("coupling.n_max", *v));
    if (auto v = take("coupling.max_inversions"))
        spec.coupling.max_inversions = int(detail::parse_int("coupling.max_inversions", *v));
    if (auto v = take("coupling.decay"))
        spec.coupling.decay = detail::parse_double("coupling.decay", *v);

    if (auto v = take("comparison.rhos"))
        spec.comparison.rhos = detail::parse_doubles("comparison.rhos", *v);
    if (auto v = take("comparison.dims"))
        spec.comparison.dims = detail::parse_ints("comparison.dims", *v);
    if (auto v = take("comparison.replicas"))
        spec.comparison.replicas = int(detail::parse_int("comparison.replicas", *v));
    if (auto v = take("comparison.closed_form_replicas"))
        spec.comparison.closed_form_replicas =
            int(detail::parse_int("comparison.closed_form_replicas", *v));
    if (auto v = take("comparison.closed_form_tol"))
        spec.comparison.closed_form_tol =
            detail::parse_double("comparison.closed_form_tol", *v);

    if (auto v = take("concentration.dims"))
        spec.concentration.dims = detail::parse_ints("concentration.dims", *v);
    if (auto v = take("concentration.lambdas"))
        spec.concentration.lambdas = detail::parse_doubles("concentration.lambdas", *v);
    if (auto v = take("concentration.cs"))
        spec.concentration.cs = detail::parse_doubles("concentration.cs", *v);
    if (auto v = take("concentration.replicas"))
        spec.concentration.replicas = int(detail::parse_int("concentration.replicas", *v));

    if (auto v = take("covariance.eps"))
        spec.covariance.eps = detail::parse_double("covariance.eps", *v);
    if (auto v = take("covariance.tol"))
        spec.covariance.tol = detail::parse_double("covariance.tol", *v);
    if (auto v = take("covariance.expect_dudley"))
        spec.covariance.expect_dudley = detail::parse_status("covariance.expect_dudley", *v);
    if (auto v = take("covariance.expect_coalescence"))
        spec.covariance.expect_coalescence =
            detail::parse_status("covariance.expect_coalescence", *v);

    if (!kv.empty()) throw ParseError("unknown key '" + kv.begin()->first + "'");

    // Kind-specific requirements and defaults.
    spec.sim.seed = spec.seed;
    if (spec.needs_phi() && !phi_given)
        throw ParseError("missing required key 'sim.phi' for kind " + kind_name(spec.kind));
    spec.sim.phi.validate();
    switch (spec.kind) {
        case ExperimentKind::Simulate:
            if (!(spec.sim.t_target > 0.0))
                throw ParseError("missing required key 'sim.t' for kind simulate");
            spec.sim.validate();
            break;
        case ExperimentKind::Lil:
            if (spec.lil.n_max <= 0)
                throw ParseError("kind lil requires lil.n_min and lil.n_max");
            break;
        case ExperimentKind::Coupling:
            if (spec.coupling.n_max <= 0)
                throw ParseError("kind coupling requires coupling.n_min and coupling.n_max");
            if (spec.sim.phi.family == PhiFamily::Arratia)
                throw ParseError("kind coupling requires a continuous phi family");
            spec.sim.couple_tangent = true;
            if (spec.sim.grid == GridRule::SqrtGrid && spec.sim.explicit_grid.empty()) {
                // default coupling grid: 16 evenly spaced points in [0, 1)
                spec.sim.grid = GridRule::Explicit;
                for (int k = 0; k < 16; ++k)
                    spec.sim.explicit_grid.push_back(double(k) / 16.0);
            }
            break;
        case ExperimentKind::Comparison:
        case ExperimentKind::Concentration:
            break;
        case ExperimentKind::Covariance:
            if (!(spec.covariance.eps > 0.0 && spec.covariance.eps <= 1.0))
                throw ParseError("covariance.eps must be in (0, 1]");
            if (!(spec.covariance.tol > 0.0))
                throw ParseError("covariance.tol must be positive");
            break;
    }
    if (spec.out_dir.empty()) spec.out_dir = "out/" + spec.name;
    return spec;
}

inline ExperimentSpec ExperimentSpec::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spec file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0)
        stem = stem.substr(0, dot);
    return parse_text(buf.str(), stem);
}

inline std::vector<std::pair<std::string, std::string>> ExperimentSpec::resolved_items()
    const {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&out](const std::string& k, const std::string& v) {
        out.emplace_back(k, v);
    };
    auto join_d = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + format_double(v[i]);
        return s;
    };
    auto join_i = [](const std::vector<int>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i)
            s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    add("name", name);
    add("kind", kind_name(kind));
    add("out", out_dir);
    add("seed", std::to_string(seed));
    add("threads", std::to_string(threads));
    if (needs_phi()) {
        add("sim.phi", sim.phi.name());
        if (sim.phi.family == PhiFamily::ExpAlpha)
            add("sim.alpha", format_double(sim.phi.alpha));
    }
    const bool sims = kind == ExperimentKind::Simulate || kind == ExperimentKind::Lil ||
                      kind == ExperimentKind::Coupling;
    if (sims) {
        if (kind == ExperimentKind::Simulate) {
            add("sim.t", format_double(sim.t_target));
            add("sim.dt", format_double(sim.resolved_dt()));
        } else if (sim.dt > 0.0) {
            add("sim.dt", format_double(sim.dt));
        }
        add("sim.grid", sim.grid == GridRule::SqrtGrid ? "sqrt" : "explicit");
        if (sim.grid == GridRule::Explicit)
            add("sim.points", join_d(sim.explicit_grid));
        else if (kind == ExperimentKind::Simulate)
            add("sim.grid_size", std::to_string(make_grid(sim.t_target).size()));
        add("sim.replicas", std::to_string(sim.replicas));
        add("sim.couple_tangent", sim.couple_tangent ? "true" : "false");
        add("sim.merge_eps", format_double(sim.merge_eps));
    }
    switch (kind) {
        case ExperimentKind::Lil:
            add("lil.q", format_double(lil.q));
            add("lil.n_min", std::to_string(lil.n_min));
            add("lil.n_max", std::to_string(lil.n_max));
            add("lil.e_replicas", std::to_string(lil.e_replicas));
            add("lil.max_ratio", format_double(lil.max_ratio));
            add("lil.t_band", format_double(lil.t_band));
            break;
        case ExperimentKind::Coupling:
            add("coupling.q", format_double(coupling.q));
            add("coupling.n_min", std::to_string(coupling.n_min));
            add("coupling.n_max", std::to_string(coupling.n_max));
            add("coupling.max_inversions", std::to_string(coupling.max_inversions));
            add("coupling.decay", format_double(coupling.decay));
            break;
        case ExperimentKind::Comparison:
            add("comparison.rhos", join_d(comparison.rhos));
            add("comparison.dims", join_i(comparison.dims));
            add("comparison.replicas", std::to_string(comparison.replicas));
            add("comparison.closed_form_replicas",
                std::to_string(comparison.closed_form_replicas));
            add("comparison.closed_form_tol", format_double(comparison.closed_form_tol));
            break;
        case ExperimentKind::Concentration:
            add("concentration.dims", join_i(concentration.dims));
            add("concentration.lambdas", join_d(concentration.lambdas));
            add("concentration.cs", join_d(concentration.cs));
            add("concentration.replicas", std::to_string(concentration.replicas));
            break;
        case ExperimentKind::Covariance: {
            add("covariance.eps", format_double(covariance.eps));
            add("covariance.tol", format_double(covariance.tol));
            auto status = [](IntegralStatus s) {
                return s == IntegralStatus::Convergent ? "convergent" : "divergent";
            };
            if (covariance.expect_dudley)
                add("covariance.expect_dudley", status(*covariance.expect_dudley));
            if (covariance.expect_coalescence)
                add("covariance.expect_coalescence", status(*covariance.expect_coalescence));
            break;
        }
        case ExperimentKind::Simulate:
            break;
    }
    return out;
}

inline std::string ExperimentSpec::resolved_text() const {
    std::string out;
    for (const auto& [k, v] : resolved_items()) out += k + " = " + v + "\n";
    return out;
}

}  // namespace harris

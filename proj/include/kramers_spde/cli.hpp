#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/io.hpp"
#include "kramers_spde/kramers.hpp"
#include "kramers_spde/oracle_1d.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/simulate.hpp"
#include "kramers_spde/special_functions.hpp"
#include "kramers_spde/spectra.hpp"
#include "kramers_spde/stationary.hpp"
#include "kramers_spde/validate.hpp"

namespace kspde::cli {

enum ExitCode : int { Ok = 0, Usage = 2, Numerical = 3, ValidationFailed = 4 };

inline const std::vector<std::string> subcommands = {"predict", "simulate", "stationary", "eigen",
                                                     "specialfn", "validate", "sweep"};

/// Parses "a:step:b" (inclusive, empty when b < a), a comma list, or a single number.
[[nodiscard]] inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    auto num = [&text](const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != s.size()) fail(ErrorCode::InvalidConfig, "cannot parse grid '" + text + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) fail(ErrorCode::InvalidConfig, "range grid must be a:step:b");
        const double a = num(parts[0]);
        const double h = num(parts[1]);
        const double b = num(parts[2]);
        if (!(h > 0.0)) fail(ErrorCode::InvalidConfig, "range step must be positive");
        if (b < a) return out;
        const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
        for (long i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * h);
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
    return out;
}

[[nodiscard]] inline std::optional<int> parse_cutoff(const std::string& text) {
    if (text == "inf" || text == "infinity") return std::nullopt;
    std::size_t pos = 0;
    int d = -1;
    try {
        d = std::stoi(text, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != text.size() || d < 0) fail(ErrorCode::InvalidConfig, "--d must be a nonnegative integer or inf");
    return d;
}

[[nodiscard]] inline LocalPotential parse_potential(const std::string& text) {
    if (text == "quartic") return LocalPotential::quartic();
    std::vector<double> c;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        try {
            c.push_back(std::stod(p));
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidConfig, "--potential must be 'quartic' or comma-separated coefficients");
        }
    }
    return LocalPotential::from_coefficients(std::move(c));
}

[[nodiscard]] inline BoundaryCondition parse_bc(const std::string& text) {
    if (text == "neumann") return BoundaryCondition::Neumann;
    if (text == "periodic") return BoundaryCondition::Periodic;
    fail(ErrorCode::InvalidConfig, "--bc must be neumann or periodic");
}

[[nodiscard]] inline Scheme parse_scheme(const std::string& text) {
    if (text == "semi_implicit" || text == "semi-implicit") return Scheme::SemiImplicit;
    if (text == "exponential") return Scheme::Exponential;
    fail(ErrorCode::InvalidConfig, "--scheme must be semi_implicit or exponential");
}

namespace detail {

[[nodiscard]] inline std::string json_scalar_to_flag_value(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_scalar_to_flag_value(v[i]);
        return s;
    }
    fail(ErrorCode::InvalidConfig, "unsupported config value " + v.dump());
}

/// Flattens a config document into (flag, value) pairs; the potential block maps to --potential.
[[nodiscard]] inline std::vector<std::pair<std::string, nlohmann::json>> config_flags(const nlohmann::json& cfg) {
    std::vector<std::pair<std::string, nlohmann::json>> out;
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (it.key() == "potential" && it->is_object()) {
            if (it->contains("coefficients")) {
                out.emplace_back("potential", (*it)["coefficients"]);
            } else if (it->contains("preset")) {
                out.emplace_back("potential", (*it)["preset"]);
            }
            continue;
        }
        if (it.key() == "potential.coefficients" || it.key() == "potential.preset") {
            out.emplace_back("potential", it.value());
            continue;
        }
        out.emplace_back(it.key(), it.value());
    }
    return out;
}

[[nodiscard]] inline std::string flag_name(const std::string& token) {
    const auto eq = token.find('=');
    return token.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

}  // namespace detail

/// argv with --config merged in: config values only fill flags absent from the command line.
/// A run manifest (with "subcommand" and "config" keys) is accepted as a config file.
[[nodiscard]] inline std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i > 0 && args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (i > 0 && args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (!path) return args;
    args = std::move(kept);
    std::ifstream is(*path);
    if (!is) fail(ErrorCode::InvalidConfig, "cannot open config " + *path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::InvalidConfig, "config must be a JSON object");
    nlohmann::json cfg = doc;
    if (doc.contains("config") && doc["config"].is_object()) {
        cfg = doc["config"];
        const bool has_sub = std::any_of(args.begin() + 1, args.end(), [](const std::string& a) {
            return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
        });
        if (!has_sub && doc.contains("subcommand")) args.insert(args.begin() + 1, doc["subcommand"].get<std::string>());
    }
    std::set<std::string> present;
    for (std::size_t i = 1; i < args.size(); ++i)
        if (args[i].rfind("--", 0) == 0) present.insert(detail::flag_name(args[i]));
    for (const auto& [key, value] : detail::config_flags(cfg)) {
        if (present.count(key) != 0 || key == "config") continue;
        if (value.is_boolean() || (value.is_string() && (value == "true" || value == "false"))) {
            if (value == true || value == "true") args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        args.push_back(detail::json_scalar_to_flag_value(value));
    }
    return args;
}

/// Options of a parsed subcommand as a flat JSON object, for the manifest config echo.
[[nodiscard]] inline nlohmann::json echo_options(const CLI::App* sub) {
    static const std::set<std::string> skip = {"out", "json", "config", "help"};
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        std::string name = opt->get_single_name();
        if (name.empty() || skip.count(name) != 0) continue;
        if (opt->get_type_size() == 0) {
            j[name] = opt->count() > 0;
            continue;
        }
        if (opt->count() > 0) {
            std::string v;
            for (std::size_t i = 0; i < opt->results().size(); ++i) v += (i ? "," : "") + opt->results()[i];
            j[name] = v;
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

/// Output sink: a file (with manifest) or the provided stream.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : path_(path) {
        if (!path_.empty()) {
            file_ = std::make_unique<std::ofstream>(path_);
            if (!*file_) fail(ErrorCode::InvalidConfig, "cannot open output " + path_);
        }
        os_ = file_ ? file_.get() : &fallback;
    }
    [[nodiscard]] std::ostream& stream() { return *os_; }
    [[nodiscard]] bool to_file() const { return !path_.empty(); }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

struct Common {
    std::string potential = "quartic";
    std::string bc = "neumann";
    std::string out;
    std::string json;
    std::string config;
};

inline void add_common(CLI::App* sub, Common& c, bool with_bc = true) {
    sub->add_option("--potential", c.potential, "'quartic' or ascending coefficients c0,c1,...")->capture_default_str();
    if (with_bc) sub->add_option("--bc", c.bc, "neumann or periodic")->capture_default_str();
    sub->add_option("--out", c.out, "write tabular output to FILE (plus FILE.manifest.json)");
    sub->add_option("--json", c.json, "write the JSON record to FILE (default: OUT.json, else stderr)");
    sub->add_option("--config", c.config, "JSON file with default flag values");
}

/// For file output, writes the manifest and names it in a leading CSV comment.
inline void start_csv(Output& out, CsvWriter& csv, RunManifest& m) {
    if (!out.to_file()) return;
    const std::string mp = manifest_path_for(out.path());
    m.outputs.push_back(out.path());
    m.write(mp);
    csv.comment("manifest: " + mp);
}

inline void emit_json(const nlohmann::json& j, const Common& c, std::ostream& err, RunManifest* m = nullptr) {
    std::string path = c.json;
    if (path.empty() && !c.out.empty()) path = c.out + ".json";
    if (path.empty()) {
        err << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) fail(ErrorCode::InvalidConfig, "cannot open " + path);
    os << j.dump(2) << '\n';
    if (m != nullptr && !c.out.empty()) {
        m->outputs.push_back(path);
        m->write(manifest_path_for(c.out));
    }
}

[[nodiscard]] inline int resolve_thread_request(int flag) {
    if (const char* env = std::getenv("KRAMERS_SPDE_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return flag;
}

struct SimFlags {
    double eps = 0.05;
    std::string d = "15";
    double dt = 1e-3;
    double tmax = 1e6;
    double rho = 0.5;
    double r = 0.1;
    int n = 100;
    std::uint64_t seed = 1;
    std::string scheme = "exponential";
    int check_every = 10;
    int refine = 8;
    std::string direction = "minus_to_plus";
    bool identical_seeds = false;
    bool allow_overlap = false;
    int threads = 0;
};

inline void add_sim_flags(CLI::App* sub, SimFlags& f, bool with_eps_d) {
    if (with_eps_d) {
        sub->add_option("--eps", f.eps, "noise strength")->capture_default_str();
        sub->add_option("--d", f.d, "Galerkin cutoff")->capture_default_str();
    }
    sub->add_option("--dt", f.dt, "time step")->capture_default_str();
    sub->add_option("--tmax", f.tmax, "censoring horizon")->capture_default_str();
    sub->add_option("--rho", f.rho, "target ball radius (sup-norm)")->capture_default_str();
    sub->add_option("--r", f.r, "start ball radius (sup-norm)")->capture_default_str();
    sub->add_option("--n", f.n, "number of replicas")->capture_default_str();
    sub->add_option("--seed", f.seed, "64-bit base seed")->capture_default_str();
    sub->add_option("--scheme", f.scheme, "semi_implicit or exponential")->capture_default_str();
    sub->add_option("--check-every", f.check_every, "steps between hitting checks")->capture_default_str();
    sub->add_option("--refine", f.refine, "sup-norm grid refinement")->capture_default_str();
    sub->add_option("--direction", f.direction, "minus_to_plus or plus_to_minus")->capture_default_str();
    sub->add_flag("--identical-seeds", f.identical_seeds, "give every replica the base seed");
    sub->add_flag("--allow-overlap", f.allow_overlap, "accept overlapping start and target balls");
    sub->add_option("--threads", f.threads, "worker threads (0: available parallelism)")->capture_default_str();
}

[[nodiscard]] inline SimConfig make_sim_config(const LocalPotential& pot, BoundaryCondition bc, double L, int d,
                                               double eps, const SimFlags& f) {
    SimConfig cfg;
    cfg.pot = pot;
    cfg.bc = bc;
    cfg.L = L;
    cfg.d = d;
    cfg.eps = eps;
    cfg.dt = f.dt;
    cfg.t_max = f.tmax;
    cfg.rho = f.rho;
    cfg.r = f.r;
    cfg.seed = f.seed;
    cfg.scheme = parse_scheme(f.scheme);
    cfg.check_every = f.check_every;
    cfg.refine = f.refine;
    if (f.direction == "minus_to_plus") {
        cfg.direction = Direction::MinusToPlus;
    } else if (f.direction == "plus_to_minus") {
        cfg.direction = Direction::PlusToMinus;
    } else {
        fail(ErrorCode::InvalidConfig, "--direction must be minus_to_plus or plus_to_minus");
    }
    cfg.identical_seeds = f.identical_seeds;
    cfg.allow_overlapping_balls = f.allow_overlap;
    cfg.threads = resolve_thread_request(f.threads);
    cfg.validate();
    return cfg;
}

/// Dispatches one command line. Output goes to `out` unless --out is given; JSON records and
/// diagnostics go to `err` when no file is named.
inline int run(const std::vector<std::string>& raw_args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    try {
        args = merge_config(raw_args);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    }

    CLI::App app{"Kramers-law predictions and Galerkin Monte Carlo for the stochastic Allen-Cahn equation",
                 "kramers-spde"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version));

    // predict
    Common pc;
    std::string p_L = "1";
    std::string p_eps = "0.05";
    std::string p_d = "inf";
    double p_switch = 0.1;
    auto* predict = app.add_subcommand("predict", "Kramers-law prediction of the mean transition time");
    add_common(predict, pc);
    predict->add_option("--L", p_L, "domain length(s): value, list a,b,c or range a:step:b")->capture_default_str();
    predict->add_option("--eps", p_eps, "noise strength(s), same syntax as --L")->capture_default_str();
    predict->add_option("--d", p_d, "Galerkin cutoff or inf")->capture_default_str();
    predict->add_option("--lambda-switch", p_switch, "|lambda_1| threshold for near-bifurcation formulas")
        ->capture_default_str();

    // simulate
    Common sc;
    double s_L = 1.0;
    SimFlags sf;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo first-hitting times of the Galerkin system");
    add_common(simulate, sc);
    simulate->add_option("--L", s_L, "domain length")->capture_default_str();
    add_sim_flags(simulate, sf, true);

    // stationary
    Common stc;
    double st_L = 4.0;
    int st_intervals = InstantonProfile::default_intervals;
    auto* stationary = app.add_subcommand("stationary", "transition state profile and barrier height");
    add_common(stationary, stc);
    stationary->add_option("--L", st_L, "domain length")->capture_default_str();
    stationary->add_option("--intervals", st_intervals, "profile sampling intervals")->capture_default_str();

    // eigen
    Common ec;
    double e_L = 4.0;
    std::string e_profile = "instanton";
    int e_kmax = 8;
    int e_grid = 1024;
    auto* eigen = app.add_subcommand("eigen", "Sturm-Liouville spectrum of the linearization");
    add_common(eigen, ec);
    eigen->add_option("--L", e_L, "domain length")->capture_default_str();
    eigen->add_option("--profile", e_profile, "instanton, origin, minus or plus")->capture_default_str();
    eigen->add_option("--kmax", e_kmax, "largest label |k|")->capture_default_str();
    eigen->add_option("--grid", e_grid, "finite-difference intervals for instanton spectra")->capture_default_str();

    // specialfn
    Common fc;
    std::string f_grid = "0:0.5:10";
    auto* specialfn = app.add_subcommand("specialfn", "table of the bifurcation correction functions");
    add_common(specialfn, fc, false);
    specialfn->add_option("--grid", f_grid, "alpha grid a:step:b or list")->capture_default_str();

    // validate
    Common vc;
    auto* validate = app.add_subcommand("validate", "run the invariant suite of all modules");
    add_common(validate, vc, false);

    // sweep
    Common wc;
    std::string w_L = "1";
    std::string w_eps = "0.05";
    double w_switch = 0.1;
    bool w_mc = false;
    SimFlags wf;
    wf.n = 50;
    auto* sweep = app.add_subcommand("sweep", "prediction grid over L and eps, optionally with Monte Carlo");
    add_common(sweep, wc);
    sweep->add_option("--L", w_L, "domain length grid")->capture_default_str();
    sweep->add_option("--eps", w_eps, "noise strength grid")->capture_default_str();
    sweep->add_option("--d", wf.d, "Galerkin cutoff (inf allowed without --with-mc)")->capture_default_str();
    sweep->add_option("--lambda-switch", w_switch, "|lambda_1| threshold")->capture_default_str();
    sweep->add_flag("--with-mc", w_mc, "attach Monte Carlo columns");
    add_sim_flags(sweep, wf, false);
    wf.d = "inf";

    std::vector<std::string> argv_rev(args.rbegin(), args.rend() - 1);
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream eo;
        const int code = app.exit(e, o, eo);
        out << o.str();
        err << eo.str();
        return code == 0 ? Ok : Usage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        RunManifest manifest;
        manifest.subcommand = sub->get_name();
        manifest.config = echo_options(sub);

        if (sub == predict) {
            const auto pot = parse_potential(pc.potential);
            const auto bc = parse_bc(pc.bc);
            const auto Ls = parse_grid(p_L);
            const auto epss = parse_grid(p_eps);
            const auto d = parse_cutoff(p_d);
            Output o(pc.out, out);
            CsvWriter csv(o.stream(), true);
            start_csv(o, csv, manifest);
            csv.header(predict_columns);
            for (double L : Ls)
                for (double eps : epss) csv.row(predict_row(L, eps, predict_time(pot, L, bc, eps, d, p_switch)));
            return Ok;
        }

        if (sub == simulate) {
            const auto pot = parse_potential(sc.potential);
            const auto bc = parse_bc(sc.bc);
            const auto d = parse_cutoff(sf.d);
            if (!d) fail(ErrorCode::InvalidConfig, "simulate needs a finite --d");
            const auto cfg = make_sim_config(pot, bc, s_L, *d, sf.eps, sf);
            manifest.seed = cfg.seed;
            std::vector<TransitionSample> samples;
            nlohmann::json summary;
            std::optional<TransitionStats> stats;
            std::string stats_error;
            try {
                stats = mc_stats(cfg, sf.n, &samples);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::AllCensored) throw;
                stats_error = e.what();
            }
            if (samples.empty()) {
                // every replica was censored; rerun serially to report the rows
                for (int i = 0; i < sf.n; ++i) samples.push_back(sample_transition(cfg, replica_seed(cfg, i)));
            }
            Output o(sc.out, out);
            CsvWriter csv(o.stream(), true);
            start_csv(o, csv, manifest);
            csv.header(simulate_columns);
            for (std::size_t i = 0; i < samples.size(); ++i) csv.row(simulate_row(static_cast<int>(i), samples[i]));
            summary["stats"] = stats ? to_json(*stats) : nlohmann::json(nullptr);
            if (!stats_error.empty()) summary["stats_error"] = stats_error;
            if (*d >= 1) {
                try {
                    summary["prediction"] = to_json(predict_time(pot, s_L, bc, sf.eps, *d));
                } catch (const Error& e) {
                    summary["prediction"] = nullptr;
                    summary["prediction_error"] = e.what();
                }
            } else {
                summary["prediction"] = nullptr;
                if (bc == BoundaryCondition::Neumann) {
                    const double s = std::sqrt(s_L);
                    const double start = s * cfg.start_value();
                    const double edge = s * (cfg.target_value() + (cfg.target_value() > cfg.start_value() ? -cfg.rho : cfg.rho));
                    summary["oracle_mfpt_1d"] = oracle_mfpt_1d(reduced_potential_1d(pot, s_L), sf.eps, start, edge);
                }
            }
            emit_json(summary, sc, err, &manifest);
            return stats ? Ok : Numerical;
        }

        if (sub == stationary) {
            const auto pot = parse_potential(stc.potential);
            const auto bc = parse_bc(stc.bc);
            const auto bh = barrier_height(pot, st_L, bc);
            const auto prof = bh.transition_state == TransitionStateKind::Instanton
                                  ? instanton(pot, st_L, bc, st_intervals)
                                  : InstantonProfile::constant(pot, bc, st_L, 0.0, st_intervals);
            Output o(stc.out, out);
            CsvWriter csv(o.stream());
            start_csv(o, csv, manifest);
            csv.comment("bc=" + std::string(to_string(bc)) + " L=" + format_number(st_L) +
                        " intervals=" + std::to_string(prof.intervals()));
            csv.header({"x", "u"});
            for (int j = 0; j <= prof.intervals(); ++j)
                csv.row({format_number(prof.x(j)), format_number(prof.samples[static_cast<std::size_t>(j)])});
            nlohmann::json rec;
            rec["transition_state"] = std::string(to_string(bh.transition_state));
            rec["E"] = bh.transition_state == TransitionStateKind::Instanton ? nlohmann::json(prof.E) : nlohmann::json(nullptr);
            rec["H0"] = bh.H0;
            rec["V_value"] = prof.V_value;
            rec["deriv_L2"] = prof.deriv_L2;
            rec["turning"] = {prof.turning.u2, prof.turning.u3};
            emit_json(rec, stc, err, &manifest);
            return Ok;
        }

        if (sub == eigen) {
            const auto pot = parse_potential(ec.potential);
            const auto bc = parse_bc(ec.bc);
            SpectrumReport rep;
            if (e_profile == "instanton") {
                rep = eigs_profile(instanton(pot, e_L, bc), e_kmax, e_grid);
            } else if (e_profile == "origin" || e_profile == "minus" || e_profile == "plus") {
                const auto which = e_profile == "origin" ? ConstantPoint::Origin
                                                         : (e_profile == "minus" ? ConstantPoint::Minus : ConstantPoint::Plus);
                rep = eigs_constant(pot, e_L, bc, which, e_kmax);
            } else {
                fail(ErrorCode::InvalidConfig, "--profile must be instanton, origin, minus or plus");
            }
            const auto den = eigs_constant(pot, e_L, bc, ConstantPoint::Minus, e_kmax);
            const int cut = std::min({e_kmax, rep.max_cutoff(), den.max_cutoff()});
            Output o(ec.out, out);
            CsvWriter csv(o.stream());
            start_csv(o, csv, manifest);
            csv.header({"label", "eigenvalue"});
            const int lo = bc == BoundaryCondition::Neumann ? 0 : -rep.max_cutoff();
            std::vector<std::pair<std::size_t, int>> order;
            for (int k = lo; k <= rep.max_cutoff(); ++k) order.emplace_back(SpectrumReport::index_of(bc, k), k);
            std::sort(order.begin(), order.end());
            for (const auto& [idx, k] : order) csv.row({std::to_string(k), format_number(rep.eigenvalues[idx])});
            auto j = to_json(rep);
            j["det_ratio"] = json_number(det_ratio(rep, den, cut));
            j["det_ratio_cutoff"] = cut;
            emit_json(j, ec, err, &manifest);
            return Ok;
        }

        if (sub == specialfn) {
            const auto grid = parse_grid(f_grid);
            Output o(fc.out, out);
            CsvWriter csv(o.stream());
            start_csv(o, csv, manifest);
            csv.header({"alpha", "psi_plus", "psi_minus", "theta_plus", "theta_minus"});
            for (double a : grid)
                csv.row({format_number(a), format_number(psi(Branch::Plus, a)), format_number(psi(Branch::Minus, a)),
                         format_number(theta(Branch::Plus, a)), format_number(theta(Branch::Minus, a))});
            return Ok;
        }

        if (sub == validate) {
            const auto results = run_validation_suite();
            Output o(vc.out, out);
            bool all = true;
            for (const auto& r : results) {
                o.stream() << (r.passed ? "PASS " : "FAIL ") << r.module << '/' << r.name << ": " << r.detail << '\n';
                all = all && r.passed;
            }
            o.stream() << (all ? "all checks passed" : "validation failed") << '\n';
            return all ? Ok : ValidationFailed;
        }

        if (sub == sweep) {
            const auto pot = parse_potential(wc.potential);
            const auto bc = parse_bc(wc.bc);
            const auto Ls = parse_grid(w_L);
            const auto epss = parse_grid(w_eps);
            const auto d = parse_cutoff(wf.d);
            if (w_mc && !d) fail(ErrorCode::InvalidConfig, "--with-mc needs a finite --d");
            if (w_mc) manifest.seed = wf.seed;
            Output o(wc.out, out);
            CsvWriter csv(o.stream(), true);
            start_csv(o, csv, manifest);
            auto cols = predict_columns;
            if (w_mc) cols.insert(cols.end(), sweep_mc_columns.begin(), sweep_mc_columns.end());
            csv.header(cols);
            nlohmann::json rows = nlohmann::json::array();
            for (double L : Ls) {
                for (double eps : epss) {
                    const auto p = predict_time(pot, L, bc, eps, d, w_switch);
                    auto row = predict_row(L, eps, p);
                    nlohmann::json rj = {{"L", L}, {"eps", eps}, {"prediction", to_json(p)}};
                    if (w_mc) {
                        const auto cfg = make_sim_config(pot, bc, L, *d, eps, wf);
                        try {
                            const auto st = mc_stats(cfg, wf.n);
                            row.push_back(format_number(st.mean));
                            row.push_back(format_number(st.stderr_));
                            row.push_back(std::to_string(st.censored));
                            rj["mc"] = to_json(st);
                        } catch (const Error& e) {
                            if (e.code() != ErrorCode::AllCensored) throw;
                            row.insert(row.end(), {"nan", "nan", std::to_string(wf.n)});
                            rj["mc"] = nullptr;
                        }
                    }
                    csv.row(row);
                    rows.push_back(rj);
                }
            }
            if (!wc.json.empty() || !wc.out.empty()) emit_json({{"rows", rows}}, wc, err, &manifest);
            return Ok;
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::WrongBoundaryCondition ? Usage : Numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Numerical;
    }
    return Usage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace kspde::cli

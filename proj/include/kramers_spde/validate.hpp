#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kramers_spde/energy.hpp"
#include "kramers_spde/errors.hpp"
#include "kramers_spde/kramers.hpp"
#include "kramers_spde/oracle_1d.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/simulate.hpp"
#include "kramers_spde/special_functions.hpp"
#include "kramers_spde/spectra.hpp"
#include "kramers_spde/spectral.hpp"
#include "kramers_spde/stationary.hpp"

namespace kspde {

struct CheckResult {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

[[nodiscard]] inline std::string fmt_value(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

[[nodiscard]] inline FourierState random_state(std::mt19937_64& g, BoundaryCondition bc, double L, int d, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp);
    auto s = FourierState::zero(bc, L, d);
    for (auto& c : s.coeffs) c = u(g);
    return s;
}

/// Rotates each periodic (a_k, b_k) pair by 2 pi k phi / L, i.e. translates the field by phi.
[[nodiscard]] inline FourierState translated(const FourierState& s, double phi) {
    auto t = s;
    for (int k = 1; k <= s.d; ++k) {
        const double th = 2.0 * std::numbers::pi * k * phi / s.L;
        const double a = s.coeffs[2 * static_cast<std::size_t>(k) - 1];
        const double b = s.coeffs[2 * static_cast<std::size_t>(k)];
        t.coeffs[2 * static_cast<std::size_t>(k) - 1] = a * std::cos(th) - b * std::sin(th);
        t.coeffs[2 * static_cast<std::size_t>(k)] = a * std::sin(th) + b * std::cos(th);
    }
    return t;
}

}  // namespace detail

/// Quick invariant suite over all modules. Each check catches its own errors so one failure
/// does not hide the others.
[[nodiscard]] inline std::vector<CheckResult> run_validation_suite() {
    std::vector<CheckResult> out;
    auto check = [&out](std::string module, std::string name, const std::function<std::pair<bool, std::string>()>& f) {
        CheckResult r{std::move(module), std::move(name), false, {}};
        try {
            auto [ok, detail] = f();
            r.passed = ok;
            r.detail = std::move(detail);
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        out.push_back(std::move(r));
    };
    using detail::fmt_value;
    const auto pot = LocalPotential::quartic();
    const auto N = BoundaryCondition::Neumann;
    const auto P = BoundaryCondition::Periodic;

    check("potential", "normalization", [&] {
        const double v = pot.eval(2, 0.0);
        return std::pair{v == -1.0 && pot.dU(0.0) == 0.0, "U''(0) = " + fmt_value(v)};
    });
    check("potential", "critical_points", [&] {
        const auto cp = pot.critical_points();
        const bool ok = std::abs(cp.u_minus + 1.0) < 1e-12 && std::abs(cp.u_plus - 1.0) < 1e-12;
        return std::pair{ok, "u- = " + fmt_value(cp.u_minus) + ", u+ = " + fmt_value(cp.u_plus)};
    });
    check("potential", "assumptions", [&] {
        const auto rep = check_assumptions(pot);
        return std::pair{rep.period_bracket_positive && rep.period_increasing_near_zero && rep.supercritical,
                         "C4(pi) = " + fmt_value(rep.c4_at_bifurcation)};
    });

    check("spectral", "round_trip", [&] {
        std::mt19937_64 g(7);
        double worst = 0.0;
        for (auto bc : {N, P}) {
            for (int d : {8, 40}) {
                const auto s = detail::random_state(g, bc, 2.5, d, 1.0);
                const int n = default_grid_size(pot, bc, d);
                const auto back = from_grid(to_grid(s, n), bc, 2.5, d);
                for (std::size_t i = 0; i < s.coeffs.size(); ++i)
                    worst = std::max(worst, std::abs(back.coeffs[i] - s.coeffs[i]));
            }
        }
        return std::pair{worst <= 1e-12, "max deviation " + fmt_value(worst)};
    });
    check("spectral", "eigenvalue_consistency", [&] {
        double worst = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double lam = linearized_eigenvalue(N, 1.7, k, Linearization::Origin, pot);
            const double num = linearized_eigenvalue(N, 1.7, k, Linearization::MinusWell, pot);
            worst = std::max({worst, std::abs(lam + 1.0 - laplace_eigenvalue(N, 1.7, k)), std::abs(num - lam - 3.0)});
        }
        return std::pair{worst <= 1e-12, "max deviation " + fmt_value(worst)};
    });

    check("potential", "gradient_vs_finite_differences", [&] {
        std::mt19937_64 g(11);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const auto bc = trial % 2 == 0 ? N : P;
            auto s = detail::random_state(g, bc, 1.3, 6, 1.0);
            const auto grad = grad_V(s, pot);
            double gmax = 0.0;
            double err = 0.0;
            for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
                const double h = 1e-5;
                auto sp = s;
                auto sm = s;
                sp.coeffs[i] += h;
                sm.coeffs[i] -= h;
                const double fd = (energy_V(sp, pot).value - energy_V(sm, pot).value) / (2.0 * h);
                err = std::max(err, std::abs(fd - grad[i]));
                gmax = std::max(gmax, std::abs(grad[i]));
            }
            worst = std::max(worst, err / (1.0 + gmax));
        }
        return std::pair{worst <= 1e-5, "relative deviation " + fmt_value(worst)};
    });
    check("potential", "energy_symmetries", [&] {
        std::mt19937_64 g(13);
        auto s = detail::random_state(g, N, 2.0, 9, 0.8);
        auto r = s;
        for (std::size_t i = 1; i < r.coeffs.size(); i += 2) r.coeffs[i] = -r.coeffs[i];
        const double dn = std::abs(energy_V(s, pot).value - energy_V(r, pot).value);
        auto p = detail::random_state(g, P, 3.0, 7, 0.8);
        double dp = 0.0;
        for (double phi : {0.3, 1.1, 2.4}) dp = std::max(dp, std::abs(energy_V(p, pot).value - energy_V(detail::translated(p, phi), pot).value));
        return std::pair{dn <= 1e-12 && dp <= 1e-12, "reflection " + fmt_value(dn) + ", translation " + fmt_value(dp)};
    });

    check("stationary", "small_energy_period", [&] {
        const double T = period_T(pot, 1e-6);
        return std::pair{std::abs(T - 2.0 * std::numbers::pi) <= 1e-3, "T(1e-6) = " + fmt_value(T)};
    });
    check("stationary", "period_monotone", [&] {
        const double E0 = pot.E0();
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 20; ++i) {
            const double t = static_cast<double>(i) / 19.0;
            const double E = E0 * std::pow(10.0, std::log10(1e-6) * (1.0 - t) + std::log10(0.999) * t);
            worst = std::min(worst, dT_dE(pot, E));
        }
        return std::pair{worst > 0.0, "min dT/dE = " + fmt_value(worst)};
    });
    check("stationary", "instanton_neumann_L4", [&] {
        const auto prof = instanton(pot, 4.0, N);
        const double res = prof.ode_residual();
        return std::pair{res <= 1e-6 && prof.sign_changes() == 1, "residual " + fmt_value(res)};
    });

    check("spectra", "closed_form_product", [&] {
        const auto num = eigs_constant(pot, 1.0, N, ConstantPoint::Origin, 100000);
        const auto den = eigs_constant(pot, 1.0, N, ConstantPoint::Minus, 100000);
        const int excl[] = {0};
        const auto pr = det_ratio_log(num, den, 100000, excl);
        const double pref = 2.0 * std::numbers::pi * std::sqrt(std::exp(pr.log_abs) / (std::abs(num.mu(0)) * den.mu(0)));
        const double ref = closed_form_product(pot, 1.0, N);
        const double rel = std::abs(pref / ref - 1.0);
        return std::pair{rel <= 1e-4, "relative gap " + fmt_value(rel)};
    });
    check("spectra", "instanton_index", [&] {
        const auto sn = eigs_profile(instanton(pot, 4.0, N), 4, 1024);
        const auto sp = eigs_profile(instanton(pot, 7.0, P), 4, 1024);
        const bool ok = sn.negative_count == 1 && sn.zero_modes == 0 && sp.negative_count == 1 && sp.zero_modes == 1 &&
                        std::abs(sp.mu(-1)) <= 1e-6 * sp.mu(1);
        return std::pair{ok, "periodic mu_-1 = " + fmt_value(sp.mu(-1))};
    });

    check("kramers", "special_function_endpoints", [&] {
        const double p0 = std::tgamma(0.25) / (std::pow(2.0, 1.25) * std::sqrt(std::numbers::pi));
        const double t0 = std::sqrt(std::numbers::pi / 8.0);
        const double e = std::max({std::abs(psi(Branch::Plus, 0.0) - p0), std::abs(psi(Branch::Minus, 0.0) - p0),
                                   std::abs(theta(Branch::Plus, 0.0) - t0), std::abs(theta(Branch::Minus, 0.0) - t0)});
        // leading large-alpha expansions of the Bessel and erfc asymptotics
        const double a = 1e3;
        const double r = std::sqrt(1.0 + 1.0 / a);
        const double x = std::max({std::abs(psi(Branch::Plus, a) - r * (1.0 - 1.5 / (a * a))),
                                   std::abs(psi(Branch::Minus, a) - 2.0 * r * (1.0 + 6.0 / (a * a))),
                                   std::abs(theta(Branch::Plus, a) - (1.0 + 1.0 / a) * (1.0 - 4.0 / (a * a))),
                                   std::abs(theta(Branch::Minus, 50.0) - std::sqrt(std::numbers::pi / 2.0))});
        const bool lim = x <= 1e-7;
        return std::pair{e <= 1e-9 && lim, "endpoint deviation " + fmt_value(e) + ", expansion deviation " + fmt_value(x)};
    });
    check("kramers", "reference_prediction", [&] {
        const auto p = predict_time(pot, 1.0, N, 0.05);
        return std::pair{std::abs(p.expected_time / 517.09 - 1.0) < 1e-3 && p.regime == Regime::NeumannSmallL,
                         "E[tau] = " + fmt_value(p.expected_time)};
    });
    check("kramers", "continuity_at_bifurcation", [&] {
        double worst = 0.0;
        for (auto bc : {N, P}) {
            const double Lc = bifurcation_length(bc);
            const double left = predict_time(pot, Lc, bc, 0.01).prefactor;
            const double h = 5e-4;
            const double f1 = predict_time(pot, Lc + h, bc, 0.01).prefactor;
            const double f2 = predict_time(pot, Lc + 2 * h, bc, 0.01).prefactor;
            const double f3 = predict_time(pot, Lc + 3 * h, bc, 0.01).prefactor;
            const double right = 3.0 * f1 - 3.0 * f2 + f3;
            worst = std::max(worst, std::abs(right / left - 1.0));
        }
        return std::pair{worst <= 1e-6, "relative jump " + fmt_value(worst)};
    });

    check("simulate", "determinism", [&] {
        SimConfig cfg;
        cfg.d = 3;
        cfg.eps = 0.2;
        cfg.t_max = 50.0;
        cfg.seed = 99;
        const auto a = sample_transition(cfg);
        const auto b = sample_transition(cfg);
        return std::pair{a.tau == b.tau && a.steps == b.steps && a.censored == b.censored, "tau = " + fmt_value(a.tau)};
    });
    check("simulate", "stationary_point", [&] {
        SimConfig cfg;
        cfg.eps = 0.0;
        cfg.d = 5;
        const auto s = FourierState::constant(N, cfg.L, cfg.d, pot.u_minus());
        const std::vector<double> xi(s.coeffs.size(), 1.0);
        const auto t = step(s, cfg, xi);
        double dev = 0.0;
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) dev = std::max(dev, std::abs(t.coeffs[i] - s.coeffs[i]));
        return std::pair{dev <= 1e-12, "deviation " + fmt_value(dev)};
    });
    check("simulate", "oracle_identity", [&] {
        const auto r = oracle_identity_1d(reduced_potential_1d(pot, 1.0), 0.05, -1.5, -0.9, 0.5, 1.5);
        return std::pair{r.residual <= 1e-6, "residual " + fmt_value(r.residual)};
    });
    return out;
}

}  // namespace kspde

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/quadrature.hpp"
#include "kramers_spde/special_functions.hpp"
#include "kramers_spde/spectra.hpp"
#include "kramers_spde/spectral.hpp"
#include "kramers_spde/stationary.hpp"

namespace kspde {

enum class Regime {
    NeumannSmallL,
    NeumannNearBelow,
    NeumannNearAbove,
    NeumannLargeL,
    PeriodicSmallL,
    PeriodicNearBelow,
    PeriodicNearAbove,
    PeriodicLargeL,
};

[[nodiscard]] constexpr std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::NeumannSmallL: return "NeumannSmallL";
        case Regime::NeumannNearBelow: return "NeumannNearBelow";
        case Regime::NeumannNearAbove: return "NeumannNearAbove";
        case Regime::NeumannLargeL: return "NeumannLargeL";
        case Regime::PeriodicSmallL: return "PeriodicSmallL";
        case Regime::PeriodicNearBelow: return "PeriodicNearBelow";
        case Regime::PeriodicNearAbove: return "PeriodicNearAbove";
        case Regime::PeriodicLargeL: return "PeriodicLargeL";
    }
    return "Unknown";
}

[[nodiscard]] constexpr BoundaryCondition regime_bc(Regime r) noexcept {
    switch (r) {
        case Regime::NeumannSmallL:
        case Regime::NeumannNearBelow:
        case Regime::NeumannNearAbove:
        case Regime::NeumannLargeL: return BoundaryCondition::Neumann;
        default: return BoundaryCondition::Periodic;
    }
}

[[nodiscard]] constexpr bool regime_uses_instanton(Regime r) noexcept {
    return r == Regime::NeumannNearAbove || r == Regime::NeumannLargeL || r == Regime::PeriodicNearAbove ||
           r == Regime::PeriodicLargeL;
}

[[nodiscard]] constexpr bool regime_is_near(Regime r) noexcept {
    return r == Regime::NeumannNearBelow || r == Regime::NeumannNearAbove || r == Regime::PeriodicNearBelow ||
           r == Regime::PeriodicNearAbove;
}

struct KramersPrediction {
    Regime regime = Regime::NeumannSmallL;
    double H0 = 0.0;
    double prefactor = 0.0;
    double expected_time = 0.0;  // may be +inf when H0/eps overflows; see log10_expected_time
    double log10_expected_time = 0.0;
    double remainder_scale = 0.0;
    double C4 = 0.0;
    double lambda1 = 0.0;
    std::optional<double> mu1;
    std::optional<int> d_used;  // empty means d = infinity
};

struct KramersOptions {
    double lambda_switch = 0.1;
    int eigen_kmax = 16;
    int eigen_grid = 1024;
};

/// Normal-form coefficient of the |z_1|^4 term.
[[nodiscard]] inline double c4(const LocalPotential& pot, double L, BoundaryCondition bc) {
    return bc == BoundaryCondition::Neumann ? c4_neumann(pot, L) : c4_periodic(pot, L);
}

/// The same coefficient from the Taylor data a3 = U'''(0)/(2 sqrt L), a4 = U''''(0)/(6L):
/// C4 = 3/2 a4 + 2 a3^2 (1/|lambda_0| - 1/(2 lambda_2)).
[[nodiscard]] inline double c4_normal_form(const LocalPotential& pot, double L, BoundaryCondition bc) {
    const double a3 = pot.eval(3, 0.0) / (2.0 * std::sqrt(L));
    const double a4 = pot.eval(4, 0.0) / (6.0 * L);
    const double lambda0 = -1.0;
    const double lambda2 = laplace_eigenvalue(bc, L, 2) - 1.0;
    return 1.5 * a4 + 2.0 * a3 * a3 * (1.0 / std::abs(lambda0) - 1.0 / (2.0 * lambda2));
}

/// L ||u'||_{L^2} of a periodic profile, with u' taken spectrally from the samples.
[[nodiscard]] inline double saddle_length(const InstantonProfile& prof) {
    if (prof.bc != BoundaryCondition::Periodic) fail(ErrorCode::WrongBoundaryCondition, "saddle length needs a periodic profile");
    const int n = prof.intervals();
    const auto state = from_grid(std::span<const double>(prof.samples.data(), static_cast<std::size_t>(n)), prof.bc,
                                 prof.L, n / 2 - 1);
    return prof.L * std::sqrt(state.derivative_norm_sq());
}

[[nodiscard]] inline double remainder_far(double eps) {
    const double le = std::abs(std::log(eps));
    return std::sqrt(eps) * std::pow(le, 1.5);
}

[[nodiscard]] inline double remainder_near(double eps, double lambda) {
    const double le = std::abs(std::log(eps));
    return std::sqrt(eps * le * le * le / std::max(std::abs(lambda), std::sqrt(eps * le)));
}

namespace detail {

/// sum_{k=k0}^{d} term(k), or to infinity when d is empty. For k > k_exact the terms are
/// log(1 + A/(a k^2)) - log(1 + B/(a k^2)) + beta/k^4, where the second-order perturbation
/// coefficient beta is fitted to the last exact term. Far tails use Euler-Maclaurin with the series
/// int_M^inf log(1 + A/x^2) dx = A/M - A^2/(6M^3) + A^3/(15M^5).
[[nodiscard]] inline double log_product_sum(int k0, std::optional<int> d, int k_exact,
                                            const std::function<double(int)>& term, double a, double A, double B) {
    auto asym = [&](double k) { return std::log1p(A / (a * k * k)) - std::log1p(B / (a * k * k)); };
    double beta = 0.0;
    if (k_exact >= std::max(k0, 2)) beta = (term(k_exact) - asym(k_exact)) * std::pow(k_exact, 4);
    auto tail = [&](double k) { return asym(k) + beta / (k * k * k * k); };
    CompensatedSum acc;
    const int direct_end = d ? *d : std::max(k_exact, k0) + 4000;
    for (int k = k0; k <= direct_end; ++k) acc.add(k <= k_exact ? term(k) : tail(k));
    if (!d) {
        const double M = direct_end + 1;
        auto integral = [&](double c) {
            const double q = c / a;
            return q / M - q * q / (6.0 * M * M * M) + q * q * q / (15.0 * M * M * M * M * M);
        };
        auto deriv = [&](double c) {
            const double q = c / a;
            return -2.0 * q / (M * M * M + q * M);
        };
        // sum_{k >= M} f(k) = int_M^inf f + f(M)/2 - f'(M)/12
        acc.add(integral(A) - integral(B) + 0.5 * asym(M) - (deriv(A) - deriv(B)) / 12.0 +
                beta * (1.0 / (3.0 * M * M * M) + 0.5 / (M * M * M * M)));
    }
    return acc.value();
}

}  // namespace detail

/// Evaluates the prefactor formula of a given regime regardless of where lambda_1 lies,
/// so callers can compare neighbouring formulas. Throws OutOfRegime when the formula is
/// undefined at these parameters.
[[nodiscard]] inline KramersPrediction predict_with_regime(const LocalPotential& pot, double L, BoundaryCondition bc,
                                                           double eps, std::optional<int> d, Regime regime,
                                                           const KramersOptions& opt = {}) {
    if (!(eps > 0.0)) fail(ErrorCode::DomainError, "eps must be positive");
    if (!(L > 0.0)) fail(ErrorCode::DomainError, "L must be positive");
    if (d && *d < 1) fail(ErrorCode::DomainError, "cutoff d must be at least 1");
    if (regime_bc(regime) != bc) fail(ErrorCode::WrongBoundaryCondition, "regime does not match boundary condition");
    if (L > 2.0 * bifurcation_length(bc))
        fail(ErrorCode::UnsupportedRegime, "L beyond the second bifurcation is not supported");

    constexpr double pi = std::numbers::pi;
    const double c = pot.d2U(pot.u_minus());
    const double a = std::pow(mode_factor(bc) * pi / L, 2);
    auto nu_minus = [&](int k) { return a * k * k + c; };
    const double lambda0 = -1.0;
    const double lambda1 = a - 1.0;
    const double C = c4(pot, L, bc);

    KramersPrediction p;
    p.regime = regime;
    p.C4 = C;
    p.lambda1 = lambda1;
    p.d_used = d;

    // lambda_k / nu_k^- = (1 - 1/(a k^2)) / (1 + c/(a k^2)) is exactly the asymptotic form
    auto constant_sum = [&](int k0) {
        return detail::log_product_sum(k0, d, 0, [](int) { return 0.0; }, a, -1.0, c);
    };

    double log_pref = 0.0;
    if (!regime_uses_instanton(regime)) {
        p.H0 = -L * pot.U(pot.u_minus());
        const double ln_base = -std::log(std::abs(lambda0) * c);
        switch (regime) {
            case Regime::NeumannSmallL:
                if (!(lambda1 > 0.0)) fail(ErrorCode::OutOfRegime, "small-L formula needs lambda_1 > 0");
                log_pref = std::log(2.0 * pi) + 0.5 * (ln_base + constant_sum(1));
                break;
            case Regime::NeumannNearBelow: {
                const double s = std::sqrt(C * eps);
                if (!(C > 0.0) || !(lambda1 + s > 0.0) || lambda1 < 0.0)
                    fail(ErrorCode::OutOfRegime, "near-bifurcation formula undefined here");
                log_pref = std::log(2.0 * pi) +
                           0.5 * (std::log(lambda1 + s) + ln_base - std::log(nu_minus(1)) + constant_sum(2)) -
                           std::log(psi(Branch::Plus, lambda1 / s));
                break;
            }
            case Regime::PeriodicSmallL:
                if (!(lambda1 > 0.0)) fail(ErrorCode::OutOfRegime, "small-L formula needs lambda_1 > 0");
                log_pref = std::log(2.0 * pi) + 0.5 * ln_base + constant_sum(1);
                break;
            case Regime::PeriodicNearBelow: {
                const double s = std::sqrt(2.0 * C * eps);
                if (!(C > 0.0) || lambda1 < 0.0) fail(ErrorCode::OutOfRegime, "near-bifurcation formula undefined here");
                log_pref = std::log(2.0 * pi) + 0.5 * ln_base + std::log((lambda1 + s) / nu_minus(1)) + constant_sum(2) -
                           std::log(theta(Branch::Plus, lambda1 / s));
                break;
            }
            default: break;
        }
        p.remainder_scale = regime_is_near(regime) ? remainder_near(eps, lambda1) : remainder_far(eps);
    } else {
        if (!(L > bifurcation_length(bc))) fail(ErrorCode::OutOfRegime, "instanton formulas need L above the bifurcation");
        const auto prof = instanton(pot, L, bc);
        const int kmax = d ? std::min(*d, opt.eigen_kmax) : opt.eigen_kmax;
        const auto spec = eigs_profile(prof, std::max(kmax, 2), opt.eigen_grid);
        const int k_exact = spec.max_cutoff() - 1;
        double mean_q = 0.0;
        {
            CompensatedSum acc;
            const int n = prof.intervals();
            for (int j = 0; j <= n; ++j)
                acc.add(((j == 0 || j == n) ? 0.5 : 1.0) * pot.d2U(prof.samples[static_cast<std::size_t>(j)]));
            mean_q = acc.value() / n;
        }
        const double mu0 = spec.mu(0);
        const double mu1 = spec.mu(1);
        p.mu1 = mu1;
        p.H0 = prof.V_value - L * pot.U(pot.u_minus());
        auto mu_term = [&](int k) {
            if (bc == BoundaryCondition::Neumann) return std::log(spec.mu(k)) - std::log(nu_minus(k));
            return 0.5 * (std::log(spec.mu(k)) + std::log(spec.mu(-k))) - std::log(nu_minus(k));
        };
        auto mu_sum = [&](int k0) { return detail::log_product_sum(k0, d, k_exact, mu_term, a, mean_q, c); };
        const double ln_base = -std::log(std::abs(mu0) * c);
        switch (regime) {
            case Regime::NeumannNearAbove: {
                const double s = std::sqrt(C * eps);
                if (!(C > 0.0)) fail(ErrorCode::OutOfRegime, "near-bifurcation formula needs C4 > 0");
                log_pref = std::log(2.0 * pi) +
                           0.5 * (std::log(mu1 + s) + ln_base - std::log(nu_minus(1)) + mu_sum(2)) -
                           std::log(psi(Branch::Minus, mu1 / s));
                break;
            }
            case Regime::NeumannLargeL:
                log_pref = std::log(pi) + 0.5 * (ln_base + mu_sum(1));
                break;
            case Regime::PeriodicNearAbove: {
                if (!(C > 0.0)) fail(ErrorCode::OutOfRegime, "near-bifurcation formula needs C4 > 0");
                log_pref = std::log(2.0 * pi) + 0.5 * ln_base + std::log(std::sqrt(2.0 * C * eps) / nu_minus(1)) +
                           mu_sum(2) - std::log(theta(Branch::Minus, mu1 / std::sqrt(8.0 * C * eps)));
                break;
            }
            case Regime::PeriodicLargeL: {
                const double ell = saddle_length(prof);
                log_pref = std::log(2.0 * pi) + 0.5 * ln_base + std::log(std::sqrt(2.0 * pi * eps * mu1) / nu_minus(1)) +
                           mu_sum(2) - std::log(ell);
                break;
            }
            default: break;
        }
        p.remainder_scale = regime_is_near(regime) ? remainder_near(eps, mu1) : remainder_far(eps);
    }
    p.prefactor = std::exp(log_pref);
    const double log_time = log_pref + p.H0 / eps;
    p.expected_time = std::exp(log_time);
    p.log10_expected_time = log_time / std::numbers::ln10;
    return p;
}

/// Chooses the regime from the sign and size of lambda_1 and evaluates its formula.
[[nodiscard]] inline Regime select_regime(BoundaryCondition bc, double L, double lambda_switch) {
    if (L > 2.0 * bifurcation_length(bc))
        fail(ErrorCode::UnsupportedRegime, "L beyond the second bifurcation is not supported");
    const double lambda1 = laplace_eigenvalue(bc, L, 1) - 1.0;
    const bool near = std::abs(lambda1) <= lambda_switch;
    if (bc == BoundaryCondition::Neumann) {
        if (near) return lambda1 >= 0.0 ? Regime::NeumannNearBelow : Regime::NeumannNearAbove;
        return lambda1 > 0.0 ? Regime::NeumannSmallL : Regime::NeumannLargeL;
    }
    if (near) return lambda1 >= 0.0 ? Regime::PeriodicNearBelow : Regime::PeriodicNearAbove;
    return lambda1 > 0.0 ? Regime::PeriodicSmallL : Regime::PeriodicLargeL;
}

[[nodiscard]] inline KramersPrediction predict_time(const LocalPotential& pot, double L, BoundaryCondition bc, double eps,
                                                    std::optional<int> d = std::nullopt, double lambda_switch = 0.1,
                                                    const KramersOptions& opt = {}) {
    if (!(L > 0.0)) fail(ErrorCode::DomainError, "L must be positive");
    KramersOptions o = opt;
    o.lambda_switch = lambda_switch;
    return predict_with_regime(pot, L, bc, eps, d, select_regime(bc, L, lambda_switch), o);
}

}  // namespace kspde

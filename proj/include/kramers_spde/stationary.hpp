#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/quadrature.hpp"
#include "kramers_spde/spectral.hpp"

namespace kspde {

struct TurningPoints {
    double u2;
    double u3;
};

namespace detail {

/// g(u) = sign(u) sqrt(-2 U(u)) = u sqrt(W(u)); strictly increasing on [u-, u+].
[[nodiscard]] inline double signed_action(const LocalPotential& pot, double u) {
    return u * std::sqrt(std::max(pot.well_ratio()(u), 0.0));
}

/// Solves g(f) = target on the monotone branch containing it.
[[nodiscard]] inline double solve_signed_action(const LocalPotential& pot, double target) {
    if (target == 0.0) return 0.0;
    const double a = target < 0.0 ? pot.u_minus() : 0.0;
    const double b = target < 0.0 ? 0.0 : pot.u_plus();
    auto f = [&](double u) { return signed_action(pot, u) - target; };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, a, b, f(a), f(b), boost::math::tools::eps_tolerance<double>(52),
                                                     iters);
    return 0.5 * (r.first + r.second);
}

inline void check_energy(const LocalPotential& pot, double E) {
    if (!(E > 0.0 && E < pot.E0()))
        fail(ErrorCode::EnergyOutOfRange, "orbit energy must lie in (0, E0), got " + std::to_string(E));
}

inline constexpr int period_start_nodes = 128;
inline constexpr int period_max_nodes = 4096;

/// Gauss-Legendre on phi in (0, pi) with node doubling. `integrand(phi, f)` receives the
/// branch solution f(phi) of -U(f) = E cos^2 phi.
template <class F>
[[nodiscard]] double phi_quadrature(const LocalPotential& pot, double E, F&& integrand) {
    const double s = std::sqrt(2.0 * E);
    auto evaluate = [&](int n) {
        const auto& rule = gauss_legendre(n);
        CompensatedSum acc;
        for (int i = 0; i < n; ++i) {
            const double phi = 0.5 * std::numbers::pi * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
            const double f = solve_signed_action(pot, -s * std::cos(phi));
            acc.add(rule.weights[static_cast<std::size_t>(i)] * integrand(phi, f));
        }
        return 0.5 * std::numbers::pi * acc.value();
    };
    double prev = evaluate(period_start_nodes);
    for (int n = 2 * period_start_nodes; n <= period_max_nodes; n *= 2) {
        const double cur = evaluate(n);
        const double change = std::abs(cur - prev);
        if (change <= 1e-8 * std::abs(cur)) return cur;
        if (n == period_max_nodes) {
            if (change <= 1e-6 * std::abs(cur)) return cur;
            fail(ErrorCode::QuadratureNotConverged,
                 "period quadrature did not converge at E = " + std::to_string(E));
        }
        prev = cur;
    }
    return prev;
}

}  // namespace detail

/// U(u2) = U(u3) = -E with u2 < 0 < u3.
[[nodiscard]] inline TurningPoints turning_points(const LocalPotential& pot, double E) {
    detail::check_energy(pot, E);
    const double s = std::sqrt(2.0 * E);
    return {detail::solve_signed_action(pot, -s), detail::solve_signed_action(pot, s)};
}

/// Period of the closed orbit with first integral 1/2 u'^2 - U(u) = E, from
/// T/2 = int_0^pi sqrt(2E) cos(phi) / U'(f(phi)) dphi.
[[nodiscard]] inline double period_T(const LocalPotential& pot, double E) {
    detail::check_energy(pot, E);
    const double s = std::sqrt(2.0 * E);
    return 2.0 * detail::phi_quadrature(pot, E, [&](double phi, double f) { return s * std::cos(phi) / pot.dU(f); });
}

/// dT/dE = 2 int_0^pi [U'^2 - 2 U U''](f) cos(phi) / (sqrt(2E) U'(f)^3) dphi.
[[nodiscard]] inline double dT_dE(const LocalPotential& pot, double E) {
    detail::check_energy(pot, E);
    const double s = std::sqrt(2.0 * E);
    const Polynomial& bracket = pot.period_bracket();
    return 2.0 * detail::phi_quadrature(pot, E, [&](double phi, double f) {
               const double d = pot.dU(f);
               return bracket(f) * std::cos(phi) / (s * d * d * d);
           });
}

enum class TransitionStateKind { Constant, Instanton };

[[nodiscard]] constexpr std::string_view to_string(TransitionStateKind k) noexcept {
    return k == TransitionStateKind::Constant ? "constant" : "instanton";
}

/// Sampled stationary solution u'' = U'(u) on [0, L]; samples at x_j = j L / n, j = 0..n.
class InstantonProfile {
public:
    static constexpr int default_intervals = 4096;

    BoundaryCondition bc = BoundaryCondition::Neumann;
    double L = 0.0;
    double E = 0.0;
    int kinks = 1;
    TurningPoints turning{0.0, 0.0};
    std::vector<double> samples;
    std::vector<double> slopes;
    double V_value = 0.0;
    double deriv_L2 = 0.0;

    /// Integrates from (u2(E), 0) at x = 0 with classical RK4.
    static InstantonProfile integrate(const LocalPotential& pot, BoundaryCondition bc, double L, double E,
                                      int intervals = default_intervals) {
        InstantonProfile p(pot);
        p.bc = bc;
        p.L = L;
        p.E = E;
        p.turning = turning_points(pot, E);
        p.fill(intervals);
        return p;
    }

    /// Constant stationary solution u == value, treated as a degenerate profile (kinks = 0).
    static InstantonProfile constant(const LocalPotential& pot, BoundaryCondition bc, double L, double value,
                                     int intervals = default_intervals) {
        InstantonProfile p(pot);
        p.bc = bc;
        p.L = L;
        p.kinks = 0;
        p.E = -pot.U(value);
        p.turning = {value, value};
        p.constant_ = true;
        p.fill(intervals);
        return p;
    }

    [[nodiscard]] const LocalPotential& potential() const noexcept { return pot_; }
    [[nodiscard]] bool is_constant() const noexcept { return constant_; }
    [[nodiscard]] int intervals() const noexcept { return static_cast<int>(samples.size()) - 1; }
    [[nodiscard]] double spacing() const noexcept { return L / intervals(); }
    [[nodiscard]] double x(int j) const noexcept { return L * j / intervals(); }

    /// Profile values at n+1 equispaced points, re-integrated with at least 4096 RK4 steps.
    [[nodiscard]] std::vector<double> sample(int n) const {
        InstantonProfile copy = *this;
        copy.fill(n);
        return copy.samples;
    }

    /// Mirror solution x -> L - x (Neumann).
    [[nodiscard]] InstantonProfile reflected() const {
        InstantonProfile r = *this;
        std::reverse(r.samples.begin(), r.samples.end());
        std::reverse(r.slopes.begin(), r.slopes.end());
        for (auto& v : r.slopes) v = -v;
        return r;
    }

    /// Projection onto the Galerkin basis with cutoff d.
    [[nodiscard]] FourierState to_state(int d) const {
        const int n = intervals();
        if (bc == BoundaryCondition::Neumann) return from_grid(samples, bc, L, d);
        return from_grid(std::span<const double>(samples.data(), static_cast<std::size_t>(n)), bc, L, d);
    }

    [[nodiscard]] double sup_amplitude() const {
        double m = 0.0;
        for (double u : samples) m = std::max(m, std::abs(u));
        return m;
    }

    [[nodiscard]] int sign_changes() const {
        int c = 0;
        for (std::size_t j = 1; j < samples.size(); ++j)
            if ((samples[j - 1] < 0.0) != (samples[j] < 0.0)) ++c;
        return c;
    }

    /// sup_x |u'' - U'(u)| with a fourth-order five-point stencil, extended across the
    /// boundary by reflection (Neumann) or wrap-around (periodic).
    [[nodiscard]] double ode_residual() const {
        const int n = intervals();
        const double h = spacing();
        auto at = [&](int j) {
            if (bc == BoundaryCondition::Periodic) return samples[static_cast<std::size_t>(((j % n) + n) % n)];
            if (j < 0) j = -j;
            if (j > n) j = 2 * n - j;
            return samples[static_cast<std::size_t>(j)];
        };
        double worst = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double d2 = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2)) / (12.0 * h * h);
            worst = std::max(worst, std::abs(d2 - pot_.dU(at(j))));
        }
        return worst;
    }

    /// sup-variation of 1/2 u'^2 - U(u) along the samples.
    [[nodiscard]] double first_integral_variation() const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const double H = 0.5 * slopes[j] * slopes[j] - pot_.U(samples[j]);
            lo = std::min(lo, H);
            hi = std::max(hi, H);
        }
        return hi - lo;
    }

private:
    explicit InstantonProfile(const LocalPotential& pot) : pot_(pot) {}

    void fill(int n) {
        if (n < 2) fail(ErrorCode::GridTooSmall, "profile needs at least two intervals");
        samples.assign(static_cast<std::size_t>(n) + 1, turning.u2);
        slopes.assign(static_cast<std::size_t>(n) + 1, 0.0);
        if (!constant_) {
            const int sub = std::max(1, (default_intervals + n - 1) / n);
            const double h = L / (static_cast<double>(n) * sub);
            double u = turning.u2;
            double v = 0.0;
            for (int j = 1; j <= n; ++j) {
                for (int s = 0; s < sub; ++s) {
                    const double k1u = v;
                    const double k1v = pot_.dU(u);
                    const double k2u = v + 0.5 * h * k1v;
                    const double k2v = pot_.dU(u + 0.5 * h * k1u);
                    const double k3u = v + 0.5 * h * k2v;
                    const double k3v = pot_.dU(u + 0.5 * h * k2u);
                    const double k4u = v + h * k3v;
                    const double k4v = pot_.dU(u + h * k3u);
                    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                }
                samples[static_cast<std::size_t>(j)] = u;
                slopes[static_cast<std::size_t>(j)] = v;
            }
        }
        const double dx = L / n;
        CompensatedSum energy;
        CompensatedSum grad;
        for (int j = 0; j <= n; ++j) {
            const double w = (j == 0 || j == n) ? 0.5 * dx : dx;
            const double u = samples[static_cast<std::size_t>(j)];
            const double v = slopes[static_cast<std::size_t>(j)];
            energy.add(w * (0.5 * v * v + pot_.U(u)));
            grad.add(w * v * v);
        }
        V_value = energy.value();
        deriv_L2 = std::sqrt(grad.value());
    }

    LocalPotential pot_;
    bool constant_ = false;
};

/// Orbit energy E* with T(E*) = 2L (Neumann half orbit) or T(E*) = L (periodic full orbit).
[[nodiscard]] inline double instanton_energy(const LocalPotential& pot, double L, BoundaryCondition bc) {
    const double threshold = bifurcation_length(bc);
    if (!(L > threshold))
        fail(ErrorCode::NoInstanton, "no nonconstant stationary solution for L <= " + std::to_string(threshold));
    const double target = bc == BoundaryCondition::Neumann ? 2.0 * L : L;
    const double E0 = pot.E0();

    double lo = 1e-12 * E0;
    if (period_T(pot, lo) >= target) fail(ErrorCode::NotMonotone, "period exceeds target at the lower bracket");
    double hi = 0.0;
    for (int k = 1; k <= 50; ++k) {
        const double cand = E0 * (1.0 - std::ldexp(1.0, -k));
        if (period_T(pot, cand) > target) {
            hi = cand;
            break;
        }
        lo = std::max(lo, cand);
    }
    if (hi == 0.0) fail(ErrorCode::NotMonotone, "could not bracket the orbit energy");

    while (hi - lo > 1e-6 * hi) {
        const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (period_T(pot, mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double E = 0.5 * (lo + hi);
    for (int it = 0; it < 40; ++it) {
        const double r = period_T(pot, E) - target;
        if (r < 0.0) {
            lo = E;
        } else {
            hi = E;
        }
        const double slope = dT_dE(pot, E);
        double next = slope > 0.0 ? E - r / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - E);
        E = next;
        if (step <= 1e-10 * E) break;
    }
    return E;
}

/// n = 1 transition state for L above the first bifurcation.
/// Neumann phase convention: u(0) = u2 < 0, rising to u3 at x = L.
/// Periodic phase convention: the minimum of u sits at x = 0.
[[nodiscard]] inline InstantonProfile instanton(const LocalPotential& pot, double L, BoundaryCondition bc,
                                                int intervals = InstantonProfile::default_intervals) {
    const double E = instanton_energy(pot, L, bc);
    return InstantonProfile::integrate(pot, bc, L, E, intervals);
}

struct BarrierHeight {
    double H0;
    TransitionStateKind transition_state;
};

/// Communication height from u*_-: constant saddle below the first bifurcation, instanton above it.
[[nodiscard]] inline BarrierHeight barrier_height(const LocalPotential& pot, double L, BoundaryCondition bc) {
    const double V_minus = L * pot.U(pot.u_minus());
    if (L <= bifurcation_length(bc)) return {-V_minus, TransitionStateKind::Constant};
    const auto prof = instanton(pot, L, bc);
    return {prof.V_value - V_minus, TransitionStateKind::Instanton};
}

}  // namespace kspde

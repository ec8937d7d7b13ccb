#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"

namespace kspde {

using ScalarPotential = std::function<double(double)>;

/// Single-mode Galerkin reduction V1(y0) = L U(y0 / sqrt(L)) of the Neumann problem.
[[nodiscard]] inline ScalarPotential reduced_potential_1d(const LocalPotential& pot, double L) {
    const double s = std::sqrt(L);
    return [pot, L, s](double y) { return L * pot.U(y / s); };
}

namespace detail {

inline constexpr double oracle_rel_tol = 1e-10;
inline constexpr double oracle_accept_tol = 1e-8;

template <class F>
[[nodiscard]] double adaptive_integral(F&& f, double a, double b) {
    if (a == b) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, oracle_rel_tol, &err, &l1);
    if (!std::isfinite(v) || err > oracle_accept_tol * std::max(l1, std::numeric_limits<double>::min()))
        fail(ErrorCode::QuadratureNotConverged, "1D oracle quadrature did not reach tolerance");
    return v;
}

/// Scan extrema of V on [a, b]; they only set exponent shifts, so grid accuracy is enough.
[[nodiscard]] inline double scan_max(const ScalarPotential& V, double a, double b) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) m = std::max(m, V(a + (b - a) * i / 4000.0));
    return m;
}

[[nodiscard]] inline double scan_min(const ScalarPotential& V, double a, double b) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) m = std::min(m, V(a + (b - a) * i / 4000.0));
    return m;
}

/// Point left of `x` where exp(-(V - vmin)/eps) has dropped below 1e-30 and V is increasing leftwards.
[[nodiscard]] inline double left_cutoff(const ScalarPotential& V, double eps, double x, double vmin) {
    const double drop = 30.0 * std::log(10.0) * eps;
    double step = 0.05;
    double z = x;
    for (int i = 0; i < 400; ++i) {
        z -= step;
        if (V(z) - vmin > drop && V(z - step) > V(z)) return z;
        step *= 1.25;
    }
    fail(ErrorCode::QuadratureNotConverged, "potential does not confine on the left");
}

/// Mean first passage from `start` up to `target` > start, as exp(shift) * scaled value.
struct ScaledTime {
    double scaled;
    double log_shift;
    [[nodiscard]] double value() const { return scaled * std::exp(log_shift); }
};

[[nodiscard]] inline ScaledTime mfpt_rightward(const ScalarPotential& V, double eps, double start, double target) {
    const double lo0 = std::min(start, target) - 1.0;
    const double vmin = scan_min(V, lo0 - 4.0, target);
    const double vmax = scan_max(V, start, target);
    const double lo = left_cutoff(V, eps, std::min(start, lo0), vmin);
    auto inner = [&](double x) {
        return adaptive_integral([&](double z) { return std::exp(-(V(z) - vmin) / eps); }, lo, x);
    };
    const double outer =
        adaptive_integral([&](double x) { return std::exp((V(x) - vmax) / eps) * inner(x); }, start, target);
    return {outer / eps, (vmax - vmin) / eps};
}

}  // namespace detail

/// Exact mean first-passage time of dY = -V'(Y) dt + sqrt(2 eps) dW from `start` to `target`,
/// (1/eps) int_start^target e^{V(x)/eps} int_{-inf}^x e^{-V(z)/eps} dz dx, mirrored when target < start.
[[nodiscard]] inline double oracle_mfpt_1d(const ScalarPotential& V, double eps, double start, double target) {
    if (!(eps > 0.0)) fail(ErrorCode::DomainError, "eps must be positive");
    if (start == target) return 0.0;
    if (target > start) return detail::mfpt_rightward(V, eps, start, target).value();
    const ScalarPotential mirrored = [&V](double y) { return V(-y); };
    return detail::mfpt_rightward(mirrored, eps, -start, -target).value();
}

struct IdentityCheck {
    double Etau = 0.0;  // E_{a2}[tau_B]
    double J = 0.0;     // int h_{A,B} e^{-V/eps}
    double cap = 0.0;   // eps / int_{a2}^{b1} e^{V/eps}
    double residual = 0.0;
};

/// Potential-theoretic identity E[tau_B] cap(A, B) = J for intervals A = [a1, a2] left of
/// B = [b1, b2]. All three quantities share the exponent shifts, which cancel in the residual.
[[nodiscard]] inline IdentityCheck oracle_identity_1d(const ScalarPotential& V, double eps, double a1, double a2,
                                                      double b1, double b2) {
    if (!(a1 <= a2 && a2 < b1 && b1 <= b2)) fail(ErrorCode::DomainError, "need intervals A < B");
    if (!(eps > 0.0)) fail(ErrorCode::DomainError, "eps must be positive");
    const auto t = detail::mfpt_rightward(V, eps, a2, b1);
    const double vmax = detail::scan_max(V, a2, b1);
    const double vmin = detail::scan_min(V, a1 - 5.0, b1);
    const double lo = detail::left_cutoff(V, eps, a1 - 1.0, vmin);
    auto up = [&](double x) { return std::exp((V(x) - vmax) / eps); };
    auto down = [&](double z) { return std::exp(-(V(z) - vmin) / eps); };
    const double G = detail::adaptive_integral(up, a2, b1);
    // committor h(z) = int_z^{b1} e^{V/eps} / G on the gap, 1 on the left of a2
    auto h_weighted = [&](double z) { return down(z) * detail::adaptive_integral(up, z, b1) / G; };
    const double J_scaled = detail::adaptive_integral(down, lo, a2) + detail::adaptive_integral(h_weighted, a2, b1);

    IdentityCheck r;
    // scaled units: Etau carries e^{(vmax - vmin)/eps}, cap carries e^{-vmax/eps}, J carries e^{-vmin/eps}
    const double Etau_cap_scaled = t.scaled * std::exp(t.log_shift - (vmax - vmin) / eps) * eps / G;
    r.residual = std::abs(Etau_cap_scaled - J_scaled) / J_scaled;
    r.Etau = t.value();
    r.cap = eps / G * std::exp(-vmax / eps);
    r.J = J_scaled * std::exp(-vmin / eps);
    return r;
}

/// Classical 1D Eyring-Kramers value 2 pi / sqrt(V''(min) |V''(max)|) e^{(V(max) - V(min))/eps}.
[[nodiscard]] inline double eyring_kramers_1d(double v2_min, double v2_max, double barrier, double eps) {
    return 2.0 * std::numbers::pi / std::sqrt(v2_min * std::abs(v2_max)) * std::exp(barrier / eps);
}

}  // namespace kspde

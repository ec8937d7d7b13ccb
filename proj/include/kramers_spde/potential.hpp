#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/polynomial.hpp"

namespace kspde {

/// Affine gauge change applied when a user polynomial p is normalized:
///   U(u) = (p(shift + u) - value_offset) * value_scale
/// so that the local maximum sits at u = 0 with U(0) = 0 and U''(0) = -1.
struct Normalization {
    double shift = 0.0;
    double value_offset = 0.0;
    double value_scale = 1.0;
};

struct CriticalPoints {
    double u_minus;
    double u_zero;
    double u_plus;
};

/// Double-well polynomial potential in the normalized gauge.
class LocalPotential {
public:
    /// Normalizes `raw` (ascending coefficients) and validates the double-well structure.
    /// Throws InvalidPotential when the polynomial is not of even degree >= 4 with positive
    /// leading coefficient, or when it does not have exactly one maximum between two minima.
    static LocalPotential from_coefficients(std::vector<double> raw) {
        Polynomial p(std::move(raw));
        const int deg = p.degree();
        if (deg < 4 || deg % 2 != 0)
            fail(ErrorCode::InvalidPotential, "potential must be a polynomial of even degree >= 4");
        if (!(p.leading() > 0.0)) fail(ErrorCode::InvalidPotential, "leading coefficient must be positive");

        const auto crit = distinct_critical_points(p);
        const Polynomial p2 = p.derivative(2);
        if (crit.size() != 3)
            fail(ErrorCode::InvalidPotential,
                 "expected exactly three critical points, found " + std::to_string(crit.size()));
        if (!(p2(crit[0]) > 0.0 && p2(crit[1]) < 0.0 && p2(crit[2]) > 0.0))
            fail(ErrorCode::InvalidPotential, "critical points must be minimum, maximum, minimum");

        Normalization norm;
        norm.shift = crit[1];
        norm.value_offset = p(crit[1]);
        norm.value_scale = 1.0 / std::abs(p2(crit[1]));

        Polynomial q = p.compose_affine(norm.shift, 1.0) * norm.value_scale;
        std::vector<double> c(q.coefficients().begin(), q.coefficients().end());
        c[0] = 0.0;
        c[1] = 0.0;
        c[2] = -0.5;
        return LocalPotential(Polynomial(std::move(c)), norm);
    }

    /// U(u) = u^4/4 - u^2/2.
    static LocalPotential quartic() { return from_coefficients({0.0, 0.0, -0.5, 0.0, 0.25}); }

    /// Derivative of the given order (0..5 supported by the contract; higher orders also work).
    [[nodiscard]] double eval(int order, double u) const {
        if (order < 0) fail(ErrorCode::DomainError, "negative derivative order");
        if (order < static_cast<int>(derivs_.size())) return derivs_[static_cast<std::size_t>(order)](u);
        return poly_.derivative(order)(u);
    }
    [[nodiscard]] double U(double u) const { return derivs_[0](u); }
    [[nodiscard]] double dU(double u) const { return derivs_[1](u); }
    [[nodiscard]] double d2U(double u) const { return derivs_[2](u); }

    [[nodiscard]] const Polynomial& polynomial() const noexcept { return poly_; }
    [[nodiscard]] const Polynomial& derivative(int order) const { return derivs_.at(static_cast<std::size_t>(order)); }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return poly_.coefficients(); }
    [[nodiscard]] const Normalization& normalization() const noexcept { return norm_; }

    [[nodiscard]] double u_minus() const noexcept { return u_minus_; }
    [[nodiscard]] double u_plus() const noexcept { return u_plus_; }
    [[nodiscard]] int p0() const noexcept { return poly_.degree() / 2; }
    [[nodiscard]] CriticalPoints critical_points() const noexcept { return {u_minus_, 0.0, u_plus_}; }

    /// Upper end of the energy range of bounded orbits, -(U(u-) v U(u+)).
    [[nodiscard]] double E0() const { return -std::max(U(u_minus_), U(u_plus_)); }

    /// W(u) = -2 U(u) / u^2, exact because U has a double zero at the origin; W(0) = 1.
    [[nodiscard]] const Polynomial& well_ratio() const noexcept { return well_ratio_; }

    /// U'(u)^2 - 2 U(u) U''(u), with exactly computed coefficients.
    [[nodiscard]] const Polynomial& period_bracket() const noexcept { return bracket_; }

    /// Scale used for residual tolerances of root-finding.
    [[nodiscard]] double scale() const noexcept {
        double s = 0.0;
        for (double c : poly_.coefficients()) s = std::max(s, std::abs(c));
        return std::max(1.0, s);
    }

private:
    LocalPotential(Polynomial p, Normalization n) : poly_(std::move(p)), norm_(n) {
        for (int k = 0; k <= 6; ++k) derivs_.push_back(poly_.derivative(k));
        well_ratio_ = poly_.shift_down(2) * -2.0;
        bracket_ = derivs_[1] * derivs_[1] - (poly_ * derivs_[2]) * 2.0;

        const auto crit = distinct_critical_points(poly_);
        if (crit.size() != 3) fail(ErrorCode::InvalidPotential, "normalization lost a critical point");
        u_minus_ = crit[0];
        u_plus_ = crit[2];
        if (!(derivs_[2](u_minus_) > 0.0 && derivs_[2](u_plus_) > 0.0))
            fail(ErrorCode::InvalidPotential, "minima must have positive curvature");
    }

    static std::vector<double> distinct_critical_points(const Polynomial& p) {
        auto roots = p.derivative().real_roots();
        std::vector<double> out;
        for (double r : roots) {
            if (!out.empty() && std::abs(r - out.back()) <= 1e-9 * std::max(1.0, std::abs(r)))
                fail(ErrorCode::InvalidPotential, "degenerate critical point");
            out.push_back(r);
        }
        return out;
    }

    Polynomial poly_;
    Normalization norm_;
    std::vector<Polynomial> derivs_;
    Polynomial well_ratio_;
    Polynomial bracket_;
    double u_minus_ = 0.0;
    double u_plus_ = 0.0;
};

/// Normal-form quartic coefficient of the first bifurcating mode.
/// `L` enters only through the rational factor, which has a pole at the second bifurcation.
[[nodiscard]] inline double c4_neumann(const LocalPotential& pot, double L) {
    constexpr double pi = std::numbers::pi;
    const double u3 = pot.eval(3, 0.0);
    const double u4 = pot.eval(4, 0.0);
    return (u4 + (8.0 * pi * pi - 3.0 * L * L) / (4.0 * pi * pi - L * L) * u3 * u3) / (4.0 * L);
}

[[nodiscard]] inline double c4_periodic(const LocalPotential& pot, double L) {
    constexpr double pi = std::numbers::pi;
    const double u3 = pot.eval(3, 0.0);
    const double u4 = pot.eval(4, 0.0);
    return (u4 + (32.0 * pi * pi - 3.0 * L * L) / (16.0 * pi * pi - L * L) * u3 * u3) / (4.0 * L);
}

struct AssumptionReport {
    bool polynomial_conditions = false;  // even degree, positive leading coefficient
    bool period_bracket_positive = false;  // U'^2 - 2 U U'' > 0 on the sample grid
    bool period_increasing_near_zero = false;  // U''''(0) > -(5/3) U'''(0)^2
    double c4_at_bifurcation = 0.0;
    bool supercritical = false;
    std::vector<std::string> warnings;
};

/// Samples the sufficient monotonicity condition on a 10^4-point grid over (u-, u+) \ {0}
/// and evaluates the exact local conditions at the origin. Failures are reported, not thrown.
[[nodiscard]] inline AssumptionReport check_assumptions(const LocalPotential& pot, int grid = 10000) {
    AssumptionReport r;
    r.polynomial_conditions = pot.polynomial().degree() >= 4 && pot.polynomial().degree() % 2 == 0 &&
                              pot.polynomial().leading() > 0.0;
    const Polynomial& bracket = pot.period_bracket();
    r.period_bracket_positive = true;
    const double a = pot.u_minus();
    const double b = pot.u_plus();
    for (int i = 1; i < grid; ++i) {
        const double u = a + (b - a) * static_cast<double>(i) / grid;
        if (u == 0.0) continue;
        if (!(bracket(u) > 0.0)) {
            r.period_bracket_positive = false;
            r.warnings.push_back("U'^2 - 2UU'' <= 0 at u = " + std::to_string(u) +
                                 "; monotonicity of the period is not guaranteed by the sufficient condition");
            break;
        }
    }
    const double u3 = pot.eval(3, 0.0);
    const double u4 = pot.eval(4, 0.0);
    r.period_increasing_near_zero = u4 > -(5.0 / 3.0) * u3 * u3;
    if (!r.period_increasing_near_zero) r.warnings.push_back("period function decreases near E = 0");
    r.c4_at_bifurcation = (u4 + (5.0 / 3.0) * u3 * u3) / (4.0 * std::numbers::pi);
    r.supercritical = r.c4_at_bifurcation > 0.0;
    if (!r.supercritical) r.warnings.push_back("pitchfork bifurcation is subcritical");
    return r;
}

}  // namespace kspde

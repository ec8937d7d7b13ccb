#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "kramers_spde/energy.hpp"
#include "kramers_spde/kramers.hpp"
#include "kramers_spde/stationary.hpp"

using namespace kspde;

namespace {

// T(E) = 2 int_{u2}^{u3} du / sqrt(2 (E + U(u))) with u = u2 + (u3 - u2) sin^2(t). Writing
// E + U(u) = (u - u2)(u3 - u) Q(u) by synthetic division leaves the smooth integrand 2 / sqrt(2 Q(u)).
double direct_period(const LocalPotential& pot, double E, double u2, double u3) {
    std::vector<double> c(pot.coefficients().begin(), pot.coefficients().end());
    c[0] += E;
    auto divide = [](std::vector<double> a, double root) {
        std::vector<double> q(a.size() - 1);
        double carry = 0.0;
        for (std::size_t i = a.size() - 1; i >= 1; --i) {
            carry = a[i] + carry * root;
            q[i - 1] = carry;
        }
        return q;
    };
    const auto q = divide(divide(c, u2), u3);
    auto Q = [&](double u) {
        double v = 0.0;
        for (std::size_t i = q.size(); i-- > 0;) v = v * u + q[i];
        return -v;
    };
    auto f = [&](double t) {
        const double s = std::sin(t);
        return 2.0 / std::sqrt(2.0 * Q(u2 + (u3 - u2) * s * s));
    };
    return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi / 2, 20, 1e-13);
}

double bisect_turning(const LocalPotential& pot, double E, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        ((pot.U(m) + E > 0.0) == (pot.U(lo) + E > 0.0) ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(TurningPoints, QuarticClosedForm) {
    const auto pot = LocalPotential::quartic();
    const auto tp = turning_points(pot, 3.0 / 16.0);
    EXPECT_NEAR(tp.u2, -std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(tp.u3, std::sqrt(0.5), 1e-12);
    for (double E : {1e-3, 0.05, 0.2, 0.2499}) {
        const auto t = turning_points(pot, E);
        const double r = std::sqrt(1.0 - std::sqrt(1.0 - 4.0 * E));
        EXPECT_NEAR(t.u3, r, 1e-11);
        EXPECT_LE(std::abs(pot.U(t.u2) + E), 1e-12 * pot.scale());
    }
}

TEST(TurningPoints, VanishAtZeroEnergyAndReject) {
    const auto pot = LocalPotential::quartic();
    const auto t = turning_points(pot, 1e-14);
    EXPECT_LT(std::abs(t.u2), 1e-6);
    EXPECT_LT(std::abs(t.u3), 1e-6);
    for (double E : {pot.E0(), 0.0, -0.1, 1.0}) {
        try {
            (void)turning_points(pot, E);
            FAIL() << E;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::EnergyOutOfRange);
        }
    }
}

TEST(TurningPoints, AsymmetricMatchesBisection) {
    const auto pot = LocalPotential::from_coefficients({0.0, 0.0, -0.5, 0.15, 0.25});
    const double E = 0.5 * pot.E0();
    const auto t = turning_points(pot, E);
    EXPECT_NEAR(t.u2, bisect_turning(pot, E, pot.u_minus(), 0.0), 1e-12);
    EXPECT_NEAR(t.u3, bisect_turning(pot, E, 0.0, pot.u_plus()), 1e-12);
}

TEST(PeriodT, Examples) {
    const auto pot = LocalPotential::quartic();
    EXPECT_NEAR(period_T(pot, 1e-6), 2 * std::numbers::pi, 1e-3);
    EXPECT_GT(period_T(pot, 0.2499), 10.0);
    const auto tp = turning_points(pot, 0.1);
    EXPECT_NEAR(period_T(pot, 0.1) / direct_period(pot, 0.1, tp.u2, tp.u3), 1.0, 1e-6);
}

TEST(PeriodT, AsymmetricAgainstDirectOracle) {
    const auto pot = LocalPotential::from_coefficients({0.0, 0.0, -0.5, 0.15, 0.25, 0.0, 0.02});
    for (double f : {0.01, 0.3, 0.8}) {
        const double E = f * pot.E0();
        const auto tp = turning_points(pot, E);
        EXPECT_NEAR(period_T(pot, E) / direct_period(pot, E, tp.u2, tp.u3), 1.0, 1e-6);
    }
}

TEST(DTdE, PositiveAndMatchesFiniteDifferences) {
    const auto pot = LocalPotential::quartic();
    EXPECT_GT(dT_dE(pot, 0.1), 0.0);
    const double E0 = pot.E0();
    for (int i = 0; i < 20; ++i) {
        const double t = i / 19.0;
        const double E = E0 * std::pow(10.0, -6.0 * (1.0 - t) + std::log10(0.999) * t);
        const double d = dT_dE(pot, E);
        EXPECT_GT(d, 0.0) << E;
        if (E > 1e-4 && E < 0.99 * E0) {
            const double h = 1e-4 * E;
            const double fd = (period_T(pot, E + h) - period_T(pot, E - h)) / (2 * h);
            EXPECT_NEAR(fd / d, 1.0, 1e-4) << E;
        }
    }
}

TEST(DTdE, SmallEnergySlopeSign) {
    const auto pot = LocalPotential::quartic();
    const double E = 1e-4;
    EXPECT_GT((period_T(pot, E) - 2 * std::numbers::pi) / E, 0.0);
    EXPECT_GT(dT_dE(pot, E), 0.0);
}

TEST(Instanton, NeumannL4) {
    const auto pot = LocalPotential::quartic();
    const auto prof = instanton(pot, 4.0, BoundaryCondition::Neumann);
    EXPECT_LE(prof.ode_residual(), 1e-6);
    EXPECT_EQ(prof.sign_changes(), 1);
    EXPECT_NEAR(period_T(pot, prof.E), 8.0, 1e-8);
    EXPECT_NEAR(prof.samples.front(), prof.turning.u2, 1e-12);
    EXPECT_NEAR(prof.samples.back(), prof.turning.u3, 1e-7);
    EXPECT_LE(prof.first_integral_variation(), 1e-8 * prof.E);
    EXPECT_NEAR(prof.slopes.front(), 0.0, 1e-12);
    EXPECT_NEAR(prof.slopes.back(), 0.0, 1e-6);
}

TEST(Instanton, ShootingOracle) {
    // shoot from (u2(E), 0) with a separate RK4 integration and check u'(L) = 0 at E*
    const auto pot = LocalPotential::quartic();
    const double L = 4.0;
    const auto prof = instanton(pot, L, BoundaryCondition::Neumann);
    auto end_slope = [&](double E) {
        double u = turning_points(pot, E).u2, v = 0.0;
        const int n = 20000;
        const double h = L / n;
        for (int i = 0; i < n; ++i) {
            const double k1u = v, k1v = pot.dU(u);
            const double k2u = v + 0.5 * h * k1v, k2v = pot.dU(u + 0.5 * h * k1u);
            const double k3u = v + 0.5 * h * k2v, k3v = pot.dU(u + 0.5 * h * k2u);
            const double k4u = v + h * k3v, k4v = pot.dU(u + h * k3u);
            u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
            v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        }
        return v;
    };
    EXPECT_LT(std::abs(end_slope(prof.E)), 1e-7);
    EXPECT_LT(end_slope(prof.E * 0.99) * end_slope(prof.E * 1.01), 0.0);
}

TEST(Instanton, BelowThresholdThrows) {
    const auto pot = LocalPotential::quartic();
    try {
        (void)instanton(pot, 3.0, BoundaryCondition::Neumann);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoInstanton);
    }
    EXPECT_THROW((void)instanton(pot, 6.0, BoundaryCondition::Periodic), Error);
}

TEST(Instanton, SmallAmplitudeNearBifurcation) {
    // the critical points of (lambda_1/2) z^2 + (C4/4) z^4 sit at |z| = sqrt(|lambda_1|/C4);
    // the sup-amplitude is |z| sqrt(2/L) through the cosine basis
    const auto pot = LocalPotential::quartic();
    const double L = std::numbers::pi + 0.05;
    const auto prof = instanton(pot, L, BoundaryCondition::Neumann);
    const double lam1 = laplace_eigenvalue(BoundaryCondition::Neumann, L, 1) - 1.0;
    const double C4 = c4(pot, L, BoundaryCondition::Neumann);
    const double z_crit = std::sqrt(std::abs(lam1) / C4);
    EXPECT_NEAR(prof.sup_amplitude() / (z_crit * std::sqrt(2.0 / L)), 1.0, 0.2);
    // the expression sqrt(2 |lambda_1| / C4) is larger by sqrt(2)
    EXPECT_NEAR(prof.sup_amplitude() / (std::sqrt(2.0 * std::abs(lam1) / C4) * std::sqrt(2.0 / L)), 1.0 / std::sqrt(2.0), 0.02);
}

TEST(Instanton, ReflectionHasSameEnergy) {
    const auto pot = LocalPotential::from_coefficients({0.0, 0.0, -0.5, 0.1, 0.25});
    const auto prof = instanton(pot, 4.5, BoundaryCondition::Neumann);
    const auto refl = prof.reflected();
    const int d = 64;
    EXPECT_NEAR(energy_V(prof.to_state(d), pot).value, energy_V(refl.to_state(d), pot).value, 1e-10);
    EXPECT_NEAR(refl.samples.front(), prof.samples.back(), 0.0);
}

TEST(Instanton, PeriodicProfile) {
    const auto pot = LocalPotential::quartic();
    const auto prof = instanton(pot, 7.0, BoundaryCondition::Periodic);
    EXPECT_LE(prof.ode_residual(), 1e-6);
    EXPECT_EQ(prof.sign_changes(), 2);
    EXPECT_NEAR(prof.samples.front(), prof.samples.back(), 1e-8);
    EXPECT_NEAR(*std::min_element(prof.samples.begin(), prof.samples.end()), prof.samples.front(), 1e-12);
    EXPECT_GT(prof.deriv_L2, 0.0);
    EXPECT_NEAR(period_T(pot, prof.E), 7.0, 1e-8);
}

TEST(Instanton, EnergyMatchesGalerkinEnergy) {
    const auto pot = LocalPotential::quartic();
    const auto prof = instanton(pot, 4.0, BoundaryCondition::Neumann);
    EXPECT_NEAR(prof.V_value, energy_V(prof.to_state(200), pot).value, 1e-6);
}

TEST(BarrierHeight, Examples) {
    const auto pot = LocalPotential::quartic();
    const auto b1 = barrier_height(pot, 1.0, BoundaryCondition::Neumann);
    EXPECT_DOUBLE_EQ(b1.H0, 0.25);
    EXPECT_EQ(b1.transition_state, TransitionStateKind::Constant);

    const auto b4 = barrier_height(pot, 4.0, BoundaryCondition::Neumann);
    EXPECT_EQ(b4.transition_state, TransitionStateKind::Instanton);
    EXPECT_LT(b4.H0, 1.0);
    EXPECT_GT(b4.H0, 0.5);

    const double Lc = std::numbers::pi;
    const auto at = barrier_height(pot, Lc, BoundaryCondition::Neumann);
    const auto above = barrier_height(pot, Lc + 1e-4, BoundaryCondition::Neumann);
    EXPECT_NEAR(at.H0, Lc / 4.0, 1e-12);
    EXPECT_NEAR(above.H0, at.H0, 1e-4);
}

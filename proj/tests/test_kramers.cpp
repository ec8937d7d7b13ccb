#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "kramers_spde/kramers.hpp"

using namespace kspde;

namespace {

const BoundaryCondition N = BoundaryCondition::Neumann;
const BoundaryCondition P = BoundaryCondition::Periodic;

double extrapolate_right(const LocalPotential& pot, BoundaryCondition bc, double L0, double eps, double h) {
    const double f1 = predict_time(pot, L0 + h, bc, eps).prefactor;
    const double f2 = predict_time(pot, L0 + 2 * h, bc, eps).prefactor;
    const double f3 = predict_time(pot, L0 + 3 * h, bc, eps).prefactor;
    return 3 * f1 - 3 * f2 + f3;
}

}  // namespace

TEST(C4, Examples) {
    const auto pot = LocalPotential::quartic();
    EXPECT_NEAR(c4(pot, std::numbers::pi, N), 3.0 / (2.0 * std::numbers::pi), 1e-14);
    for (double L : {1.0, 3.0, 6.5}) {
        EXPECT_NEAR(c4(pot, L, N), 1.5 / L, 1e-14);
        EXPECT_NEAR(c4(pot, L, P), c4(pot, L, N), 1e-14);
    }
}

TEST(C4, AgreesWithNormalFormExpression) {
    const auto pot = LocalPotential::from_coefficients({0.0, 0.0, -0.5, 0.12, 0.25});
    for (auto bc : {N, P}) {
        const double L = bifurcation_length(bc);
        EXPECT_NEAR(c4(pot, L, bc), c4_normal_form(pot, L, bc), 1e-12) << to_string(bc);
    }
}

TEST(SaddleLength, ConstantProfileIsZero) {
    const auto pot = LocalPotential::quartic();
    EXPECT_NEAR(saddle_length(InstantonProfile::constant(pot, P, 3.0, 0.0)), 0.0, 1e-12);
}

TEST(SaddleLength, ResolutionIndependent) {
    const auto pot = LocalPotential::quartic();
    const auto prof = instanton(pot, 8.0, P);
    const auto a = saddle_length(prof);
    auto fine = prof;
    fine.samples = prof.sample(2 * prof.intervals());
    EXPECT_NEAR(saddle_length(fine) / a, 1.0, 1e-6);
    // direct trapezoid quadrature of the stored slopes
    double acc = 0.0;
    for (int j = 0; j < prof.intervals(); ++j) acc += prof.slopes[j] * prof.slopes[j];
    EXPECT_NEAR(a / (prof.L * std::sqrt(acc * prof.spacing())), 1.0, 1e-6);
}

TEST(SaddleLength, NearBifurcationRelation) {
    // with amplitude |z_1| = sqrt(|lambda_1| / C4) and mu_1 = 2 |lambda_1|, l = 2 pi sqrt(mu_1 / (2 C4))
    const auto pot = LocalPotential::quartic();
    for (double delta : {0.02, 0.04}) {
        const double L = 2 * std::numbers::pi + delta;
        const auto prof = instanton(pot, L, P);
        const auto spec = eigs_profile(prof, 3, 2048);
        const double ell = saddle_length(prof);
        const double ref = 2 * std::numbers::pi * std::sqrt(spec.mu(1) / (2 * c4(pot, L, P)));
        EXPECT_NEAR(ell / ref, 1.0, 0.02 * delta / 0.02) << delta;
    }
}

TEST(SaddleLength, RequiresPeriodicProfile) {
    const auto prof = instanton(LocalPotential::quartic(), 4.0, N);
    try {
        (void)saddle_length(prof);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WrongBoundaryCondition);
    }
}

TEST(Predict, ReferenceExample) {
    const auto pot = LocalPotential::quartic();
    const auto p = predict_time(pot, 1.0, N, 0.05);
    EXPECT_EQ(p.regime, Regime::NeumannSmallL);
    EXPECT_DOUBLE_EQ(p.H0, 0.25);
    EXPECT_NEAR(p.prefactor, closed_form_product(pot, 1.0, N), 1e-9);
    EXPECT_NEAR(p.expected_time, 517.09, 0.01);
    EXPECT_NEAR(p.log10_expected_time, std::log10(p.expected_time), 1e-12);
    EXPECT_FALSE(p.d_used.has_value());
    EXPECT_FALSE(p.mu1.has_value());
}

TEST(Predict, SmallLPeriodicMatchesClosedForm) {
    const auto pot = LocalPotential::quartic();
    for (double L : {0.5, 2.0, 5.0}) {
        const auto p = predict_time(pot, L, P, 0.05);
        EXPECT_EQ(p.regime, Regime::PeriodicSmallL);
        EXPECT_NEAR(p.prefactor / closed_form_product(pot, L, P), 1.0, 1e-9) << L;
    }
}

TEST(Predict, ContinuousAcrossBifurcation) {
    const auto pot = LocalPotential::quartic();
    for (auto bc : {N, P}) {
        const double Lc = bifurcation_length(bc);
        for (double eps : {0.01, 0.05}) {
            const double at = predict_time(pot, Lc, bc, eps).prefactor;
            const double right = extrapolate_right(pot, bc, Lc, eps, 5e-4);
            EXPECT_LE(std::abs(right / at - 1.0), 1e-6) << to_string(bc) << " eps " << eps;
            const double left = predict_time(pot, Lc - 1e-6, bc, eps).prefactor;
            EXPECT_LE(std::abs(left / at - 1.0), 1e-4);
        }
    }
}

TEST(Predict, NearRegimesApproachFarRegimesAwayFromBifurcation) {
    // inside the switching window both formulas apply; with alpha = mu / sqrt(C4 eps) the leading Bessel
    // corrections give a relative difference of 3/(2 alpha^2) below and 6/alpha^2 above the bifurcation
    const auto pot = LocalPotential::quartic();
    const double eps = 1e-4;
    const double below = std::numbers::pi / std::sqrt(1.09);
    const auto fb = predict_with_regime(pot, below, N, eps, std::nullopt, Regime::NeumannSmallL);
    const auto nb = predict_with_regime(pot, below, N, eps, std::nullopt, Regime::NeumannNearBelow);
    const double ab = nb.lambda1 / std::sqrt(nb.C4 * eps);
    EXPECT_NEAR(nb.prefactor / fb.prefactor, 1.0, 3.0 / (ab * ab));
    const double above = std::numbers::pi / std::sqrt(0.91);
    const auto fa = predict_with_regime(pot, above, N, eps, std::nullopt, Regime::NeumannLargeL);
    const auto na = predict_with_regime(pot, above, N, eps, std::nullopt, Regime::NeumannNearAbove);
    const double aa = *na.mu1 / std::sqrt(na.C4 * eps);
    EXPECT_NEAR(na.prefactor / fa.prefactor, 1.0, 10.0 / (aa * aa));
    EXPECT_NEAR(na.prefactor / fa.prefactor, 1.0 - 6.0 / (aa * aa), 50.0 / (aa * aa * aa));
}

TEST(Predict, PeriodicLargeLHasSqrtEpsPrefactor) {
    const auto pot = LocalPotential::quartic();
    const double L = 2 * std::numbers::pi + 0.5;
    const auto a = predict_time(pot, L, P, 0.04);
    const auto b = predict_time(pot, L, P, 0.01);
    EXPECT_EQ(a.regime, Regime::PeriodicLargeL);
    EXPECT_NEAR(a.prefactor / b.prefactor, 2.0, 1e-12);
    EXPECT_NEAR(a.H0, b.H0, 0.0);
    ASSERT_TRUE(a.mu1.has_value());
    EXPECT_GT(*a.mu1, 0.0);
}

TEST(Predict, FiniteCutoffConvergesMonotonically) {
    const auto pot = LocalPotential::quartic();
    for (auto [bc, L] : {std::pair{N, 1.0}, std::pair{N, 4.0}, std::pair{P, 2.0}, std::pair{P, 8.0}}) {
        const double inf = predict_time(pot, L, bc, 0.05).prefactor;
        double prev = std::numeric_limits<double>::infinity();
        for (int d : {8, 16, 32, 64, 128}) {
            const auto p = predict_time(pot, L, bc, 0.05, d);
            ASSERT_TRUE(p.d_used.has_value());
            const double gap = std::abs(p.prefactor / inf - 1.0);
            EXPECT_LT(gap, prev) << to_string(bc) << " L " << L << " d " << d;
            prev = gap;
        }
        // tail of sum_k log(1 + (U''(u_-) - q)/(a k^2)) beyond d, with q >= -1
        const double a = std::pow((bc == N ? 1.0 : 2.0) * std::numbers::pi / L, 2);
        EXPECT_LT(prev, 3.0 / (a * 128));
    }
}

TEST(Predict, InstantonTailIndependentOfExactLabels) {
    const auto pot = LocalPotential::quartic();
    for (auto [bc, L] : {std::pair{N, 1.5 * std::numbers::pi}, std::pair{P, 3 * std::numbers::pi}}) {
        KramersOptions fine;
        fine.eigen_grid = 4096;
        fine.eigen_kmax = 24;
        const double ref = predict_time(pot, L, bc, 0.05, std::nullopt, 0.1, fine).prefactor;
        for (int kmax : {8, 16}) {
            KramersOptions o;
            o.eigen_kmax = kmax;
            EXPECT_NEAR(predict_time(pot, L, bc, 0.05, std::nullopt, 0.1, o).prefactor / ref, 1.0, 4e-6)
                << to_string(bc) << " kmax " << kmax;
        }
        // without the fitted k^-4 term the error at kmax = 8 is near 2e-4
    }
}

TEST(Predict, RegimeSelection) {
    EXPECT_EQ(select_regime(N, 1.0, 0.1), Regime::NeumannSmallL);
    EXPECT_EQ(select_regime(N, std::numbers::pi, 0.1), Regime::NeumannNearBelow);
    EXPECT_EQ(select_regime(N, std::numbers::pi + 0.05, 0.1), Regime::NeumannNearAbove);
    EXPECT_EQ(select_regime(N, 5.0, 0.1), Regime::NeumannLargeL);
    EXPECT_EQ(select_regime(P, 6.0, 0.1), Regime::PeriodicNearBelow);
    EXPECT_EQ(select_regime(P, 8.0, 0.1), Regime::PeriodicLargeL);
    EXPECT_EQ(select_regime(N, 3.0, 0.0), Regime::NeumannSmallL);
}

TEST(Predict, Errors) {
    const auto pot = LocalPotential::quartic();
    auto code = [&](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::DomainError;
    };
    EXPECT_EQ(code([&] { (void)predict_time(pot, 2 * std::numbers::pi + 0.1, N, 0.05); }), ErrorCode::UnsupportedRegime);
    EXPECT_EQ(code([&] { (void)predict_time(pot, 13.0, P, 0.05); }), ErrorCode::UnsupportedRegime);
    EXPECT_THROW((void)predict_time(pot, 1.0, N, 0.0), Error);
    EXPECT_THROW((void)predict_time(pot, 1.0, N, 0.05, 0), Error);
    EXPECT_EQ(code([&] { (void)predict_with_regime(pot, 1.0, N, 0.05, std::nullopt, Regime::PeriodicSmallL); }),
              ErrorCode::WrongBoundaryCondition);
    EXPECT_EQ(code([&] { (void)predict_with_regime(pot, 4.0, N, 0.05, std::nullopt, Regime::NeumannSmallL); }),
              ErrorCode::OutOfRegime);
}

TEST(Predict, OverflowKeepsLogTime) {
    const auto p = predict_time(LocalPotential::quartic(), 1.0, N, 1e-4);
    EXPECT_TRUE(std::isinf(p.expected_time));
    EXPECT_NEAR(p.log10_expected_time, (std::log(p.prefactor) + 0.25 / 1e-4) / std::numbers::ln10, 1e-9);
}

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kramers_spde/oracle_1d.hpp"
#include "kramers_spde/simulate.hpp"

using namespace kspde;

namespace {

SimConfig fast_config() {
    SimConfig c;
    c.L = 1.0;
    c.d = 3;
    c.eps = 0.3;
    c.dt = 5e-3;
    c.t_max = 1e4;
    c.threads = 1;
    return c;
}

}  // namespace

TEST(Step, ZeroNoiseKeepsStationaryPoints) {
    SimConfig cfg;
    cfg.eps = 0.0;
    std::vector<double> xi(64, 1.0);
    for (double v : {-1.0, 0.0, 1.0}) {
        const auto s0 = FourierState::constant(cfg.bc, cfg.L, cfg.d, v);
        auto s = s0;
        for (int i = 0; i < 100; ++i) s = step(s, cfg, xi);
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) EXPECT_NEAR(s.coeffs[i], s0.coeffs[i], 1e-12);
    }
}

TEST(Step, LinearRecursionPerMode) {
    const double L = 1.0, eps = 0.1, dt = 0.01;
    const std::vector<double> y0{0.3, -0.2, 0.5, 0.1};
    const std::vector<double> xi{0.7, -1.1, 0.4, 2.0};
    for (auto scheme : {Scheme::Exponential, Scheme::SemiImplicit}) {
        GalerkinStepper<ZeroForce> st(BoundaryCondition::Neumann, L, 3, eps, dt, scheme, ZeroForce{});
        auto y = y0;
        st.step(y, xi);
        for (int k = 0; k <= 3; ++k) {
            const double nu = std::pow(k * std::numbers::pi / L, 2);
            double expect;
            if (scheme == Scheme::SemiImplicit) {
                expect = (y0[k] + std::sqrt(2 * eps * dt) * xi[k]) / (1 + nu * dt);
            } else if (k == 0) {
                expect = y0[0] + std::sqrt(2 * eps * dt) * xi[0];
            } else {
                expect = std::exp(-nu * dt) * y0[k] + std::sqrt(eps * (1 - std::exp(-2 * nu * dt)) / nu) * xi[k];
            }
            EXPECT_NEAR(y[k], expect, 1e-14) << to_string(scheme) << " k " << k;
        }
    }
}

TEST(Step, RejectsShortNoiseVector) {
    SimConfig cfg;
    const auto s = FourierState::constant(cfg.bc, cfg.L, cfg.d, -1.0);
    std::vector<double> xi(3, 0.0);
    EXPECT_THROW((void)step(s, cfg, xi), Error);
}

TEST(Step, OrnsteinUhlenbeckStationaryVariance) {
    const double L = 1.0, eps = 0.05, dt = 0.2;
    GalerkinStepper<ZeroForce> st(BoundaryCondition::Periodic, L, 2, eps, dt, Scheme::Exponential, ZeroForce{});
    std::vector<double> y(st.size(), 0.0), xi(st.size());
    NormalStream rng(3);
    const int n = 200000;
    std::vector<double> acc(st.size(), 0.0);
    for (int i = 0; i < 50; ++i) {
        rng.fill_normal(xi);
        st.step(y, xi);
    }
    for (int i = 0; i < n; ++i) {
        rng.fill_normal(xi);
        st.step(y, xi);
        for (std::size_t j = 1; j < y.size(); ++j) acc[j] += y[j] * y[j];
    }
    for (std::size_t j = 1; j < y.size(); ++j) {
        const int k = static_cast<int>((j + 1) / 2);
        const double var = eps / std::pow(2 * std::numbers::pi * k / L, 2);
        EXPECT_NEAR(acc[j] / n / var, 1.0, 5 * std::sqrt(2.0 / n)) << j;
    }
}

TEST(Step, SchemesAgreeToFirstOrder) {
    // deterministic flow from a smooth initial state; the two schemes differ by O(dt)
    SimConfig cfg;
    cfg.L = std::numbers::pi;
    cfg.d = 3;
    cfg.eps = 0.0;
    auto s0 = FourierState::zero(cfg.bc, cfg.L, cfg.d);
    s0.coeffs = {-0.8, 0.4, -0.2, 0.1};
    std::vector<double> xi(s0.coeffs.size(), 0.0);
    std::vector<double> diffs, dts;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        auto a = s0.coeffs, b = s0.coeffs;
        auto c1 = cfg, c2 = cfg;
        c1.dt = c2.dt = dt;
        c1.scheme = Scheme::Exponential;
        c2.scheme = Scheme::SemiImplicit;
        auto e = make_stepper(c1, cfg.d);
        auto si = make_stepper(c2, cfg.d);
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) {
            e.step(a, xi);
            si.step(b, xi);
        }
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        diffs.push_back(std::log(m));
        dts.push_back(std::log(dt));
    }
    const double slope = (diffs.back() - diffs.front()) / (dts.back() - dts.front());
    EXPECT_GE(slope, 0.9);
}

TEST(SampleTransition, DeterministicForFixedSeed) {
    const auto cfg = fast_config();
    const auto a = sample_transition(cfg, 17);
    const auto b = sample_transition(cfg, 17);
    EXPECT_EQ(a.tau, b.tau);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_FALSE(a.censored);
    EXPECT_EQ(a.seed_used, 17u);
}

TEST(SampleTransition, HugeTargetBallHitsAtFirstCheck) {
    auto cfg = fast_config();
    cfg.rho = 1e3;
    cfg.allow_overlapping_balls = true;
    const auto s = sample_transition(cfg, 1);
    EXPECT_EQ(s.steps, cfg.check_every);
    EXPECT_DOUBLE_EQ(s.tau, cfg.check_every * cfg.dt);
}

TEST(SampleTransition, CensoredAtTmax) {
    auto cfg = fast_config();
    cfg.eps = 1e-3;
    cfg.t_max = 1.0;
    const auto s = sample_transition(cfg, 1);
    EXPECT_TRUE(s.censored);
    EXPECT_EQ(s.tau, 1.0);
    try {
        (void)mc_stats(cfg, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllCensored);
    }
}

TEST(SimConfig, Validation) {
    auto cfg = fast_config();
    cfg.rho = 1.5;
    cfg.r = 0.6;
    try {
        cfg.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
    cfg.allow_overlapping_balls = true;
    EXPECT_NO_THROW(cfg.validate());
    for (auto mutate : std::vector<void (*)(SimConfig&)>{[](SimConfig& c) { c.eps = -1; }, [](SimConfig& c) { c.dt = 0; },
                                                         [](SimConfig& c) { c.d = -1; },
                                                         [](SimConfig& c) { c.check_every = 0; }}) {
        auto c = fast_config();
        mutate(c);
        EXPECT_THROW(c.validate(), Error);
    }
    EXPECT_THROW((void)mc_stats(fast_config(), 1), Error);
}

TEST(McStats, IdenticalSeedsGiveZeroSpread) {
    auto cfg = fast_config();
    cfg.identical_seeds = true;
    const auto st = mc_stats(cfg, 5);
    EXPECT_EQ(st.stderr_, 0.0);
    EXPECT_EQ(st.min, st.max);
    EXPECT_EQ(st.n_hit, 5);
}

TEST(McStats, ThreadCountDoesNotChangeResults) {
    auto cfg = fast_config();
    std::vector<TransitionSample> a, b;
    (void)mc_stats(cfg, 6, &a);
    cfg.threads = 3;
    (void)mc_stats(cfg, 6, &b);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].tau, b[i].tau);
}

TEST(McStats, DirectionSymmetryForEvenPotential) {
    auto cfg = fast_config();
    cfg.eps = 0.25;
    const auto fwd = mc_stats(cfg, 200);
    cfg.direction = Direction::PlusToMinus;
    cfg.seed = 1000;
    const auto bwd = mc_stats(cfg, 200);
    EXPECT_NEAR(fwd.mean, bwd.mean, 4 * std::hypot(fwd.stderr_, bwd.stderr_));
}

TEST(McStats, ScalarModelMatchesOneDimensionalOracle) {
    auto cfg = fast_config();
    cfg.d = 0;
    cfg.eps = 0.2;
    cfg.dt = 1e-3;
    cfg.check_every = 1;
    const auto st = mc_stats(cfg, 300);
    const double sL = std::sqrt(cfg.L);
    const double ref = oracle_mfpt_1d(reduced_potential_1d(cfg.pot, cfg.L), cfg.eps, -sL, sL * (1 - cfg.rho));
    EXPECT_NEAR(st.mean, ref, 4 * st.stderr_ + 0.03 * ref);
}

TEST(Equilibrium, ScalarModelSamplesGibbsDensity) {
    SimConfig cfg;
    cfg.d = 0;
    cfg.eps = 0.5;
    cfg.dt = 5e-3;
    auto stepper = make_stepper(cfg, 0);
    std::vector<double> y{-1.0}, xi(1);
    NormalStream rng(21);
    std::vector<double> samples;
    const int n_steps = 8000000;
    for (int i = 1; i <= n_steps; ++i) {
        rng.fill_normal(xi);
        stepper.step(y, xi);
        if (i % 20 == 0) samples.push_back(y[0]);
    }
    std::sort(samples.begin(), samples.end());
    // Gibbs CDF of exp(-V(y)/eps), V(y) = L U(y / sqrt L), by trapezoid on a fine grid
    const auto V = reduced_potential_1d(cfg.pot, cfg.L);
    const int m = 40001;
    const double lo = -4.0, hi = 4.0, h = (hi - lo) / (m - 1);
    std::vector<double> cdf(m, 0.0);
    for (int j = 1; j < m; ++j) {
        const double a = std::exp(-V(lo + (j - 1) * h) / cfg.eps), b = std::exp(-V(lo + j * h) / cfg.eps);
        cdf[j] = cdf[j - 1] + 0.5 * h * (a + b);
    }
    for (auto& c : cdf) c /= cdf.back();
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = std::clamp(samples[i], lo, hi);
        const double F = cdf[static_cast<std::size_t>(std::lround((x - lo) / h))];
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / samples.size()),
                       std::abs(F - static_cast<double>(i + 1) / samples.size())});
    }
    EXPECT_LE(ks, 0.02);
}

TEST(GalerkinError, DeterministicSpectralConvergence) {
    SimConfig cfg;
    cfg.eps = 0.0;
    cfg.dt = 1e-3;
    const double L = cfg.L;
    const auto t = galerkin_error(cfg, {2, 4, 8, 16}, 1.0, [L](double x) { return 0.8 / (1.2 + std::cos(std::numbers::pi * x / L)); });
    EXPECT_EQ(t.reference_d, 32);
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_LT(t.slope, -2.0);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].error, t.rows[i - 1].error);
}

TEST(GalerkinError, NoisyErrorDecreases) {
    SimConfig cfg;
    cfg.eps = 0.1;
    cfg.dt = 1e-3;
    const auto t = galerkin_error(cfg, {4, 8, 16}, 1.0);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].error, t.rows[i - 1].error);
    EXPECT_THROW((void)galerkin_error(cfg, {8, 4}, 1.0), Error);
    EXPECT_THROW((void)galerkin_error(cfg, {}, 1.0), Error);
}

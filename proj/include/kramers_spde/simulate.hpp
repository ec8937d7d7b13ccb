#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "kramers_spde/energy.hpp"
#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/quadrature.hpp"
#include "kramers_spde/random.hpp"
#include "kramers_spde/spectral.hpp"

namespace kspde {

enum class Scheme { SemiImplicit, Exponential };
enum class Direction { MinusToPlus, PlusToMinus };

[[nodiscard]] constexpr std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::SemiImplicit ? "semi_implicit" : "exponential";
}

struct SimConfig {
    LocalPotential pot = LocalPotential::quartic();
    BoundaryCondition bc = BoundaryCondition::Neumann;
    double L = 1.0;
    int d = 15;
    double eps = 0.05;
    double dt = 1e-3;
    double t_max = 1e6;
    double r = 0.1;
    double rho = 0.5;
    int check_every = 10;
    int refine = 8;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::Exponential;
    Direction direction = Direction::MinusToPlus;
    bool identical_seeds = false;          // every replica reuses `seed`
    bool allow_overlapping_balls = false;  // admit degenerate configurations where start lies in the target
    int threads = 0;                       // 0 means hardware concurrency

    void validate() const {
        if (!(eps >= 0.0)) fail(ErrorCode::InvalidConfig, "eps must be nonnegative");
        if (!(dt > 0.0)) fail(ErrorCode::InvalidConfig, "dt must be positive");
        if (!(t_max > 0.0)) fail(ErrorCode::InvalidConfig, "t_max must be positive");
        if (!(L > 0.0)) fail(ErrorCode::InvalidConfig, "L must be positive");
        if (d < 0) fail(ErrorCode::InvalidConfig, "d must be nonnegative");
        if (!(r > 0.0) || !(rho > 0.0)) fail(ErrorCode::InvalidConfig, "ball radii must be positive");
        if (check_every < 1) fail(ErrorCode::InvalidConfig, "check_every must be positive");
        if (refine < 4) fail(ErrorCode::InvalidConfig, "refine must be at least 4");
        const double gap = pot.u_plus() - pot.u_minus();
        if (!allow_overlapping_balls && r + rho >= gap)
            fail(ErrorCode::InvalidConfig, "start and target balls overlap in sup-norm");
    }

    [[nodiscard]] double start_value() const { return direction == Direction::MinusToPlus ? pot.u_minus() : pot.u_plus(); }
    [[nodiscard]] double target_value() const { return direction == Direction::MinusToPlus ? pot.u_plus() : pot.u_minus(); }
};

/// Drift -P_d U'(u) through the pseudospectral grid.
class PotentialForce {
public:
    PotentialForce(const LocalPotential& pot, BoundaryCondition bc, double L, int d) : ev_(pot, bc, L, d) {}
    void operator()(std::span<const double> y, std::span<double> out) {
        ev_.nonlinear_projection(y, out);
        for (auto& v : out) v = -v;
    }

private:
    EnergyEvaluator ev_;
};

/// U' == 0: the linear (Ornstein-Uhlenbeck) Galerkin system.
struct ZeroForce {
    void operator()(std::span<const double>, std::span<double> out) const { std::fill(out.begin(), out.end(), 0.0); }
};

/// One-step integrator for dy_k = [-nu_k y_k + N_k(y)] dt + sqrt(2 eps) dW_k.
template <class Force>
class GalerkinStepper {
public:
    GalerkinStepper(BoundaryCondition bc, double L, int d, double eps, double dt, Scheme scheme, Force force)
        : scheme_(scheme), dt_(dt), force_(std::move(force)), n_(FourierState::size_for(bc, d)) {
        const auto probe = FourierState::zero(bc, L, d);
        a_.resize(n_);
        b_.resize(n_);
        s_.resize(n_);
        drift_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double nu = probe.nu(i);
            if (scheme == Scheme::SemiImplicit) {
                a_[i] = 1.0 / (1.0 + nu * dt);
                b_[i] = dt * a_[i];
                s_[i] = std::sqrt(2.0 * eps * dt) * a_[i];
            } else if (nu == 0.0) {
                a_[i] = 1.0;
                b_[i] = dt;
                s_[i] = std::sqrt(2.0 * eps * dt);
            } else {
                a_[i] = std::exp(-nu * dt);
                b_[i] = -std::expm1(-nu * dt) / nu;
                s_[i] = std::sqrt(-eps * std::expm1(-2.0 * nu * dt) / nu);
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    /// Advances y in place; `xi` must hold at least size() standard normals (extra entries ignored).
    void step(std::span<double> y, std::span<const double> xi) {
        force_(y, drift_);
        bool finite = true;
        for (std::size_t i = 0; i < n_; ++i) {
            y[i] = a_[i] * y[i] + b_[i] * drift_[i] + s_[i] * xi[i];
            finite = finite && std::isfinite(y[i]);
        }
        if (!finite) fail(ErrorCode::NonFinite, "state left the representable range; dt may be too large");
    }

private:
    Scheme scheme_;
    double dt_;
    Force force_;
    std::size_t n_;
    std::vector<double> a_, b_, s_, drift_;
};

[[nodiscard]] inline GalerkinStepper<PotentialForce> make_stepper(const SimConfig& cfg, int d) {
    return {cfg.bc, cfg.L, d, cfg.eps, cfg.dt, cfg.scheme, PotentialForce(cfg.pot, cfg.bc, cfg.L, d)};
}

/// Single step of the configured scheme.
[[nodiscard]] inline FourierState step(const FourierState& state, const SimConfig& cfg, std::span<const double> gaussians) {
    if (gaussians.size() < state.coeffs.size()) fail(ErrorCode::InvalidConfig, "need one normal per coordinate");
    auto stepper = make_stepper(cfg, state.d);
    FourierState out = state;
    stepper.step(out.coeffs, gaussians);
    return out;
}

struct TransitionSample {
    double tau = 0.0;
    bool censored = false;
    std::int64_t steps = 0;
    std::uint64_t seed_used = 0;
};

/// Integrates from the start minimum until the sup-distance to the target minimum drops
/// below rho at a check time, or t_max is exceeded.
[[nodiscard]] inline TransitionSample sample_transition(const SimConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    auto stepper = make_stepper(cfg, cfg.d);
    auto y = FourierState::constant(cfg.bc, cfg.L, cfg.d, cfg.start_value());
    const auto target = FourierState::constant(cfg.bc, cfg.L, cfg.d, cfg.target_value());
    SupNorm sup(cfg.bc, cfg.L, cfg.d, cfg.refine);
    NormalStream rng(seed);
    std::vector<double> xi(stepper.size());
    const auto max_steps = static_cast<std::int64_t>(std::ceil(cfg.t_max / cfg.dt));

    TransitionSample s;
    s.seed_used = seed;
    for (std::int64_t n = 1; n <= max_steps; ++n) {
        rng.fill_normal(xi);
        stepper.step(y.coeffs, xi);
        if (n % cfg.check_every == 0 && sup.within(y.coeffs, target.coeffs, cfg.rho)) {
            s.steps = n;
            s.tau = static_cast<double>(n) * cfg.dt;
            return s;
        }
    }
    s.steps = max_steps;
    s.tau = cfg.t_max;
    s.censored = true;
    return s;
}

[[nodiscard]] inline TransitionSample sample_transition(const SimConfig& cfg) { return sample_transition(cfg, cfg.seed); }

struct TransitionStats {
    int n = 0;                 // replicas run
    int n_hit = 0;             // uncensored replicas entering the mean
    double mean = 0.0;         // over uncensored replicas
    double stderr_ = 0.0;      // sample std / sqrt(n_hit)
    double min = 0.0;
    double max = 0.0;
    int censored = 0;
    bool mean_is_lower_bound = false;
    double censored_mean = 0.0;  // mean with censored replicas counted at t_max
    double eps = 0.0;
    int d = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

[[nodiscard]] inline std::uint64_t replica_seed(const SimConfig& cfg, int replica) {
    return cfg.identical_seeds ? cfg.seed : cfg.seed ^ static_cast<std::uint64_t>(replica);
}

[[nodiscard]] inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs `count` independent tasks on a small thread pool; task i writes only its own slot.
template <class F>
void parallel_for(int count, int threads, F&& task) {
    threads = std::max(1, std::min(threads, count));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

[[nodiscard]] inline TransitionStats aggregate(const std::vector<TransitionSample>& samples, const SimConfig& cfg) {
    TransitionStats st;
    st.n = static_cast<int>(samples.size());
    st.eps = cfg.eps;
    st.d = cfg.d;
    st.dt = cfg.dt;
    st.seed = cfg.seed;
    CompensatedSum sum;
    CompensatedSum sum_all;
    st.min = std::numeric_limits<double>::infinity();
    st.max = -st.min;
    for (const auto& s : samples) {
        sum_all.add(s.tau);
        if (s.censored) {
            ++st.censored;
            continue;
        }
        ++st.n_hit;
        sum.add(s.tau);
        st.min = std::min(st.min, s.tau);
        st.max = std::max(st.max, s.tau);
    }
    if (st.n_hit == 0) fail(ErrorCode::AllCensored, "every replica reached t_max without a transition");
    st.mean = sum.value() / st.n_hit;
    CompensatedSum sq;
    for (const auto& s : samples)
        if (!s.censored) sq.add((s.tau - st.mean) * (s.tau - st.mean));
    st.stderr_ = st.n_hit > 1 ? std::sqrt(sq.value() / (st.n_hit - 1) / st.n_hit) : std::numeric_limits<double>::quiet_NaN();
    st.mean_is_lower_bound = st.censored > 0;
    st.censored_mean = sum_all.value() / st.n;
    return st;
}

/// Monte Carlo estimate of the mean transition time over n independent replicas.
[[nodiscard]] inline TransitionStats mc_stats(const SimConfig& cfg, int n_replicas,
                                              std::vector<TransitionSample>* samples_out = nullptr) {
    if (n_replicas < 2) fail(ErrorCode::InvalidConfig, "need at least two replicas");
    cfg.validate();
    std::vector<TransitionSample> samples(static_cast<std::size_t>(n_replicas));
    parallel_for(n_replicas, resolve_threads(cfg.threads),
                 [&](int i) { samples[static_cast<std::size_t>(i)] = sample_transition(cfg, replica_seed(cfg, i)); });
    auto st = aggregate(samples, cfg);
    if (samples_out != nullptr) *samples_out = std::move(samples);
    return st;
}

struct GalerkinErrorRow {
    int d;
    double error;
};

struct GalerkinErrorTable {
    std::vector<GalerkinErrorRow> rows;
    int reference_d = 0;
    double slope = 0.0;  // least-squares slope of log error against log d
};

/// Sup over check times in [0, T] of the sup-distance between each truncated run and a
/// reference run at 2 max(d_list). All runs share one noise stream drawn at the reference
/// dimension; each run uses the leading coordinates.
[[nodiscard]] inline GalerkinErrorTable galerkin_error(const SimConfig& cfg, const std::vector<int>& d_list, double T,
                                                       const std::function<double(double)>& u0 = {}) {
    if (d_list.empty()) fail(ErrorCode::InvalidConfig, "empty d list");
    if (!std::is_sorted(d_list.begin(), d_list.end())) fail(ErrorCode::InvalidConfig, "d list must be ascending");
    const int D = 2 * d_list.back();
    std::function<double(double)> init = u0;
    if (!init) {
        const double v = cfg.start_value();
        init = [v](double) { return v; };
    }
    // project the initial profile at the reference resolution
    const int n_proj = cfg.bc == BoundaryCondition::Neumann ? 8 * D + 1 : 8 * D;
    TransformPlan proj(cfg.bc, cfg.L, D, n_proj);
    std::vector<double> samples(static_cast<std::size_t>(n_proj));
    for (int j = 0; j < n_proj; ++j) samples[static_cast<std::size_t>(j)] = init(proj.x(j));
    const auto ref0 = proj.from_grid(samples);

    auto ref_stepper = make_stepper(cfg, D);
    auto ref = ref0;
    std::vector<GalerkinStepper<PotentialForce>> steppers;
    std::vector<FourierState> runs;
    for (int d : d_list) {
        steppers.push_back(make_stepper(cfg, d));
        runs.push_back(ref0.resized(d));
    }
    SupNorm sup(cfg.bc, cfg.L, D, cfg.refine);
    std::vector<double> errors(d_list.size(), 0.0);
    std::vector<double> padded(ref.coeffs.size());
    auto measure = [&] {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            std::fill(padded.begin(), padded.end(), 0.0);
            std::copy(runs[i].coeffs.begin(), runs[i].coeffs.end(), padded.begin());
            errors[i] = std::max(errors[i], sup.distance(padded, ref.coeffs));
        }
    };
    NormalStream rng(cfg.seed);
    std::vector<double> xi(ref.coeffs.size());
    const auto steps = static_cast<std::int64_t>(std::llround(T / cfg.dt));
    measure();
    for (std::int64_t n = 1; n <= steps; ++n) {
        rng.fill_normal(xi);
        ref_stepper.step(ref.coeffs, xi);
        for (std::size_t i = 0; i < runs.size(); ++i) steppers[i].step(runs[i].coeffs, xi);
        if (n % cfg.check_every == 0 || n == steps) measure();
    }

    GalerkinErrorTable table;
    table.reference_d = D;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < d_list.size(); ++i) {
        table.rows.push_back({d_list[i], errors[i]});
        const double lx = std::log(static_cast<double>(d_list[i]));
        const double ly = std::log(errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(d_list.size());
    table.slope = m > 1 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return table;
}

}  // namespace kspde

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "kramers_spde/potential.hpp"
#include "kramers_spde/spectral.hpp"

namespace kspde {

struct EnergyValue {
    double value = 0.0;
};

/// Evaluates V[u] = 1/2 ||u'||^2 + int_0^L U(u) dx and its coefficient gradient on a fixed
/// quadrature grid. Holds a transform plan, so one evaluator per task.
class EnergyEvaluator {
public:
    EnergyEvaluator(const LocalPotential& pot, BoundaryCondition bc, double L, int d)
        : EnergyEvaluator(pot, bc, L, d, default_grid_size(pot, bc, d)) {}

    EnergyEvaluator(const LocalPotential& pot, BoundaryCondition bc, double L, int d, int n_grid)
        : pot_(&pot), plan_(bc, L, d, n_grid), grid_(static_cast<std::size_t>(n_grid)),
          nu_(FourierState::size_for(bc, d)) {
        const auto probe = FourierState::zero(bc, L, d);
        for (std::size_t i = 0; i < nu_.size(); ++i) nu_[i] = probe.nu(i);
    }

    [[nodiscard]] const TransformPlan& plan() const noexcept { return plan_; }
    [[nodiscard]] std::span<const double> nu() const noexcept { return nu_; }

    [[nodiscard]] double value(std::span<const double> y) {
        double kinetic = 0.0;
        for (std::size_t i = 0; i < nu_.size(); ++i) kinetic += nu_[i] * y[i] * y[i];
        plan_.to_grid(y, grid_);
        double pot = 0.0;
        for (int j = 0; j < plan_.n(); ++j) pot += plan_.weight(j) * pot_->U(grid_[static_cast<std::size_t>(j)]);
        return 0.5 * kinetic + pot;
    }

    /// Projection of U'(u(.)) onto the retained modes, written into `out`.
    void nonlinear_projection(std::span<const double> y, std::span<double> out) {
        plan_.to_grid(y, grid_);
        for (auto& v : grid_) v = pot_->dU(v);
        plan_.from_grid(grid_, out);
    }

    void gradient(std::span<const double> y, std::span<double> out) {
        nonlinear_projection(y, out);
        for (std::size_t i = 0; i < nu_.size(); ++i) out[i] += nu_[i] * y[i];
    }

private:
    const LocalPotential* pot_;
    TransformPlan plan_;
    std::vector<double> grid_;
    std::vector<double> nu_;
};

[[nodiscard]] inline EnergyValue energy_V(const FourierState& state, const LocalPotential& pot) {
    EnergyEvaluator ev(pot, state.bc, state.L, state.d);
    return {ev.value(state.coeffs)};
}

[[nodiscard]] inline std::vector<double> grad_V(const FourierState& state, const LocalPotential& pot) {
    EnergyEvaluator ev(pot, state.bc, state.L, state.d);
    std::vector<double> g(state.coeffs.size());
    ev.gradient(state.coeffs, g);
    return g;
}

/// Constants with V[z] >= beta' ||z||_{H^1}^2 - alpha' where ||z||_{H^1}^2 = sum (1 + nu_k) y_k^2.
struct EnergyLowerBound {
    double alpha_prime;
    double beta_prime;
};

/// Uses U(u) >= beta u^2 - alpha with beta = 1/2; alpha is found from the critical points of
/// U(u) - beta u^2, so the bound is sharp for the chosen beta.
[[nodiscard]] inline EnergyLowerBound energy_lower_bound(const LocalPotential& pot, double L) {
    constexpr double beta = 0.5;
    const Polynomial shifted = pot.polynomial() - Polynomial(std::vector<double>{0.0, 0.0, beta});
    double lowest = 0.0;
    for (double r : shifted.derivative().real_roots()) lowest = std::min(lowest, shifted(r));
    const double alpha = -lowest;
    return {alpha * L, std::min(0.5, beta)};
}

[[nodiscard]] inline double h1_norm_sq(const FourierState& s) {
    double n = 0.0;
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) n += (1.0 + s.nu(i)) * s.coeffs[i] * s.coeffs[i];
    return n;
}

}  // namespace kspde

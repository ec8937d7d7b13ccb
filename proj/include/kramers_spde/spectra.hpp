#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <lapacke.h>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"
#include "kramers_spde/quadrature.hpp"
#include "kramers_spde/spectral.hpp"
#include "kramers_spde/stationary.hpp"

namespace kspde {

enum class ConstantPoint { Origin, Minus, Plus };

/// Eigenvalues of -d^2/dx^2 + U''(u0(x)) in ascending order.
///
/// Label convention: Neumann eigenvalue k sits at index k. Periodic eigenvalues are sorted and
/// labelled 0, -1, +1, -2, +2, ... so that the lower member of each asymptotically degenerate
/// pair carries the negative label.
struct SpectrumReport {
    BoundaryCondition bc = BoundaryCondition::Neumann;
    double L = 0.0;
    std::string profile;
    std::vector<double> eigenvalues;
    int negative_count = 0;
    int zero_modes = 0;
    int grid_n = 0;  // 0 for closed-form spectra
    int richardson_order = 0;

    [[nodiscard]] static std::size_t index_of(BoundaryCondition bc, int label) {
        if (bc == BoundaryCondition::Neumann) return static_cast<std::size_t>(label);
        if (label == 0) return 0;
        return label < 0 ? static_cast<std::size_t>(-2 * label - 1) : static_cast<std::size_t>(2 * label);
    }

    /// Largest cutoff d such that all labels |k| <= d are present.
    [[nodiscard]] int max_cutoff() const noexcept {
        const int n = static_cast<int>(eigenvalues.size());
        return bc == BoundaryCondition::Neumann ? n - 1 : (n - 1) / 2;
    }

    [[nodiscard]] double mu(int label) const {
        const auto i = index_of(bc, label);
        if (i >= eigenvalues.size()) fail(ErrorCode::DomainError, "eigenvalue label out of range");
        return eigenvalues[i];
    }

    /// Recounts negative and zero eigenvalues; zero means |mu| <= 1e-6 max(1, mu_1), mu_1 being
    /// the first eigenvalue clearly above zero.
    void classify() {
        double first_positive = 0.0;
        for (double v : eigenvalues) {
            if (v > 1e-6) {
                first_positive = v;
                break;
            }
        }
        const double tol = 1e-6 * std::max(1.0, first_positive);
        negative_count = 0;
        zero_modes = 0;
        for (double v : eigenvalues) {
            if (std::abs(v) <= tol) {
                ++zero_modes;
            } else if (v < 0.0) {
                ++negative_count;
            }
        }
    }
};

[[nodiscard]] inline double constant_point_value(const LocalPotential& pot, ConstantPoint which) {
    switch (which) {
        case ConstantPoint::Origin: return 0.0;
        case ConstantPoint::Minus: return pot.u_minus();
        case ConstantPoint::Plus: return pot.u_plus();
    }
    return 0.0;
}

/// Closed-form spectrum nu_k + U''(c) at a constant stationary point c, labels |k| <= kmax.
[[nodiscard]] inline SpectrumReport eigs_constant(const LocalPotential& pot, double L, BoundaryCondition bc,
                                                  ConstantPoint which, int kmax) {
    if (kmax < 1) fail(ErrorCode::DomainError, "kmax must be at least 1");
    SpectrumReport r;
    r.bc = bc;
    r.L = L;
    r.profile = which == ConstantPoint::Origin ? "origin" : (which == ConstantPoint::Minus ? "minus" : "plus");
    const double q = pot.d2U(constant_point_value(pot, which));
    r.eigenvalues.push_back(q);
    for (int k = 1; k <= kmax; ++k) {
        const double v = laplace_eigenvalue(bc, L, k) + q;
        r.eigenvalues.push_back(v);
        if (bc == BoundaryCondition::Periodic) r.eigenvalues.push_back(v);
    }
    r.classify();
    return r;
}

namespace detail {

/// `count` smallest eigenvalues of the symmetric tridiagonal matrix (diag, off).
[[nodiscard]] inline std::vector<double> tridiagonal_smallest(std::vector<double> diag, std::vector<double> off,
                                                              int count) {
    const auto n = static_cast<lapack_int>(diag.size());
    count = std::min<int>(count, static_cast<int>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<lapack_int> iblock(static_cast<std::size_t>(n));
    std::vector<lapack_int> isplit(static_cast<std::size_t>(n));
    lapack_int m = 0;
    lapack_int nsplit = 0;
    if (off.empty()) off.push_back(0.0);
    const lapack_int info = LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, 1, count, 2.0 * DBL_MIN, diag.data(), off.data(), &m,
                                           &nsplit, w.data(), iblock.data(), isplit.data());
    if (info != 0) fail(ErrorCode::ResolutionTooLow, "tridiagonal eigensolver failed, info = " + std::to_string(info));
    w.resize(static_cast<std::size_t>(m));
    return w;
}

/// -v'' + q v on [0, l] with m intervals and reflecting (ghost point) ends, symmetrized.
[[nodiscard]] inline std::vector<double> neumann_fd_eigs(std::span<const double> q, double l, int count) {
    const int m = static_cast<int>(q.size()) - 1;
    const double h = l / m;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> diag(q.size());
    std::vector<double> off(static_cast<std::size_t>(m), -ih2);
    for (std::size_t j = 0; j < q.size(); ++j) diag[j] = 2.0 * ih2 + q[j];
    off.front() = -std::numbers::sqrt2 * ih2;
    off.back() = -std::numbers::sqrt2 * ih2;
    if (m == 1) off.front() = -2.0 * ih2;
    return tridiagonal_smallest(std::move(diag), std::move(off), count);
}

/// -v'' + q v on the interior points of [0, l] with v(0) = v(l) = 0.
[[nodiscard]] inline std::vector<double> dirichlet_fd_eigs(std::span<const double> q, double l, int count) {
    const int m = static_cast<int>(q.size()) - 1;
    const double h = l / m;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> diag;
    for (int j = 1; j < m; ++j) diag.push_back(2.0 * ih2 + q[static_cast<std::size_t>(j)]);
    std::vector<double> off(diag.size() > 0 ? diag.size() - 1 : 0, -ih2);
    return tridiagonal_smallest(std::move(diag), std::move(off), count);
}

/// Second-order FD eigenvalues of the linearization on a grid with n intervals.
/// The periodic cyclic matrix is split by the x -> -x symmetry of the profile into an even block
/// (reflecting ends on [0, L/2]) and an odd block (Dirichlet ends on [0, L/2]).
[[nodiscard]] inline std::vector<double> profile_fd_eigs(const InstantonProfile& prof, int n, int count) {
    const auto u = prof.sample(n);
    std::vector<double> q(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) q[j] = prof.potential().d2U(u[j]);
    if (prof.bc == BoundaryCondition::Neumann) return neumann_fd_eigs(q, prof.L, count);
    const std::span<const double> half(q.data(), static_cast<std::size_t>(n / 2) + 1);
    auto even = neumann_fd_eigs(half, 0.5 * prof.L, count);
    auto odd = dirichlet_fd_eigs(half, 0.5 * prof.L, count);
    even.insert(even.end(), odd.begin(), odd.end());
    std::sort(even.begin(), even.end());
    even.resize(std::min<std::size_t>(even.size(), static_cast<std::size_t>(count)));
    return even;
}

}  // namespace detail

/// Eigenvalues for labels |k| <= kmax + 1 from grids of grid_n and 2 grid_n intervals combined by
/// one Richardson step (error model h^2).
[[nodiscard]] inline SpectrumReport eigs_profile(const InstantonProfile& prof, int kmax, int grid_n = 1024) {
    if (grid_n < 256) fail(ErrorCode::GridTooSmall, "eigs_profile needs grid_n >= 256");
    if (kmax < 1) fail(ErrorCode::DomainError, "kmax must be at least 1");
    if (prof.bc == BoundaryCondition::Periodic && grid_n % 2 != 0) fail(ErrorCode::GridTooSmall, "periodic grid_n must be even");
    const int count = prof.bc == BoundaryCondition::Neumann ? kmax + 2 : 2 * (kmax + 1) + 1;
    const auto coarse = detail::profile_fd_eigs(prof, grid_n, count);
    const auto fine = detail::profile_fd_eigs(prof, 2 * grid_n, count);
    SpectrumReport r;
    r.bc = prof.bc;
    r.L = prof.L;
    r.profile = prof.is_constant() ? "constant" : "instanton";
    r.grid_n = grid_n;
    r.richardson_order = 2;
    const std::size_t m = std::min(coarse.size(), fine.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double ext = (4.0 * fine[i] - coarse[i]) / 3.0;
        if (std::abs(fine[i] - coarse[i]) > 0.01 * std::max(1.0, std::abs(ext)))
            fail(ErrorCode::ResolutionTooLow, "eigenvalue " + std::to_string(i) + " not resolved at grid_n = " +
                                                  std::to_string(grid_n));
        r.eigenvalues.push_back(ext);
    }
    r.classify();
    return r;
}

/// Signed product of eigenvalue ratios, carried in log space.
struct ProductValue {
    double log_abs = 0.0;
    int sign = 1;
    [[nodiscard]] double value() const { return sign * std::exp(log_abs); }
};

/// prod over labels |k| <= d, not in `exclude`, of numerator mu_k / denominator mu_k.
[[nodiscard]] inline ProductValue det_ratio_log(const SpectrumReport& num, const SpectrumReport& den, int d,
                                                std::span<const int> exclude = {}) {
    if (num.bc != den.bc) fail(ErrorCode::WrongBoundaryCondition, "spectra use different boundary conditions");
    if (d > num.max_cutoff() || d > den.max_cutoff()) fail(ErrorCode::DomainError, "spectrum does not cover cutoff d");
    const int lo = num.bc == BoundaryCondition::Neumann ? 0 : -d;
    CompensatedSum acc;
    int sign = 1;
    for (int k = lo; k <= d; ++k) {
        if (std::find(exclude.begin(), exclude.end(), k) != exclude.end()) continue;
        const double a = num.mu(k);
        const double b = den.mu(k);
        if (b == 0.0) fail(ErrorCode::ZeroDenominator, "zero denominator eigenvalue at label " + std::to_string(k));
        if (a == 0.0) return {-std::numeric_limits<double>::infinity(), 1};
        if ((a < 0.0) != (b < 0.0)) sign = -sign;
        acc.add(std::log(std::abs(a)) - std::log(std::abs(b)));
    }
    return {acc.value(), sign};
}

[[nodiscard]] inline double det_ratio(const SpectrumReport& num, const SpectrumReport& den, int d,
                                      std::span<const int> exclude = {}) {
    return det_ratio_log(num, den, d, exclude).value();
}

/// Constant-saddle prefactor from the product identities:
/// Neumann 2 pi (sin L / (sqrt(c) sinh(L sqrt(c))))^{1/2},
/// periodic 2 pi sin(L/2) / sinh(sqrt(c) L / 2), with c = U''(u_-).
[[nodiscard]] inline double closed_form_product(const LocalPotential& pot, double L, BoundaryCondition bc) {
    if (!(L > 0.0) || L >= bifurcation_length(bc))
        fail(ErrorCode::OutOfRegime, "closed form requires 0 < L below the first bifurcation");
    const double c = pot.d2U(pot.u_minus());
    const double rc = std::sqrt(c);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (bc == BoundaryCondition::Neumann) return two_pi * std::sqrt(std::sin(L) / (rc * std::sinh(L * rc)));
    return two_pi * std::sin(0.5 * L) / std::sinh(0.5 * rc * L);
}

}  // namespace kspde

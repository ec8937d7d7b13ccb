#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fftw3.h>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/potential.hpp"

namespace kspde {

enum class BoundaryCondition { Neumann, Periodic };

[[nodiscard]] constexpr int mode_factor(BoundaryCondition bc) noexcept { return bc == BoundaryCondition::Neumann ? 1 : 2; }

[[nodiscard]] constexpr std::string_view to_string(BoundaryCondition bc) noexcept {
    return bc == BoundaryCondition::Neumann ? "neumann" : "periodic";
}

/// First bifurcation length: pi for Neumann, 2 pi for periodic.
[[nodiscard]] constexpr double bifurcation_length(BoundaryCondition bc) noexcept {
    return mode_factor(bc) * std::numbers::pi;
}

/// nu_k(L) = (b k pi / L)^2; symmetric in k for the periodic index set.
[[nodiscard]] inline double laplace_eigenvalue(BoundaryCondition bc, double L, int k) {
    const double w = mode_factor(bc) * static_cast<double>(k) * std::numbers::pi / L;
    return w * w;
}

enum class Linearization { Origin, MinusWell };

/// lambda_k = nu_k - 1 at the origin, nu_k^- = nu_k + U''(u_-) at the left well.
[[nodiscard]] inline double linearized_eigenvalue(BoundaryCondition bc, double L, int k, Linearization at,
                                                  const LocalPotential& pot) {
    const double nu = laplace_eigenvalue(bc, L, k);
    return at == Linearization::Origin ? nu - 1.0 : nu + pot.d2U(pot.u_minus());
}

/// Galerkin-truncated real field.
/// Neumann coefficients are (y_0, ..., y_d) in the basis 1/sqrt(L), sqrt(2/L) cos(k pi x/L).
/// Periodic coefficients are (a_0, a_1, b_1, ..., a_d, b_d) in the basis 1/sqrt(L),
/// sqrt(2/L) cos(2 pi k x/L), sqrt(2/L) sin(2 pi k x/L).
struct FourierState {
    BoundaryCondition bc = BoundaryCondition::Neumann;
    double L = 1.0;
    int d = 0;
    std::vector<double> coeffs;

    [[nodiscard]] static std::size_t size_for(BoundaryCondition bc, int d) noexcept {
        return bc == BoundaryCondition::Neumann ? static_cast<std::size_t>(d) + 1 : 2 * static_cast<std::size_t>(d) + 1;
    }

    [[nodiscard]] static FourierState zero(BoundaryCondition bc, double L, int d) {
        if (d < 0) fail(ErrorCode::InvalidConfig, "cutoff d must be nonnegative");
        if (!(L > 0.0)) fail(ErrorCode::InvalidConfig, "domain length must be positive");
        return {bc, L, d, std::vector<double>(size_for(bc, d), 0.0)};
    }

    /// The state representing u(x) == value.
    [[nodiscard]] static FourierState constant(BoundaryCondition bc, double L, int d, double value) {
        auto s = zero(bc, L, d);
        s.coeffs[0] = value * std::sqrt(L);
        return s;
    }

    /// Wavenumber |k| that coordinate i refers to.
    [[nodiscard]] int wavenumber(std::size_t i) const noexcept {
        return bc == BoundaryCondition::Neumann ? static_cast<int>(i) : static_cast<int>((i + 1) / 2);
    }

    [[nodiscard]] double nu(std::size_t i) const { return laplace_eigenvalue(bc, L, wavenumber(i)); }

    /// ||u'||_{L^2}^2 = sum nu_k y_k^2.
    [[nodiscard]] double derivative_norm_sq() const {
        double s = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) s += nu(i) * coeffs[i] * coeffs[i];
        return s;
    }

    [[nodiscard]] double l2_norm() const {
        double s = 0.0;
        for (double c : coeffs) s += c * c;
        return std::sqrt(s);
    }

    /// The same field truncated (or zero-extended) to cutoff `new_d`.
    [[nodiscard]] FourierState resized(int new_d) const {
        auto s = zero(bc, L, new_d);
        const std::size_t m = std::min(s.coeffs.size(), coeffs.size());
        std::copy_n(coeffs.begin(), m, s.coeffs.begin());
        return s;
    }

    /// Pointwise evaluation by direct summation.
    [[nodiscard]] double eval(double x) const {
        const double c0 = 1.0 / std::sqrt(L);
        const double c1 = std::sqrt(2.0 / L);
        double u = coeffs[0] * c0;
        const double w = mode_factor(bc) * std::numbers::pi / L;
        for (int k = 1; k <= d; ++k) {
            if (bc == BoundaryCondition::Neumann) {
                u += c1 * coeffs[static_cast<std::size_t>(k)] * std::cos(w * k * x);
            } else {
                u += c1 * (coeffs[2 * static_cast<std::size_t>(k) - 1] * std::cos(w * k * x) +
                           coeffs[2 * static_cast<std::size_t>(k)] * std::sin(w * k * x));
            }
        }
        return u;
    }
};

/// Smallest integer >= n of the form 2^a 3^b 5^c.
[[nodiscard]] inline int transform_friendly_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

/// Default quadrature grid size 2 p0 (d+1), exact for the polynomial nonlinearity.
[[nodiscard]] inline int default_grid_size(const LocalPotential& pot, BoundaryCondition bc, int d) {
    const int base = std::max(2 * pot.p0() * (d + 1), 2 * d + 2);
    if (bc == BoundaryCondition::Neumann) return transform_friendly_size(base - 1) + 1;
    return transform_friendly_size(base);
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const noexcept {
        if (p != nullptr) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(p);
        }
    }
};
struct FftwBufferDeleter {
    void operator()(double* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// Coefficient <-> grid transform for one (bc, L, d, n) combination.
///
/// Neumann grid: n points x_j = j L/(n-1) including both endpoints, trapezoid weights.
/// Periodic grid: n points x_j = j L/n.
/// For d <= 32 the dense matrix path is used; above that FFTW r2r plans.
/// A plan owns scratch buffers and must stay confined to one task.
class TransformPlan {
public:
    static constexpr int dense_limit = 32;

    TransformPlan(BoundaryCondition bc, double L, int d, int n) : bc_(bc), L_(L), d_(d), n_(n) {
        if (n < 2 * d + 2) fail(ErrorCode::GridTooSmall, "grid size must be at least 2d+2");
        size_ = FourierState::size_for(bc, d);
        if (d <= dense_limit) {
            build_dense();
        } else {
            build_fftw();
        }
    }

    [[nodiscard]] BoundaryCondition bc() const noexcept { return bc_; }
    [[nodiscard]] double L() const noexcept { return L_; }
    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] int n() const noexcept { return n_; }

    [[nodiscard]] double x(int j) const noexcept {
        return bc_ == BoundaryCondition::Neumann ? L_ * j / (n_ - 1) : L_ * j / n_;
    }
    [[nodiscard]] bool is_dense() const noexcept { return dense_; }

    /// u(x_j) for a single grid point; dense plans only.
    [[nodiscard]] double eval_at(std::span<const double> coeffs, int j) const noexcept {
        const double* row = &basis_[static_cast<std::size_t>(j) * size_];
        double acc = 0.0;
        for (std::size_t i = 0; i < size_; ++i) acc += row[i] * coeffs[i];
        return acc;
    }

    [[nodiscard]] double weight(int j) const noexcept {
        if (bc_ == BoundaryCondition::Periodic) return L_ / n_;
        const double h = L_ / (n_ - 1);
        return (j == 0 || j == n_ - 1) ? 0.5 * h : h;
    }

    /// u(x_j) for all grid points.
    void to_grid(std::span<const double> coeffs, std::span<double> out) {
        if (dense_) {
            for (int j = 0; j < n_; ++j) {
                const double* row = &basis_[static_cast<std::size_t>(j) * size_];
                double acc = 0.0;
                for (std::size_t i = 0; i < size_; ++i) acc += row[i] * coeffs[i];
                out[static_cast<std::size_t>(j)] = acc;
            }
            return;
        }
        double* buf = buf_.get();
        std::fill_n(buf, n_, 0.0);
        const double c0 = 1.0 / std::sqrt(L_);
        const double c1 = std::sqrt(2.0 / L_);
        if (bc_ == BoundaryCondition::Neumann) {
            buf[0] = c0 * coeffs[0];
            for (int k = 1; k <= d_; ++k) buf[k] = 0.5 * c1 * coeffs[static_cast<std::size_t>(k)];
        } else {
            buf[0] = c0 * coeffs[0];
            for (int k = 1; k <= d_; ++k) {
                buf[k] = 0.5 * c1 * coeffs[2 * static_cast<std::size_t>(k) - 1];
                buf[n_ - k] = -0.5 * c1 * coeffs[2 * static_cast<std::size_t>(k)];
            }
        }
        fftw_execute(backward_.get());
        std::copy_n(buf, n_, out.begin());
    }

    /// Quadrature inner products y_k = sum_j w_j u_j e_k(x_j), truncated to |k| <= d.
    void from_grid(std::span<const double> values, std::span<double> coeffs) {
        if (dense_) {
            std::fill(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(size_), 0.0);
            for (int j = 0; j < n_; ++j) {
                const double wu = weight(j) * values[static_cast<std::size_t>(j)];
                const double* row = &basis_[static_cast<std::size_t>(j) * size_];
                for (std::size_t i = 0; i < size_; ++i) coeffs[i] += row[i] * wu;
            }
            return;
        }
        double* buf = buf_.get();
        std::copy_n(values.begin(), n_, buf);
        fftw_execute(forward_.get());
        const double c0 = 1.0 / std::sqrt(L_);
        const double c1 = std::sqrt(2.0 / L_);
        if (bc_ == BoundaryCondition::Neumann) {
            const double s = 0.5 * L_ / (n_ - 1);
            coeffs[0] = c0 * s * buf[0];
            for (int k = 1; k <= d_; ++k) coeffs[static_cast<std::size_t>(k)] = c1 * s * buf[k];
        } else {
            const double s = L_ / n_;
            coeffs[0] = c0 * s * buf[0];
            for (int k = 1; k <= d_; ++k) {
                coeffs[2 * static_cast<std::size_t>(k) - 1] = c1 * s * buf[k];
                coeffs[2 * static_cast<std::size_t>(k)] = -c1 * s * buf[n_ - k];
            }
        }
    }

    [[nodiscard]] std::vector<double> to_grid(const FourierState& s) {
        check_compatible(s);
        std::vector<double> out(static_cast<std::size_t>(n_));
        to_grid(s.coeffs, out);
        return out;
    }

    [[nodiscard]] FourierState from_grid(std::span<const double> values) {
        if (values.size() != static_cast<std::size_t>(n_)) fail(ErrorCode::GridTooSmall, "sample count does not match plan");
        auto s = FourierState::zero(bc_, L_, d_);
        from_grid(values, s.coeffs);
        return s;
    }

private:
    void check_compatible(const FourierState& s) const {
        if (s.bc != bc_ || s.d != d_ || s.L != L_) fail(ErrorCode::InvalidConfig, "state does not match transform plan");
    }

    void build_dense() {
        dense_ = true;
        basis_.assign(static_cast<std::size_t>(n_) * size_, 0.0);
        const double c0 = 1.0 / std::sqrt(L_);
        const double c1 = std::sqrt(2.0 / L_);
        const double w = mode_factor(bc_) * std::numbers::pi / L_;
        for (int j = 0; j < n_; ++j) {
            double* row = &basis_[static_cast<std::size_t>(j) * size_];
            const double xj = x(j);
            row[0] = c0;
            for (int k = 1; k <= d_; ++k) {
                if (bc_ == BoundaryCondition::Neumann) {
                    row[k] = c1 * std::cos(w * k * xj);
                } else {
                    row[2 * k - 1] = c1 * std::cos(w * k * xj);
                    row[2 * k] = c1 * std::sin(w * k * xj);
                }
            }
        }
    }

    void build_fftw() {
        dense_ = false;
        buf_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n_))));
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (bc_ == BoundaryCondition::Neumann) {
            forward_.reset(fftw_plan_r2r_1d(n_, buf_.get(), buf_.get(), FFTW_REDFT00, FFTW_ESTIMATE));
            backward_.reset(fftw_plan_r2r_1d(n_, buf_.get(), buf_.get(), FFTW_REDFT00, FFTW_ESTIMATE));
        } else {
            forward_.reset(fftw_plan_r2r_1d(n_, buf_.get(), buf_.get(), FFTW_R2HC, FFTW_ESTIMATE));
            backward_.reset(fftw_plan_r2r_1d(n_, buf_.get(), buf_.get(), FFTW_HC2R, FFTW_ESTIMATE));
        }
    }

    BoundaryCondition bc_;
    double L_;
    int d_;
    int n_;
    std::size_t size_ = 0;
    bool dense_ = true;
    std::vector<double> basis_;
    std::unique_ptr<double, detail::FftwBufferDeleter> buf_;
    std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> forward_;
    std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> backward_;
};

[[nodiscard]] inline std::vector<double> to_grid(const FourierState& s, int n_grid) {
    TransformPlan plan(s.bc, s.L, s.d, n_grid);
    return plan.to_grid(s);
}

[[nodiscard]] inline FourierState from_grid(std::span<const double> samples, BoundaryCondition bc, double L, int d) {
    TransformPlan plan(bc, L, d, static_cast<int>(samples.size()));
    return plan.from_grid(samples);
}

/// Grid-based sup-norm distance evaluator with a cached plan, for repeated hitting checks.
class SupNorm {
public:
    SupNorm(BoundaryCondition bc, double L, int d, int refine)
        : plan_(bc, L, d, grid_points(bc, d, refine)), diff_(FourierState::size_for(bc, d)),
          grid_(static_cast<std::size_t>(plan_.n())) {}

    [[nodiscard]] static int grid_points(BoundaryCondition bc, int d, int refine) {
        if (refine < 1) fail(ErrorCode::InvalidConfig, "refine must be positive");
        const int n = refine * (2 * d + 2);
        return bc == BoundaryCondition::Neumann ? n + 1 : n;
    }

    [[nodiscard]] double distance(std::span<const double> a, std::span<const double> b) {
        for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] = a[i] - b[i];
        plan_.to_grid(diff_, grid_);
        double m = 0.0;
        for (double v : grid_) m = std::max(m, std::abs(v));
        return m;
    }

    /// True when the grid sup-distance is below `rho`; stops at the first grid point that is not.
    [[nodiscard]] bool within(std::span<const double> a, std::span<const double> b, double rho) {
        for (std::size_t i = 0; i < diff_.size(); ++i) diff_[i] = a[i] - b[i];
        if (plan_.is_dense()) {
            for (int j = 0; j < plan_.n(); ++j)
                if (!(std::abs(plan_.eval_at(diff_, j)) < rho)) return false;
            return true;
        }
        plan_.to_grid(diff_, grid_);
        for (double v : grid_)
            if (!(std::abs(v) < rho)) return false;
        return true;
    }

private:
    TransformPlan plan_;
    std::vector<double> diff_;
    std::vector<double> grid_;
};

/// max over refine*(2d+2) grid points of |u_a - u_b|.
[[nodiscard]] inline double sup_dist(const FourierState& a, const FourierState& b, int refine = 8) {
    if (a.bc != b.bc || a.L != b.L) fail(ErrorCode::InvalidConfig, "states must share boundary condition and length");
    const int d = std::max(a.d, b.d);
    const auto ra = a.resized(d);
    const auto rb = b.resized(d);
    SupNorm sn(a.bc, a.L, d, refine);
    return sn.distance(ra.coeffs, rb.coeffs);
}

/// Writes x,u rows with a header comment recording bc, L and d.
inline void export_profile_csv(std::ostream& os, const FourierState& s, int n_grid) {
    TransformPlan plan(s.bc, s.L, s.d, n_grid);
    const auto u = plan.to_grid(s);
    os << "# bc=" << to_string(s.bc) << " L=" << s.L << " d=" << s.d << '\n';
    os << "x,u\n";
    os.precision(17);
    for (int j = 0; j < n_grid; ++j) os << plan.x(j) << ',' << u[static_cast<std::size_t>(j)] << '\n';
}

}  // namespace kspde

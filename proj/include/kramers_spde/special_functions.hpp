#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "kramers_spde/errors.hpp"

namespace kspde {

namespace detail {

inline constexpr double bessel_switch = 15.0;

/// sum_k (x^2/4)^k / (k! Gamma(k + nu + 1)), i.e. I_nu(x) without the (x/2)^nu factor.
[[nodiscard]] inline double bessel_i_reduced(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0 / std::tgamma(nu + 1.0);
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

/// Large-x expansion sum_k s^k a_k(nu) / x^k truncated at its smallest term, s = -1 for I, +1 for K.
[[nodiscard]] inline double bessel_asymptotic_sum(double nu, double x, double sign) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = std::abs(term);
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * sign * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= prev) break;
        term = next;
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

/// e^x K_nu(x) = int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt by the trapezoid rule;
/// the integrand is analytic in a strip, so the rule converges geometrically in 1/h.
[[nodiscard]] inline double bessel_k_scaled_integral(double nu, double x) {
    constexpr double h = 0.1;
    const double t_max = std::acosh(1.0 + 45.0 / x);
    double sum = 0.5;
    for (int j = 1;; ++j) {
        const double t = j * h;
        if (t > t_max) break;
        sum += std::exp(-x * (std::cosh(t) - 1.0)) * std::cosh(nu * t);
    }
    return h * sum;
}

}  // namespace detail

/// e^{-x} I_nu(x) for x >= 0.
[[nodiscard]] inline double bessel_iv_scaled(double nu, double x) {
    if (!(x >= 0.0)) fail(ErrorCode::DomainError, "bessel_iv_scaled requires x >= 0");
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;
        if (nu > 0.0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    if (x < detail::bessel_switch) return std::exp(-x) * std::pow(0.5 * x, nu) * detail::bessel_i_reduced(nu, x);
    return detail::bessel_asymptotic_sum(nu, x, -1.0) / std::sqrt(2.0 * std::numbers::pi * x);
}

/// e^{x} K_nu(x) for x > 0, non-integer nu.
[[nodiscard]] inline double bessel_k_scaled(double nu, double x) {
    if (!(x >= 0.0)) fail(ErrorCode::DomainError, "bessel_k_scaled requires x >= 0");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    if (x < 1.0) {
        const double im = std::pow(0.5 * x, -nu) * detail::bessel_i_reduced(-nu, x);
        const double ip = std::pow(0.5 * x, nu) * detail::bessel_i_reduced(nu, x);
        return std::exp(x) * 0.5 * std::numbers::pi * (im - ip) / std::sin(nu * std::numbers::pi);
    }
    if (x < detail::bessel_switch) return detail::bessel_k_scaled_integral(nu, x);
    return std::sqrt(std::numbers::pi / (2.0 * x)) * detail::bessel_asymptotic_sum(nu, x, 1.0);
}

/// Scaled complementary error function exp(x^2) erfc(x).
[[nodiscard]] inline double erfcx(double x) {
    if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
    if (x < 10.0) return std::exp(x * x) * std::erfc(x);
    // Laplace continued fraction erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    double tail = x;
    for (int k = 60; k >= 1; --k) tail = x + 0.5 * k / tail;
    return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

enum class Branch { Plus, Minus };

/// Psi_+(a) = sqrt(a(1+a)/(8 pi)) e^{a^2/16} K_{1/4}(a^2/16),
/// Psi_-(a) = sqrt(pi a(1+a)/32) e^{-a^2/64} [I_{-1/4}(a^2/64) + I_{1/4}(a^2/64)].
/// Near a = 0 the a^{1/2} prefactor is absorbed into the Bessel x^{-1/4} singularity analytically.
[[nodiscard]] inline double psi(Branch branch, double alpha) {
    if (!(alpha >= 0.0)) fail(ErrorCode::DomainError, "psi requires alpha >= 0");
    constexpr double pi = std::numbers::pi;
    if (branch == Branch::Plus) {
        const double x = alpha * alpha / 16.0;
        if (x < 1.0) {
            // sqrt(a) (x/2)^{-1/4} = 32^{1/4},  sqrt(a) (x/2)^{1/4} = a 32^{-1/4}
            const double r = std::pow(32.0, 0.25);
            const double k = 0.5 * pi / std::sin(0.25 * pi) *
                             (r * detail::bessel_i_reduced(-0.25, x) - alpha / r * detail::bessel_i_reduced(0.25, x));
            return std::sqrt((1.0 + alpha) / (8.0 * pi)) * std::exp(x) * k;
        }
        return std::sqrt(alpha * (1.0 + alpha) / (8.0 * pi)) * bessel_k_scaled(0.25, x);
    }
    const double x = alpha * alpha / 64.0;
    if (x < detail::bessel_switch) {
        const double r = std::pow(128.0, 0.25);
        const double s = r * detail::bessel_i_reduced(-0.25, x) + alpha / r * detail::bessel_i_reduced(0.25, x);
        return std::sqrt(pi * (1.0 + alpha) / 32.0) * std::exp(-x) * s;
    }
    return std::sqrt(pi * alpha * (1.0 + alpha) / 32.0) * (bessel_iv_scaled(-0.25, x) + bessel_iv_scaled(0.25, x));
}

/// Theta_+(a) = sqrt(pi/2) (1+a) e^{a^2/8} Phi(-a/2),  Theta_-(a) = sqrt(pi/2) Phi(a/2).
[[nodiscard]] inline double theta(Branch branch, double alpha) {
    if (!(alpha >= 0.0)) fail(ErrorCode::DomainError, "theta requires alpha >= 0");
    const double z = alpha / (2.0 * std::numbers::sqrt2);
    const double c = std::sqrt(0.5 * std::numbers::pi);
    if (branch == Branch::Plus) return c * (1.0 + alpha) * 0.5 * erfcx(z);
    return c * 0.5 * std::erfc(-z);
}

/// Common value Psi_+(0) = Psi_-(0) = Gamma(1/4) / (2^{5/4} sqrt(pi)).
[[nodiscard]] inline double psi_at_zero() {
    return std::tgamma(0.25) / (std::pow(2.0, 1.25) * std::sqrt(std::numbers::pi));
}

/// Common value Theta_+(0) = Theta_-(0) = sqrt(pi/8).
[[nodiscard]] inline double theta_at_zero() { return std::sqrt(std::numbers::pi / 8.0); }

}  // namespace kspde

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kspde {

/// Real polynomial in the monomial basis, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    [[nodiscard]] std::span<const double> coefficients() const noexcept { return c_; }
    [[nodiscard]] int degree() const noexcept { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] double leading() const noexcept { return c_.empty() ? 0.0 : c_.back(); }
    [[nodiscard]] double coeff(std::size_t i) const noexcept { return i < c_.size() ? c_[i] : 0.0; }

    [[nodiscard]] double operator()(double x) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    [[nodiscard]] Polynomial derivative(int order = 1) const {
        std::vector<double> out(c_);
        for (int o = 0; o < order; ++o) {
            if (out.size() <= 1) return Polynomial{};
            std::vector<double> next(out.size() - 1);
            for (std::size_t i = 1; i < out.size(); ++i) next[i - 1] = static_cast<double>(i) * out[i];
            out = std::move(next);
        }
        return Polynomial(std::move(out));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> out(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
        return Polynomial(std::move(out));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * -1.0; }
    friend Polynomial operator*(const Polynomial& a, double s) {
        std::vector<double> out(a.c_);
        for (auto& v : out) v *= s;
        return Polynomial(std::move(out));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.c_.empty() || b.c_.empty()) return Polynomial{};
        std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(out));
    }

    /// q(u) = p(shift + scale*u), expanded exactly by Horner composition.
    [[nodiscard]] Polynomial compose_affine(double shift, double scale) const {
        const Polynomial lin(std::vector<double>{shift, scale});
        Polynomial acc;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + Polynomial(std::vector<double>{*it});
        return acc;
    }

    /// Synthetic division by (u - r); the remainder p(r) is dropped.
    [[nodiscard]] Polynomial deflate(double r) const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<double> q(c_.size() - 1);
        double acc = c_.back();
        for (std::size_t i = c_.size() - 1; i-- > 0;) {
            q[i] = acc;
            acc = acc * r + c_[i];
        }
        return Polynomial(std::move(q));
    }

    /// Drop the lowest `k` coefficients, i.e. p(u)/u^k for a polynomial divisible by u^k.
    [[nodiscard]] Polynomial shift_down(std::size_t k) const {
        if (k >= c_.size()) return Polynomial{};
        return Polynomial(std::vector<double>(c_.begin() + static_cast<std::ptrdiff_t>(k), c_.end()));
    }

    /// Real roots, ascending, from companion-matrix eigenvalues polished by Newton.
    /// A root is accepted as real when its imaginary part is below `imag_tol` relative to scale.
    [[nodiscard]] std::vector<double> real_roots(double imag_tol = 1e-7) const {
        std::vector<double> roots;
        if (degree() < 1) return roots;
        // factor out exact zero roots first
        std::size_t zeros = 0;
        while (zeros < c_.size() && c_[zeros] == 0.0) ++zeros;
        for (std::size_t i = 0; i < zeros; ++i) roots.push_back(0.0);
        const Polynomial red = shift_down(zeros);
        const int n = red.degree();
        if (n >= 1) {
            Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
            for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
            for (int i = 0; i < n; ++i) comp(i, n - 1) = -red.c_[static_cast<std::size_t>(i)] / red.leading();
            Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
            const Polynomial dred = red.derivative();
            for (int i = 0; i < n; ++i) {
                const std::complex<double> z = es.eigenvalues()[i];
                const double scale = std::max(1.0, std::abs(z));
                if (std::abs(z.imag()) > imag_tol * scale) continue;
                double x = z.real();
                for (int it = 0; it < 50; ++it) {
                    const double d = dred(x);
                    if (d == 0.0) break;
                    const double step = red(x) / d;
                    x -= step;
                    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
                }
                roots.push_back(x);
            }
        }
        std::sort(roots.begin(), roots.end());
        return roots;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

}  // namespace kspde

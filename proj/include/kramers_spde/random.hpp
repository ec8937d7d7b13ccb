#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace kspde {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011 constants).
/// Stateless: the same (key, counter) always produces the same block.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    [[nodiscard]] static constexpr Counter block(Counter c, Key k) noexcept {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += W0;
                k[1] += W1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
        return c;
    }
};

/// Stream of standard normals keyed by a 64-bit seed and a 32-bit stream id; draw i of the
/// stream depends only on (seed, stream, i), so streams can be split and replayed freely.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, std::uint32_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    /// Uniform in (0, 1) with 53 random bits.
    [[nodiscard]] double uniform() noexcept {
        if (upos_ >= 2) refill_uniforms();
        return ubuf_[upos_++];
    }

    [[nodiscard]] double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out) noexcept {
        for (auto& v : out) v = normal();
    }

    [[nodiscard]] std::uint64_t blocks_used() const noexcept { return counter_; }

private:
    void refill_uniforms() noexcept {
        const Philox4x32::Counter c{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                    stream_, 0u};
        ++counter_;
        const auto r = Philox4x32::block(c, key_);
        for (int i = 0; i < 2; ++i) {
            const std::uint64_t bits = (static_cast<std::uint64_t>(r[2 * i]) << 32 | r[2 * i + 1]) >> 11;
            ubuf_[i] = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
        }
        upos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    std::array<double, 2> ubuf_{};
    int upos_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kspde

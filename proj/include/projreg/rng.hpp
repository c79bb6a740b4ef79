#pragma once

// Counter-based random numbers with a fixed, platform-independent stream
// contract.
//
// A stream is identified by a 64-bit key. Output block i of a stream is
// Philox4x32-10(counter = i, key), giving four 32-bit words. Uniform doubles
// take 53 bits from two consecutive words; standard normals use the
// Box-Muller transform on two uniforms and consume both outputs in order.
//
// Keys for sub-streams are derived with derive_seed(parent, tag...), which
// folds each tag into the parent through SplitMix64. Every consumer in the
// library names its stream this way, so replaying a master seed replays
// every draw bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace projreg {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(parent);
    for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
    return s;
}

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3").
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(std::uint64_t counter, std::uint64_t key) {
        return generate(Block{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0u, 0u},
                        key);
    }

    static Block generate(Block c, std::uint64_t key) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int r = 0; r < 10; ++r) {
            c = round(c, k0, k1);
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

private:
    static Block round(const Block& c, std::uint32_t k0, std::uint32_t k1) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    }
};

/// Sequential reader over one Philox stream.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const noexcept { return key_; }

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            block_ = Philox4x32::generate(counter_++, key_);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// Uniform on (0, 1); never returns 0 so log() is safe.
    double uniform() {
        const std::uint64_t hi = next_u32() >> 5;  // 27 bits
        const std::uint64_t lo = next_u32() >> 6;  // 26 bits
        const double u = (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
        return u;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace projreg

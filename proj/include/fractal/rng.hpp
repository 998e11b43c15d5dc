#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace fractal {

// Philox4x32-10 counter-based generator.
//
// Chosen over <random> engines because the output must be bit-identical
// across standard libraries and across worker counts: every (seed, stream)
// pair is an independent, reproducible stream, so parallel consumers never
// share state. Constants follow Salmon et al.'s reference implementation.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        counter_ = {0, 0, static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
    }

    std::uint32_t next_u32() {
        if (block_pos_ == 4) {
            block_ = generate_block();
            advance_counter();
            block_pos_ = 0;
        }
        return block_[block_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform in (0, 1]: 53 significant bits, never exactly zero so it is
    // safe inside log().
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Rejection-free, so the draw count per
    // call is fixed and streams stay aligned across platforms.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::array<std::uint32_t, 4> generate_block() const {
        std::array<std::uint32_t, 4> c = counter_;
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return c;
    }

    void advance_counter() {
        if (++counter_[0] == 0) ++counter_[1];
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// 64-bit FNV-1a, used to derive RNG streams from string labels.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char ch : text) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace fractal

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwi {

/// Philox-4x32-10 block function (Salmon et al. counter-based generator).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Random stream used by every sampler.
///
/// A stream is identified by (master seed, stream index). Its 256-bit
/// xoshiro256++ state is the output of Philox-4x32-10 keyed by the seed at
/// counters (index, 0) and (index, 1):
///
///     key   = (seed mod 2^32, seed >> 32)
///     c_j   = (index mod 2^32, index >> 32, j, 0),  j = 0, 1
///     state = (w0|w1<<32, w2|w3<<32) of block(c_0) ++ same of block(c_1)
///
/// Identical (seed, index) pairs reproduce identical draws on every run.
class Stream {
public:
    using result_type = std::uint64_t;

    static Stream derive(std::uint64_t seed, std::uint64_t index) {
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                               static_cast<std::uint32_t>(seed >> 32)};
        const auto lo = static_cast<std::uint32_t>(index);
        const auto hi = static_cast<std::uint32_t>(index >> 32);
        const auto b0 = philox4x32({lo, hi, 0u, 0u}, key);
        const auto b1 = philox4x32({lo, hi, 1u, 0u}, key);
        Stream s;
        s.state_ = {join(b0[0], b0[1]), join(b0[2], b0[3]), join(b1[0], b1[1]), join(b1[2], b1[3])};
        if ((s.state_[0] | s.state_[1] | s.state_[2] | s.state_[3]) == 0) s.state_[0] = 1;
        return s;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        auto& s = state_;
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
        return std::uint64_t{lo} | (std::uint64_t{hi} << 32);
    }
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace gwi

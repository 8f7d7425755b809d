#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spectralens {

/// Seed record for every stochastic operation. Identical (seed, stream)
/// pairs reproduce identical outputs bit-for-bit on one build.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Derive an independent child record, e.g. one per sweep point.
    [[nodiscard]] RngSeed derive(std::uint64_t tag) const {
        return RngSeed{seed, stream * 0x9E3779B97F4A7C15ULL + tag + 1};
    }
};

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the 64-bit seed; the 128-bit counter holds
/// (block, substream, stream). Every substream (typically a data column)
/// therefore owns an independent sequence that does not depend on the
/// order in which substreams are visited.
class Philox {
public:
    Philox(RngSeed seed, std::uint64_t substream)
        : key_{static_cast<std::uint32_t>(seed.seed), static_cast<std::uint32_t>(seed.seed >> 32)},
          substream_(substream),
          stream_(seed.stream) {}

    std::uint32_t next_u32() {
        if (index_ == 4) {
            refill();
        }
        return buffer_[index_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in (0, 1].
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; caches the second variate.
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
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

    void refill() {
        // Counter layout: (block, substream lo, stream lo, stream hi ^ substream hi).
        std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(substream_),
            static_cast<std::uint32_t>(stream_),
            static_cast<std::uint32_t>(stream_ >> 32) ^ static_cast<std::uint32_t>(substream_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        buffer_ = ctr;
        index_ = 0;
        ++block_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t substream_;
    std::uint64_t stream_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int index_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace spectralens

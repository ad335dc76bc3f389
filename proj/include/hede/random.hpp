#pragma once

#include <array>
#include <cstdint>

namespace hede {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Substream purposes. The stream id is (purpose << 48) | index, so every
/// column / coordinate / sample owns an independent sequence.
enum class StreamPurpose : std::uint64_t {
    AlleleFrequency = 1,
    Genotype = 2,
    SignalSupport = 3,
    SignalValue = 4,
    Noise = 5,
    GaussianDesign = 6,
    Fuzz = 7,
};

/// Sequential reader over one substream: key = seed, counter = (block, stream).
/// Draws depend only on (seed, stream id, position), never on thread layout.
class RandomStream
{
public:
    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept;
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept;
    double uniform(double low, double high) noexcept;
    /// Standard normal via Box-Muller (both outputs used).
    double normal() noexcept;
    bool bernoulli(double prob) noexcept;

    static std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace hede

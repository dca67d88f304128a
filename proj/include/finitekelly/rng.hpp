#pragma once

// Counter-based random numbers: Philox4x32-10 (Salmon, Moraes, Dror, Shaw,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11).
//
// A stream is identified by (seed, stream id); the i-th 128-bit block of a
// stream is a pure function of (seed, stream, i), so per-trial streams give
// results that do not depend on how trials are scheduled.
//
// Version pinning: kRngVersion changes whenever the mapping from
// (seed, stream, draw index) to values changes. Golden files record it.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "finitekelly/dist.hpp"

namespace finitekelly {

inline constexpr int kRngVersion = 1;

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

} // namespace detail

class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream)
    {
    }

    std::uint64_t next_u64()
    {
        if (pos_ == 2) {
            const auto out = detail::philox4x32_10({static_cast<std::uint32_t>(block_),
                                                    static_cast<std::uint32_t>(block_ >> 32),
                                                    static_cast<std::uint32_t>(stream_),
                                                    static_cast<std::uint32_t>(stream_ >> 32)},
                                                   key_);
            buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
            buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

/// Inverse-CDF sampler over a finite pmf.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const Dist& p) : cdf_(p.size())
    {
        detail::CompensatedSum s;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s.add(p[i]);
            cdf_[i] = s.value();
            if (p[i] > 0.0)
                last_ = i;
        }
    }

    std::size_t operator()(PhiloxStream& rng) const
    {
        const double u = rng.uniform01();
        for (std::size_t i = 0; i < last_; ++i)
            if (u < cdf_[i])
                return i;
        return last_;
    }

private:
    std::vector<double> cdf_;
    std::size_t last_ = 0;
};

} // namespace finitekelly

#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, replication, individual, period), so rows can be filled in any
// order or on any number of threads with identical results.

#include <array>
#include <cstdint>

namespace panel_logit {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key);

/// Period slot reserved for the individual-level draw (the fixed effect).
inline constexpr std::uint32_t kEffectSlot = 0xFFFFFFFFu;

class KeyedUniform {
public:
    explicit KeyedUniform(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double operator()(std::uint32_t replication, std::uint64_t individual, std::uint32_t period) const;

private:
    Philox4x32Key key_;
};

}  // namespace panel_logit

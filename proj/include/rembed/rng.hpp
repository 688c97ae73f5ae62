#pragma once

#include <cstdint>
#include <optional>

#include "rembed/dense.hpp"

namespace rembed {

/// Counter-based pseudo-random stream.
///
/// Draw number i (0-based) of a stream with key s is splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15),
/// where splitmix64 is the standard finalizer (xor-shift 30/27/31 with multipliers
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Uniforms take the top 53 bits and are offset
/// by half an ulp so they lie strictly inside (0, 1). Normals come from Box-Muller on
/// consecutive uniform pairs (u1, u2): r = sqrt(-2 ln u1), cos branch first, sin branch cached.
///
/// The key of a stream is splitmix64 of the user seed, and fork(id) derives a child key from
/// the parent key and id, so sub-computations get independent reproducible streams.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform in (0, 1).
    double uniform();
    double normal();
    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    RandomStream fork(std::uint64_t id) const;

    /// rows×cols matrix of independent standard normals, filled column-major.
    DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols);

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    struct FromKey {};
    RandomStream(FromKey, std::uint64_t key) : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> cached_normal_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace rembed

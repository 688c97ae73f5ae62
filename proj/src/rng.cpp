#include "rembed/rng.hpp"

#include <cmath>
#include <numbers>

#include "rembed/error.hpp"

namespace rembed {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

RandomStream::RandomStream(std::uint64_t seed) : key_(splitmix64(seed)) {}

std::uint64_t RandomStream::next_u64() {
    ++counter_;
    return splitmix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (cached_normal_) {
        const double z = *cached_normal_;
        cached_normal_.reset();
        return z;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("RandomStream::below: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

RandomStream RandomStream::fork(std::uint64_t id) const {
    return RandomStream(FromKey{}, splitmix64(key_ ^ splitmix64(id + kGolden)));
}

DenseMatrix RandomStream::gaussian_matrix(std::size_t rows, std::size_t cols) {
    DenseMatrix out(rows, cols);
    for (double& v : out.values()) v = normal();
    return out;
}

}  // namespace rembed

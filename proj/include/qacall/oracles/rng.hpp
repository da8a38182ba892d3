#pragma once

/**
 * @file
 * Counter-based random streams. Draw (seed, path, step) is a pure function
 * of its three inputs, so path batches can run on any thread in any order
 * and still reproduce bit-for-bit.
 */

#include <cstdint>

#include <boost/math/distributions/normal.hpp>

namespace qacall::oracles {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64 random bits for one (seed, path, step) triple.
[[nodiscard]] constexpr std::uint64_t stream_bits(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    return splitmix64(splitmix64(splitmix64(seed) ^ path) ^ (step + 0x632be59bd9b4e019ULL));
}

/// Uniform in the open interval (0, 1) with 53-bit resolution.
[[nodiscard]] constexpr double stream_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    return (static_cast<double>(stream_bits(seed, path, step) >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal by inverse CDF of the stream uniform.
[[nodiscard]] inline double stream_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, stream_uniform(seed, path, step));
}

} // namespace qacall::oracles

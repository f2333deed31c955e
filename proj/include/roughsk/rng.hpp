#pragma once

#include <cstdint>
#include <span>

// Counter-based normal streams.
//
// A stream is identified by a 64-bit key. The n-th raw word of a stream is
// the SplitMix64 output mix(key + (n + 1) * 0x9E3779B97F4A7C15), so any word
// can be produced without generating its predecessors. Normals come in pairs
// from Box-Muller on two consecutive words. Everything is integer arithmetic
// plus std::log/std::sqrt/std::cos/std::sin, which keeps streams reproducible
// across platforms with IEEE libm.

namespace roughsk::rng {

std::uint64_t mix64(std::uint64_t z);

/// Raw word `counter` of the stream `key`.
std::uint64_t word(std::uint64_t key, std::uint64_t counter);

/// Uniform in the open interval (0, 1) with 53 random bits.
double uniform(std::uint64_t key, std::uint64_t counter);

/// Key of a child stream; used as stream_key(seed, e, k) for path k of
/// epsilon index e.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

/// Writes out.size() standard normals of row `row` of a stream whose rows
/// have out.size() entries. Rows are independent of each other.
void normal_row(std::uint64_t key, std::uint64_t row, std::span<double> out);

}  // namespace roughsk::rng

#include "roughsk/rng.hpp"

#include <cmath>
#include <numbers>

namespace roughsk::rng {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t word(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + (counter + 1) * kGamma);
}

double uniform(std::uint64_t key, std::uint64_t counter) {
    return (static_cast<double>(word(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix64(seed ^ 0x5EEDC0DE12345678ULL);
    h = mix64(h + a * kGamma + 0x632BE59BD9B4E019ULL);
    h = mix64(h + b * kGamma + 0x2545F4914F6CDD1DULL);
    return h;
}

void normal_row(std::uint64_t key, std::uint64_t row, std::span<double> out) {
    const std::size_t pairs = (out.size() + 1) / 2;
    const std::uint64_t base = row * pairs * 2;
    for (std::size_t p = 0; p < pairs; ++p) {
        const double u1 = uniform(key, base + 2 * p);
        const double u2 = uniform(key, base + 2 * p + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        out[2 * p] = r * std::cos(theta);
        if (2 * p + 1 < out.size()) out[2 * p + 1] = r * std::sin(theta);
    }
}

}  // namespace roughsk::rng

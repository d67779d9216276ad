#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace filtop {

/// Counter-based random stream (splitmix64). Unlike std::mt19937 with
/// std::normal_distribution, every draw is pinned by the standard IEEE-754
/// formulas below, so streams are reproducible across compilers.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe under log().
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (two uniforms per draw).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

/// FNV-1a, used to fold dataset names into stream keys.
constexpr std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Mixes (seed, stream id, counter) into one stream key. Each component is
/// pushed through the full avalanche mixer, so streams keyed this way are
/// independent of generation order.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t id, std::uint64_t counter) {
    std::uint64_t k = RandomStream(seed).next_u64() ^ id;
    k = RandomStream(k).next_u64() ^ counter;
    return RandomStream(k).next_u64();
}

}  // namespace filtop

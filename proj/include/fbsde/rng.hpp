#ifndef FBSDE_RNG_HPP
#define FBSDE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace fbsde {

// Counter-style generator: every draw is a pure function of
// (seed, stream, path, counter), so parallel and serial fills agree
// bit-for-bit and streams can be consumed in any order.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                         std::uint64_t counter) {
    std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ path);
    h = splitmix64(h ^ counter);
    return h;
}

// Uniform on (0,1), never exactly 0 or 1.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                      std::uint64_t counter) {
    std::uint64_t bits = key(seed, stream, path, counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two counter draws.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                     std::uint64_t counter) {
    double u1 = uniform(seed, stream, path, 2 * counter);
    double u2 = uniform(seed, stream, path, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Stream ids used by the simulation layer.
inline constexpr std::uint64_t kBrownianStream = 0;
inline constexpr std::uint64_t kJumpStream = 1;

}  // namespace rng
}  // namespace fbsde

#endif

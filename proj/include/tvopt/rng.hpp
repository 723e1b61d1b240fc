#pragma once

#include <cstdint>
#include <random>

namespace tvopt {

// Counter-based seeding: every random quantity is a pure function of
// (seed, stream id, counter), so scenario regeneration is exactly reproducible
// and independent sub-streams never alias.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Engine for sub-stream `stream` of a scenario seed; mixed twice so that
// consecutive (seed, stream) pairs land far apart.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

// One standard normal draw addressed by counter; used for frozen noise tables.
inline double frozen_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    auto eng = substream(seed, splitmix64(stream) ^ counter);
    std::normal_distribution<double> n(0.0, 1.0);
    return n(eng);
}

}  // namespace tvopt

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace kdchoice {

// SplitMix64 finalizer. Full-avalanche 64-bit mix used wherever a derived
// seed has to be reproducible and documented (per-trial streams, per-file
// candidate sets).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent stream lanes for one master seed. A paired experiment runs the
// (k,d) process on lane Process and the single-choice run on lane Single so
// the two streams never overlap for the same trial index.
enum class StreamLane : std::uint64_t {
    Process = 0,
    Single = 1,
    Search = 2,
};

// Per-trial stream seed: mix(master XOR mix(4*index + lane)). Lanes occupy
// disjoint residues, so (index, lane) pairs never collide.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                    StreamLane lane = StreamLane::Process) noexcept {
    return mix64(master ^ mix64(4 * index + static_cast<std::uint64_t>(lane)));
}

// Seeded generator with platform-independent output. std::mt19937_64 has a
// standard-mandated sequence; the bounded draw below avoids
// std::uniform_int_distribution, whose mapping is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, bound) via 128-bit multiply with rejection
    // (Lemire 2019).
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("Rng::next_below: bound must be positive");
        }
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::uint32_t next_index(std::uint32_t bound) {
        return static_cast<std::uint32_t>(next_below(bound));
    }

    // Uniform double in [0,1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace kdchoice

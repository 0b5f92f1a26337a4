#pragma once

#include <cstdint>
#include <random>

namespace jadd {

/// Purpose tags for independent random streams derived from one master seed.
enum class StreamTag : std::uint64_t {
    SpreadingCode = 1,
    Activity = 2,
    Symbols = 3,
    Noise = 4,
    InfoBits = 5,
    StateEvolution = 6,
    Channel = 7,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based split: the stream for (master, index, tag) does not depend on
// how many other streams were drawn before it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, StreamTag tag);

inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t index, StreamTag tag) {
    return std::mt19937_64(derive_seed(master, index, tag));
}

}  // namespace jadd

#pragma once

// Per-(seed, index) random streams. Every sample draws from its own engine
// seeded from the triple (master seed, sample index, purpose tag), so the
// values do not depend on how samples are spread over workers.

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace wb {

// Same recurrence as std::mt19937_64; boost's implementation is about twice
// as fast here.
using Rng = boost::random::mt19937_64;

enum class StreamTag : std::uint32_t { gff = 1, edges = 2, brownian = 3, misc = 4 };

inline Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index),
                      std::uint32_t(index >> 32), static_cast<std::uint32_t>(tag)};
    return Rng(seq);
}

// Ziggurat normal sampler.
using Normal = boost::random::normal_distribution<double>;

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace wb

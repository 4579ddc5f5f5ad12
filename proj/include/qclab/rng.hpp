#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace qclab {

/// Identity of the generator/shuffle contract recorded in run metadata.
inline constexpr std::string_view kPrngContract =
    "mt19937_64 seeded by splitmix64(seed, stream); fisher-yates with 64-bit rejection sampling";

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent stream derived from a base seed and a stream key.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

/// Uniform integer in [0, bound) without the implementation-defined
/// std::uniform_int_distribution.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(std::mt19937_64& rng);

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng);

/// 0..n-1 permuted by a generator seeded with `seed`.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

}  // namespace qclab

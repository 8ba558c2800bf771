#pragma once

#include <cstdint>
#include <random>

namespace rismec {

/// splitmix64 finalizer; used to derive child seeds from a root seed.
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for stream `index` under `root`. Distinct indices give
/// statistically independent streams.
std::uint64_t child_seed(std::uint64_t root, std::uint64_t index);

using Rng = std::mt19937_64;

}  // namespace rismec

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace replab {

/// Stable seed derivation. Every random stream in the project is seeded from
/// (parent seed, component tag, index), so results do not depend on the order
/// in which components consume randomness.
uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index = 0);

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace replab

#include "replab/rng.hpp"

namespace replab {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index) {
  // FNV-1a over the tag, then splitmix finalizers to decorrelate nearby
  // (base, index) pairs.
  uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  h = splitmix64(h ^ splitmix64(base));
  return splitmix64(h ^ splitmix64(index));
}

}  // namespace replab

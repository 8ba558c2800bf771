#include "rismec/rng.hpp"

namespace rismec {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) {
  return mix_seed(mix_seed(root) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

}  // namespace rismec

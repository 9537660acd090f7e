#include "lifetime_pd/random.h"

namespace lifetime_pd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master);
  // Rehash the running state before folding in a key so that master and keys
  // are not interchangeable.
  for (std::uint64_t k : keys) h = splitmix64(splitmix64(h) ^ k);
  return h;
}

}  // namespace lifetime_pd

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace lifetime_pd {

/// Engine used for every random draw. Each independent stream (scenario,
/// replication, path) gets its own engine seeded through `derive_seed`, so
/// results never depend on the order in which streams are consumed.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a over the bytes of `text`; stable across platforms.
std::uint64_t fnv1a(std::string_view text) noexcept;

/// Substream seed: folds each key into the master seed with SplitMix64.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

}  // namespace lifetime_pd

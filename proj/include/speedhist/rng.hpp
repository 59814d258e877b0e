#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace speedhist {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

/// Child seed for stream `index` of `parent`. Children of one parent are
/// independent of each other and of how many siblings exist, so adding a
/// batch or an epoch never perturbs the seeds of the others.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  for (auto i : path) parent = derive_seed(parent, i);
  return parent;
}

}  // namespace speedhist

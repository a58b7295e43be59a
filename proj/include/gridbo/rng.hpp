// Copyright 2026 The gridbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef GRIDBO_RNG_HPP_
#define GRIDBO_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace gridbo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based child seed: the same (parent, tag, counter) triple always
/// yields the same stream, independent of how many other streams were drawn.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t counter = 0) noexcept {
  return mix64(mix64(parent ^ hash_tag(tag)) + mix64(counter + 0x632be59bd9b4e019ULL));
}

}  // namespace gridbo

#endif  // GRIDBO_RNG_HPP_
